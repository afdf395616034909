//! Discrete fractional Laplacian with exterior Dirichlet data.
//!
//! For a node `x_i` and a piecewise-linear interpolant of `u` the operator is
//!
//! ```text
//! (-Δ)^s u(x_i) = c_{1,s} P.V. ∫ (u(x_i) - u(y)) |x_i - y|^{-1-2s} dy
//! ```
//!
//! Off the singular cell `|y - x_i| < h` every hat function is integrated
//! exactly against the kernel. Inside the cell the integrand is replaced by
//! its even part, which for a piecewise-linear `u` equals the hat correction
//! `C (u_{i-1} - 2u_i + u_{i+1})`. The constant `C` is chosen so that the
//! scheme is exact on quadratics, which restores second-order consistency on
//! smooth data. Beyond `|y| = R` the tail model is integrated analytically.

use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, TailModel};
use crate::linalg::{DenseSym, SpdSystem};
use crate::quad;

/// Largest admissible `s`; `c_{1,s}` and the weights degenerate as `s -> 1`.
pub const S_MAX: f64 = 0.999;

/// `c_{n,s} = 4^s Γ(n/2 + s) / (π^{n/2} |Γ(-s)|)`.
pub fn normalization_constant(n: usize, s: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::UnsupportedDimension(n));
    }
    if !(s > 0.0 && s < S_MAX) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            reason: "must lie in (0, 0.999)",
        });
    }
    let half_n = n as f64 / 2.0;
    // |Γ(-s)| = Γ(1 - s) / s for s in (0, 1).
    let abs_gamma_neg = gamma(1.0 - s) / s;
    Ok(4f64.powf(s) * gamma(half_n + s) / (std::f64::consts::PI.powf(half_n) * abs_gamma_neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarField {
    AnalyticTail,
}

/// Quadrature options. Only second-order singular cells and analytic tails
/// are implemented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub singular_cell_order: usize,
    pub far_field: FarField,
    /// Cells summed explicitly before the asymptotic remainder in the
    /// singular-cell constant.
    pub remainder_cells: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            singular_cell_order: 2,
            far_field: FarField::AnalyticTail,
            remainder_cells: 1000,
        }
    }
}

/// `∫_a^b t^{-1-2s} dt`.
fn moment0(a: f64, b: f64, s: f64) -> f64 {
    (a.powf(-2.0 * s) - b.powf(-2.0 * s)) / (2.0 * s)
}

/// `∫_a^b t^{-2s} dt`, stable through `s = 1/2`.
fn moment1(a: f64, b: f64, s: f64) -> f64 {
    let q = 1.0 - 2.0 * s;
    let l = (b / a).ln();
    if (q * l).abs() < 1e-300 {
        l
    } else {
        a.powf(q) * (q * l).exp_m1() / q
    }
}

/// `∫_{m-1}^m (t - m + 1) t^{-1-2s} dt` for `m >= 2`.
fn rising_half(m: f64, s: f64) -> f64 {
    moment1(m - 1.0, m, s) - (m - 1.0) * moment0(m - 1.0, m, s)
}

/// `∫_m^{m+1} (m + 1 - t) t^{-1-2s} dt` for `m >= 1`.
fn falling_half(m: f64, s: f64) -> f64 {
    (m + 1.0) * moment0(m, m + 1.0, s) - moment1(m, m + 1.0, s)
}

/// `B = ∫_1^∞ {t}(1 - {t}) t^{-1-2s} dt`, the hat-interpolation defect of
/// `t^2` weighted by the kernel.
fn interpolation_defect(s: f64, cells: usize) -> f64 {
    let sigma = 1.0 + 2.0 * s;
    let rule = quad::gauss_legendre(16);
    let mut total = 0.0;
    for j in 1..cells {
        let jf = j as f64;
        total += quad::integrate(&rule, jf, jf + 1.0, |t| {
            (t - jf) * (jf + 1.0 - t) * t.powf(-sigma)
        });
    }
    // Euler-Maclaurin remainder for the periodic weight {t}(1-{t}).
    let j = cells as f64;
    total + j.powf(1.0 - sigma) / (6.0 * (sigma - 1.0)) - sigma * j.powf(-sigma - 1.0) / 360.0
}

/// Singular-cell constant `C` making the scheme exact on quadratics.
pub fn singular_constant(s: f64, qc: &QuadratureConfig) -> f64 {
    1.0 / (2.0 - 2.0 * s) - interpolation_defect(s, qc.remainder_cells)
}

/// Assembled operator on the interior unknowns.
#[derive(Debug, Clone)]
pub struct FracLapOperator {
    pub s: f64,
    pub c: f64,
    pub grid: Arc<Grid>,
    pub qc: QuadratureConfig,
    /// Interior block `A` (row-major, `c h^{-2s}` included).
    pub a: DenseSym,
    /// `w[m-1]`: coupling to a full hat at offset `m` (positive).
    weights: Vec<f64>,
    /// `half[m-1]`: coupling to the endpoint half hat at offset `m`.
    half: Vec<f64>,
    diag: f64,
}

/// Assembles the interior matrix and the exterior coupling weights.
pub fn assemble(grid: Arc<Grid>, s: f64, qc: QuadratureConfig) -> Result<FracLapOperator> {
    if !(s >= 0.5 && s < S_MAX) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            reason: "assembly requires s in [1/2, 0.999)",
        });
    }
    if qc.singular_cell_order != 2 {
        return Err(Error::OutOfRange {
            name: "singular_cell_order",
            value: qc.singular_cell_order as f64,
            reason: "only order 2 is implemented",
        });
    }
    let c = normalization_constant(1, s)?;
    let h = grid.h();
    let scale = c * h.powf(-2.0 * s);
    let cs = singular_constant(s, &qc);
    let nn = grid.len() - 1;
    let mut weights = Vec::with_capacity(nn);
    let mut half = Vec::with_capacity(nn);
    for m in 1..=nn {
        let mf = m as f64;
        let rise = if m >= 2 { rising_half(mf, s) } else { cs };
        weights.push(scale * (rise + falling_half(mf, s)));
        half.push(scale * rise);
    }
    let diag = scale * (1.0 / s + 2.0 * cs);
    let n = grid.n_interior();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = if i == j { diag } else { -weights[i.abs_diff(j) - 1] };
        }
    }
    Ok(FracLapOperator {
        s,
        c,
        grid,
        qc,
        a: DenseSym { n, data },
        weights,
        half,
        diag,
    })
}

/// Interior values of an operator application; exterior nodes are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl InteriorField {
    /// Value at node `i`, `None` outside the interior.
    pub fn at(&self, i: usize) -> Option<f64> {
        let r = self.grid.interior();
        r.contains(&i).then(|| self.values[i - r.start])
    }
}

impl FracLapOperator {
    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn diagonal(&self) -> f64 {
        self.diag
    }

    /// Coupling weight between interior node `i` and any node `j != i`
    /// (positive; enters the operator with a minus sign).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let m = i.abs_diff(j);
        if j == 0 || j == self.grid.len() - 1 {
            self.half[m - 1]
        } else {
            self.weights[m - 1]
        }
    }

    /// `∫_{|y|>R} tail(y) |x - y|^{-1-2s} dy` (without `c`).
    pub fn tail_integral(&self, tail: &TailModel, x: f64) -> f64 {
        let r = self.grid.spec.r;
        let s = self.s;
        match *tail {
            TailModel::Zero => 0.0,
            TailModel::Constant { left, right } => {
                (right * (r - x).powf(-2.0 * s) + left * (r + x).powf(-2.0 * s)) / (2.0 * s)
            }
            TailModel::Power { left, right, p } => {
                let mut v = 0.0;
                if right != 0.0 {
                    v += right * power_tail(r, p, s, x);
                }
                if left != 0.0 {
                    v += left * power_tail(r, p, s, -x);
                }
                v
            }
        }
    }

    /// Load vector `b(g)` over interior nodes: the exterior part of the
    /// operator applied to `g` (interior values of `g` are ignored).
    pub fn load(&self, g: &GridFunction) -> Result<Vec<f64>> {
        if g.grid.spec != self.grid.spec {
            return Err(Error::GridMismatch);
        }
        let grid = &self.grid;
        let last = grid.len() - 1;
        let ext: Vec<(usize, f64)> = grid
            .exterior()
            .map(|j| (j, g.values[j]))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        let b = grid
            .interior()
            .map(|i| {
                let mut acc = 0.0;
                for &(j, v) in &ext {
                    let m = i.abs_diff(j);
                    let w = if j == 0 || j == last { self.half[m - 1] } else { self.weights[m - 1] };
                    acc += w * v;
                }
                -acc - self.c * self.tail_integral(&g.tail, grid.x(i))
            })
            .collect();
        Ok(b)
    }

    /// `A u_interior + b(u_exterior)`.
    pub fn apply(&self, u: &GridFunction) -> Result<InteriorField> {
        let mut out = self.load(u)?;
        let mut au = vec![0.0; self.n()];
        self.a.matvec(u.interior_values(), &mut au);
        for (o, v) in out.iter_mut().zip(au) {
            *o += v;
        }
        Ok(InteriorField {
            grid: self.grid.clone(),
            values: out,
        })
    }
}

/// `apply` as a free function.
pub fn apply(op: &FracLapOperator, u: &GridFunction) -> Result<InteriorField> {
    op.apply(u)
}

/// `∫_R^∞ y^{-p} (y - x)^{-1-2s} dy` as a series in `x / R`.
fn power_tail(r: f64, p: f64, s: f64, x: f64) -> f64 {
    let sigma = 1.0 + 2.0 * s;
    let rho = x / r;
    let base = p + sigma - 1.0;
    let mut coef = 1.0; // (sigma)_k / k! * rho^k
    let mut total = 0.0;
    for k in 0..200_000 {
        let kf = k as f64;
        let term = coef / (base + kf);
        total += term;
        if term.abs() < 1e-17 * total.abs() && k > 4 {
            break;
        }
        coef *= (sigma + kf) / (kf + 1.0) * rho;
    }
    r.powf(1.0 - p - sigma) * total
}

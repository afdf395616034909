//! Convex solvers for `A u + b(g) + f(u) = 0`, the first-order condition of
//!
//! ```text
//! J(u) = h (½ uᵀA u + bᵀu + Σ Φ(u_i)),   Φ' = f.
//! ```
//!
//! The Newton system `(A + diag f'(u)) δu = -F` is solved at every step, and
//! the step is applied to `w = f(u)` rather than to `u`: the map
//! `u = f⁻¹(w)` absorbs the infinite slope of `f` at zero, so nodes can enter
//! and leave the dead core without the step collapsing. With `eps = 0`, nodes
//! where `f'` is infinite are held fixed; a positive `eps` evaluates `f'` at
//! `max(|u|, eps)` instead. The direction is a descent direction for `J`; a
//! backtracking line search enforces decrease and a proximal-gradient step
//! takes over if it fails.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fraclap::FracLapOperator;
use crate::grid::{Grid, GridFunction, TailModel};
use crate::linalg::{SpdSystem, Tridiag};

/// Reaction `u₊^γ - u₋^γ` (two-phase) or `u₊^γ` (one-phase).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionMode {
    TwoPhase,
    OnePhase,
}

impl std::fmt::Display for ReactionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReactionMode::TwoPhase => "two-phase",
            ReactionMode::OnePhase => "one-phase",
        })
    }
}

impl std::str::FromStr for ReactionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two-phase" => Ok(ReactionMode::TwoPhase),
            "one-phase" | "one-phase-positive" => Ok(ReactionMode::OnePhase),
            other => Err(Error::Parse(format!("unknown reaction mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionSpec {
    pub gamma: f64,
    pub mode: ReactionMode,
    /// Floor on `|u|` inside `f'`; zero pins nodes where `f'` is infinite.
    pub eps: f64,
}

impl ReactionSpec {
    pub fn new(gamma: f64, mode: ReactionMode) -> Result<Self> {
        Self::with_eps(gamma, mode, 0.0)
    }

    pub fn with_eps(gamma: f64, mode: ReactionMode, eps: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0 / 3.0) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
                reason: "must lie in (0, 1/3)",
            });
        }
        if !(0.0..=1e-6).contains(&eps) {
            return Err(Error::OutOfRange {
                name: "eps",
                value: eps,
                reason: "must lie in [0, 1e-6]",
            });
        }
        Ok(ReactionSpec { gamma, mode, eps })
    }

    pub fn two_phase(gamma: f64) -> Result<Self> {
        Self::new(gamma, ReactionMode::TwoPhase)
    }

    pub fn one_phase(gamma: f64) -> Result<Self> {
        Self::new(gamma, ReactionMode::OnePhase)
    }

    /// Local blow-up exponent `2/(1-γ)`.
    pub fn local_beta(&self) -> f64 {
        2.0 / (1.0 - self.gamma)
    }
}

/// `|t|^γ` via `exp(γ ln|t|)`, exactly zero at zero.
fn abs_pow(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (p * t.abs().ln()).exp()
    }
}

pub fn reaction(u: f64, spec: &ReactionSpec) -> f64 {
    match spec.mode {
        ReactionMode::TwoPhase => abs_pow(u, spec.gamma).copysign(u),
        ReactionMode::OnePhase if u > 0.0 => abs_pow(u, spec.gamma),
        ReactionMode::OnePhase => 0.0,
    }
}

/// Convex potential `Φ` with `Φ' = f`.
pub fn potential(u: f64, spec: &ReactionSpec) -> f64 {
    let g1 = 1.0 + spec.gamma;
    match spec.mode {
        ReactionMode::TwoPhase => abs_pow(u, g1) / g1,
        ReactionMode::OnePhase if u > 0.0 => abs_pow(u, g1) / g1,
        ReactionMode::OnePhase => 0.0,
    }
}

/// `Φ(b) - Φ(a)` without cancellation when `b` is close to `a`.
fn potential_change(a: f64, b: f64, spec: &ReactionSpec) -> f64 {
    let same_side = (a > 0.0 && b > 0.0) || (spec.mode == ReactionMode::TwoPhase && a < 0.0 && b < 0.0);
    if !same_side {
        return potential(b, spec) - potential(a, spec);
    }
    let g1 = 1.0 + spec.gamma;
    potential(a, spec) * (g1 * ((b - a) / a).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Sufficient-decrease constant.
    pub armijo: f64,
    pub shrink: f64,
    pub min_step: f64,
    /// Relative roundoff allowance on energy comparisons.
    pub slack: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            armijo: 1e-4,
            shrink: 0.5,
            min_step: 1e-10,
            slack: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    ProximalGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub max_iters: usize,
    pub damping: LineSearch,
    pub fallback: Fallback,
    /// Consecutive fallback steps without residual progress before giving up.
    pub stall_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-9,
            max_iters: 200,
            damping: LineSearch::default(),
            fallback: Fallback::ProximalGradient,
            stall_limit: 50,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(residual_tol: f64) -> Result<Self> {
        let cfg = SolverConfig {
            residual_tol,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol >= 1e-12) {
            return Err(Error::OutOfRange {
                name: "residual_tol",
                value: self.residual_tol,
                reason: "must be at least 1e-12",
            });
        }
        if self.max_iters < 1 {
            return Err(Error::OutOfRange {
                name: "max_iters",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Start,
    Newton,
    Proximal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub residual: f64,
    pub energy: f64,
    /// Kind of step that produced this iterate.
    pub kind: StepKind,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: GridFunction,
    pub residual_inf: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub spec: ReactionSpec,
    /// `None` for the local (s = 1) problem.
    pub s: Option<f64>,
    pub threads: usize,
}

impl SolveReport {
    /// Largest energy increase between consecutive iterates, relative to the
    /// energy scale (zero for a monotone trace).
    pub fn max_energy_increase(&self) -> f64 {
        self.trace
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(0.0, f64::max)
    }

    /// Rate `2s/(1-γ)` (with `s = 1` for the local problem).
    pub fn beta(&self) -> f64 {
        2.0 * self.s.unwrap_or(1.0) / (1.0 - self.spec.gamma)
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                residual: self.residual_inf,
                iterations: self.iterations,
            })
        }
    }
}

struct Problem<'a> {
    sys: &'a dyn SpdSystem,
    b: &'a [f64],
    h: f64,
    spec: ReactionSpec,
}

struct Outcome {
    u: Vec<f64>,
    residual: f64,
    energy: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<IterationRecord>,
}

impl Problem<'_> {
    fn au(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; u.len()];
        self.sys.matvec(u, &mut y);
        y
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let au = self.au(u);
        let quad: f64 = 0.5 * u.iter().zip(&au).map(|(a, b)| a * b).sum::<f64>();
        let lin: f64 = u.iter().zip(self.b).map(|(a, b)| a * b).sum();
        let pot: f64 = u.iter().map(|&v| potential(v, &self.spec)).sum();
        self.h * (quad + lin + pot)
    }

    /// `J(v) - J(u)` evaluated from the increment, so that it stays accurate
    /// when the change is far below the size of `J`; `grad = A u + b`.
    /// Also returns the magnitude of its terms.
    fn energy_change(&self, u: &[f64], grad: &[f64], v: &[f64]) -> (f64, f64) {
        let d: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
        let ad = self.au(&d);
        let quad = 0.5 * d.iter().zip(&ad).map(|(a, b)| a * b).sum::<f64>();
        let lin: f64 = d.iter().zip(grad).map(|(a, b)| a * b).sum();
        let (mut pot, mut mag) = (0.0, quad.abs() + lin.abs());
        for (&a, &b) in u.iter().zip(v) {
            let dp = potential_change(a, b, &self.spec);
            pot += dp;
            mag += dp.abs();
        }
        (self.h * (quad + lin + pot), self.h * mag)
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let au = self.au(u);
        au.iter()
            .zip(self.b)
            .zip(u)
            .map(|((a, b), &v)| a + b + reaction(v, &self.spec))
            .collect()
    }

    fn positive_branch(&self, w: f64) -> bool {
        self.spec.mode == ReactionMode::TwoPhase || w > 0.0
    }

    fn to_w(&self, u: f64) -> f64 {
        if self.positive_branch(u) {
            reaction(u, &self.spec)
        } else {
            u
        }
    }

    fn from_w(&self, w: f64) -> f64 {
        if self.positive_branch(w) {
            abs_pow(w, 1.0 / self.spec.gamma).copysign(w)
        } else {
            w
        }
    }

    /// Exact per-node minimizer of `½(v - z)² + τ Φ(v)`.
    fn prox(&self, z: f64, tau: f64) -> f64 {
        if z == 0.0 || (self.spec.mode == ReactionMode::OnePhase && z < 0.0) {
            return z;
        }
        // |v| solves r + τ r^γ = |z| on [0, |z|]; safeguarded Newton.
        let target = z.abs();
        let g = self.spec.gamma;
        let (mut lo, mut hi) = (0.0, target);
        let mut r = 0.5 * target;
        for _ in 0..200 {
            let val = r + tau * abs_pow(r, g) - target;
            if val > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let slope = 1.0 + tau * g * abs_pow(r, g - 1.0);
            let mut next = r - val / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-16 * target || hi - lo <= 1e-16 * target {
                r = next;
                break;
            }
            r = next;
        }
        r.copysign(z)
    }

    fn minimize(&self, init: Vec<f64>, cfg: &SolverConfig) -> Result<Outcome> {
        let n = init.len();
        let spec = self.spec;
        let ls = cfg.damping;
        let mut w: Vec<f64> = init.iter().map(|&u| self.to_w(u)).collect();
        let mut u: Vec<f64> = w.iter().map(|&v| self.from_w(v)).collect();
        let lipschitz = self.sys.gershgorin();
        let mut trace = Vec::new();
        let mut kind = StepKind::Start;
        let mut step = 0.0;
        let mut best_res = f64::INFINITY;
        let mut stall = 0;
        let mut iterations = 0;
        let mut energy = self.energy(&u);
        loop {
            let f = self.residual(&u);
            let res = f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            trace.push(IterationRecord {
                residual: res,
                energy,
                kind,
                step,
            });
            if res <= cfg.residual_tol || iterations >= cfg.max_iters || stall >= cfg.stall_limit {
                return Ok(Outcome {
                    u,
                    residual: res,
                    energy,
                    iterations,
                    converged: res <= cfg.residual_tol,
                    trace,
                });
            }
            iterations += 1;
            if res < best_res * (1.0 - 1e-3) {
                best_res = res;
                stall = 0;
            } else {
                stall += 1;
            }

            // Newton direction.
            let mut d = vec![0.0; n];
            let mut pinned = vec![false; n];
            for i in 0..n {
                if !self.positive_branch(w[i]) {
                    continue;
                }
                let base = u[i].abs().max(spec.eps);
                let di = if base == 0.0 { f64::INFINITY } else { spec.gamma * abs_pow(base, spec.gamma - 1.0) };
                if di.is_finite() && di < 1e250 {
                    d[i] = di;
                } else {
                    pinned[i] = true;
                }
            }
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let du = self.sys.solve_shifted(&d, &pinned, &rhs)?;
            let slope: f64 = self.h * f.iter().zip(&du).map(|(a, b)| a * b).sum::<f64>();
            let adu = self.au(&du);
            let dw: Vec<f64> = (0..n)
                .map(|i| if self.positive_branch(w[i]) { -f[i] - adu[i] } else { du[i] })
                .collect();

            let au = self.au(&u);
            let grad: Vec<f64> = au.iter().zip(self.b).map(|(a, b)| a + b).collect();
            let mut t = 1.0;
            let mut accepted = None;
            while t >= ls.min_step {
                let cand_w: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a + t * b).collect();
                let cand_u: Vec<f64> = cand_w.iter().map(|&v| self.from_w(v)).collect();
                let (change, scale) = self.energy_change(&u, &grad, &cand_u);
                if change <= 0.0 && change <= ls.armijo * t * slope + ls.slack * scale {
                    accepted = Some((cand_w, cand_u, change));
                    break;
                }
                t *= ls.shrink;
            }
            match accepted {
                Some((cw, cu, change)) => {
                    w = cw;
                    u = cu;
                    energy += change;
                    kind = StepKind::Newton;
                    step = t;
                }
                None => {
                    let tau = 1.0 / lipschitz;
                    let prox: Vec<f64> = (0..n).map(|i| self.prox(u[i] - tau * grad[i], tau)).collect();
                    let cand_w: Vec<f64> = prox.iter().map(|&v| self.to_w(v)).collect();
                    let cand: Vec<f64> = cand_w.iter().map(|&v| self.from_w(v)).collect();
                    let (change, _) = self.energy_change(&u, &grad, &cand);
                    if change <= 0.0 {
                        w = cand_w;
                        u = cand;
                        energy += change;
                    } else {
                        // Roundoff-level increase: keep the iterate, count a stall.
                        stall += 1;
                    }
                    kind = StepKind::Proximal;
                    step = tau;
                }
            }
        }
    }
}

fn check_grid(op: &FracLapOperator, g: &GridFunction) -> Result<()> {
    if g.grid.spec != op.grid.spec {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

/// `J(u)` for the nonlocal problem with exterior data `g`.
pub fn energy(u: &GridFunction, op: &FracLapOperator, g: &GridFunction, spec: &ReactionSpec) -> Result<f64> {
    check_grid(op, u)?;
    let b = op.load(g)?;
    let p = Problem {
        sys: &op.a,
        b: &b,
        h: op.grid.h(),
        spec: *spec,
    };
    Ok(p.energy(u.interior_values()))
}

/// Gradient of `J` over interior nodes: `h (A u + b + f(u))`.
pub fn energy_gradient(u: &GridFunction, op: &FracLapOperator, g: &GridFunction, spec: &ReactionSpec) -> Result<Vec<f64>> {
    Ok(residual(u, op, g, spec)?.into_iter().map(|v| v * op.grid.h()).collect())
}

/// `A u + b(g) + f(u)` over interior nodes.
pub fn residual(u: &GridFunction, op: &FracLapOperator, g: &GridFunction, spec: &ReactionSpec) -> Result<Vec<f64>> {
    check_grid(op, u)?;
    let b = op.load(g)?;
    let p = Problem {
        sys: &op.a,
        b: &b,
        h: op.grid.h(),
        spec: *spec,
    };
    Ok(p.residual(u.interior_values()))
}

fn assemble_solution(grid: &Arc<Grid>, interior: Vec<f64>, exterior: &GridFunction) -> GridFunction {
    let mut values = exterior.values.clone();
    let r = grid.interior();
    values[r].copy_from_slice(&interior);
    GridFunction {
        grid: grid.clone(),
        values,
        tail: exterior.tail,
    }
}

/// Solves the nonlocal problem, starting from the s-harmonic extension of `g`.
pub fn solve(op: &FracLapOperator, g: &GridFunction, spec: &ReactionSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    let b = op.load(g)?;
    solve_with_load(op, g, &b, spec, cfg, None)
}

/// Solves from a caller-supplied interior initial guess.
pub fn solve_from(
    op: &FracLapOperator,
    g: &GridFunction,
    spec: &ReactionSpec,
    cfg: &SolverConfig,
    init: &[f64],
) -> Result<SolveReport> {
    if init.len() != op.n() {
        return Err(Error::GridMismatch);
    }
    let b = op.load(g)?;
    solve_with_load(op, g, &b, spec, cfg, Some(init))
}

/// Solve with a precomputed load `b = b(g)`; `g` supplies the exterior values
/// of the returned function.
pub fn solve_with_load(
    op: &FracLapOperator,
    g: &GridFunction,
    b: &[f64],
    spec: &ReactionSpec,
    cfg: &SolverConfig,
    init: Option<&[f64]>,
) -> Result<SolveReport> {
    check_grid(op, g)?;
    cfg.validate()?;
    let p = Problem {
        sys: &op.a,
        b,
        h: op.grid.h(),
        spec: *spec,
    };
    let start = match init {
        Some(v) => v.to_vec(),
        None => harmonic(&p)?,
    };
    let out = p.minimize(start, cfg)?;
    Ok(SolveReport {
        u: assemble_solution(&op.grid, out.u, g),
        residual_inf: out.residual,
        energy: out.energy,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        spec: *spec,
        s: Some(op.s),
        threads: 1,
    })
}

fn harmonic(p: &Problem) -> Result<Vec<f64>> {
    let n = p.b.len();
    if p.b.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    let rhs: Vec<f64> = p.b.iter().map(|v| -v).collect();
    p.sys.solve_shifted(&vec![0.0; n], &vec![false; n], &rhs)
}

/// Classical problem `u'' = f(u)` on `(-a, a)` with Dirichlet values at `±a`.
///
/// The returned function is extended by the boundary values outside `(-a, a)`.
pub fn solve_local(grid: Arc<Grid>, boundary: (f64, f64), spec: &ReactionSpec, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let (left, right) = boundary;
    if !(left.is_finite() && right.is_finite()) {
        return Err(Error::OutOfRange {
            name: "boundary",
            value: if left.is_finite() { right } else { left },
            reason: "must be finite",
        });
    }
    let h = grid.h();
    let n = grid.n_interior();
    let ih2 = 1.0 / (h * h);
    let sys = Tridiag {
        diag: vec![2.0 * ih2; n],
        off: -ih2,
    };
    let mut b = vec![0.0; n];
    b[0] -= left * ih2;
    b[n - 1] -= right * ih2;
    let p = Problem {
        sys: &sys,
        b: &b,
        h,
        spec: *spec,
    };
    let start = harmonic(&p)?;
    let out = p.minimize(start, cfg)?;
    let mid = grid.center();
    let ext: Vec<f64> = (0..grid.len()).map(|i| if i < mid { left } else { right }).collect();
    let ext = GridFunction {
        grid: grid.clone(),
        values: ext,
        tail: TailModel::Constant { left, right },
    };
    Ok(SolveReport {
        u: assemble_solution(&grid, out.u, &ext),
        residual_inf: out.residual,
        energy: out.energy,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        spec: *spec,
        s: None,
        threads: 1,
    })
}

//! Uniform 1D grids with an interior region `(-a, a)`, an exterior band up to
//! `|x| = R`, a far-field tail model and discrete calculus.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

const LATTICE_TOL: f64 = 1e-9;

/// Geometry of a truncated domain `[-R, R]` with interior `(-a, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub a: f64,
    pub r: f64,
    pub h: f64,
    pub n: usize,
}

fn lattice_count(len: f64, h: f64, name: &str) -> Result<usize> {
    let q = len / h;
    let k = q.round();
    if (q - k).abs() > LATTICE_TOL * q.max(1.0) {
        return Err(Error::InvalidGrid(format!("{name}/h = {q} is not an integer")));
    }
    Ok(k as usize)
}

impl GridSpec {
    /// Validates a one-dimensional spec.
    ///
    /// Hard requirements are integer `a/h` and `R/h`, `a/h >= 1` and `R > a`.
    /// The resolution guidelines `a/h >= 4`, `R >= 2a` and `h <= a/16` are
    /// reported by [`GridSpec::warnings`] instead of being enforced, so that
    /// very coarse grids remain usable for lattice tests.
    pub fn new(a: f64, r: f64, h: f64) -> Result<Self> {
        Self::with_dim(a, r, h, 1)
    }

    pub fn with_dim(a: f64, r: f64, h: f64, n: usize) -> Result<Self> {
        for (name, v) in [("a", a), ("R", r), ("h", h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {v} must be positive")));
            }
        }
        if n != 1 {
            return Err(Error::UnsupportedDimension(n));
        }
        let m = lattice_count(a, h, "a")?;
        let k = lattice_count(r, h, "R")?;
        if m < 1 {
            return Err(Error::InvalidGrid("a/h must be at least 1".into()));
        }
        if k <= m {
            return Err(Error::InvalidGrid(format!("R = {r} must exceed a = {a}")));
        }
        Ok(GridSpec { a, r, h, n })
    }

    /// Resolution guidelines that this spec does not meet.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.a / self.h < 4.0 - LATTICE_TOL {
            out.push(format!("a/h = {} is below 4", self.a / self.h));
        }
        if self.r < 2.0 * self.a {
            out.push(format!("R = {} is below 2a", self.r));
        }
        if self.h > self.a / 16.0 {
            out.push(format!("h = {} exceeds a/16", self.h));
        }
        out
    }

    pub fn interior_half(&self) -> usize {
        (self.a / self.h).round() as usize
    }

    pub fn half_nodes(&self) -> usize {
        (self.r / self.h).round() as usize
    }
}

/// Node coordinates plus the interior/exterior partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    nodes: Vec<f64>,
    interior: Range<usize>,
}

/// Builds the grid for a validated spec.
pub fn make_grid(spec: GridSpec) -> Grid {
    let k = spec.half_nodes();
    let m = spec.interior_half();
    let nodes = (0..=2 * k).map(|i| -spec.r + i as f64 * spec.h).collect();
    Grid {
        spec,
        nodes,
        interior: (k - m + 1)..(k + m),
    }
}

impl Grid {
    pub fn new(a: f64, r: f64, h: f64) -> Result<Arc<Grid>> {
        Ok(Arc::new(make_grid(GridSpec::new(a, r, h)?)))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    /// Index range of interior nodes (`|x| < a`).
    pub fn interior(&self) -> Range<usize> {
        self.interior.clone()
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior.contains(&i)
    }

    pub fn exterior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.is_interior(i))
    }

    /// Index of the node at the origin.
    pub fn center(&self) -> usize {
        self.spec.half_nodes()
    }

    /// Index of the node nearest to `x`, if `x` lies on the lattice.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let q = (x + self.spec.r) / self.spec.h;
        let k = q.round();
        if (q - k).abs() <= 1e-9 && k >= 0.0 && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Indices of nodes in the closed ball `|x - x0| <= r`.
    pub fn ball(&self, x0: f64, r: f64) -> Result<Range<usize>> {
        let h = self.spec.h;
        if r < h * (1.0 - 1e-12) {
            return Err(Error::RadiusTooSmall { r, h });
        }
        let slack = h * 1e-9;
        let (lo, hi) = (x0 - r, x0 + r);
        if lo < -self.spec.r - slack || hi > self.spec.r + slack {
            return Err(Error::BallOutsideGrid { lo, hi });
        }
        let first = ((lo - slack + self.spec.r) / h).ceil().max(0.0) as usize;
        let last = (((hi + slack + self.spec.r) / h).floor() as usize).min(self.len() - 1);
        Ok(first..last + 1)
    }
}

/// Values beyond `|y| = R`: `right * y^-p` for `y > R` and `left * |y|^-p`
/// for `y < -R`. Constants use `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    Zero,
    Constant { left: f64, right: f64 },
    Power { left: f64, right: f64, p: f64 },
}

impl TailModel {
    pub fn constant(c: f64) -> Self {
        TailModel::Constant { left: c, right: c }
    }

    /// `c * sign(y)` beyond `R`.
    pub fn odd_constant(c: f64) -> Self {
        TailModel::Constant { left: -c, right: c }
    }

    pub fn power(c: f64, p: f64) -> Result<Self> {
        Self::power_sided(c, c, p)
    }

    pub fn power_sided(left: f64, right: f64, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidTail(format!("decay exponent {p} must be positive")));
        }
        Ok(TailModel::Power { left, right, p })
    }

    /// `(left, right, p)` with `p = 0` for constants.
    pub fn parts(&self) -> (f64, f64, f64) {
        match *self {
            TailModel::Zero => (0.0, 0.0, 0.0),
            TailModel::Constant { left, right } => (left, right, 0.0),
            TailModel::Power { left, right, p } => (left, right, p),
        }
    }

    pub fn is_zero(&self) -> bool {
        let (l, r, _) = self.parts();
        l == 0.0 && r == 0.0
    }

    /// Tail value at `y`, `|y| > R`.
    pub fn value(&self, y: f64) -> f64 {
        let (l, r, p) = self.parts();
        let c = if y > 0.0 { r } else { l };
        if c == 0.0 {
            0.0
        } else if p == 0.0 {
            c
        } else {
            c * y.abs().powf(-p)
        }
    }

    pub fn scaled(&self, k: f64) -> TailModel {
        match *self {
            TailModel::Zero => TailModel::Zero,
            TailModel::Constant { left, right } => TailModel::Constant {
                left: k * left,
                right: k * right,
            },
            TailModel::Power { left, right, p } => TailModel::Power {
                left: k * left,
                right: k * right,
                p,
            },
        }
    }

    /// True if `self >= other` at every `|y| > r`.
    pub fn dominates(&self, other: &TailModel, r: f64) -> bool {
        let (l1, r1, p1) = self.parts();
        let (l2, r2, p2) = other.parts();
        if p1 == p2 || self.is_zero() || other.is_zero() {
            // Shared profile |y|^-p, or one side vanishes: compare coefficients.
            return l1 >= l2 && r1 >= r2;
        }
        // Different decay rates: compare on a geometric sweep and at infinity.
        let mut y = r * (1.0 + 1e-12);
        for _ in 0..200 {
            if self.value(y) < other.value(y) || self.value(-y) < other.value(-y) {
                return false;
            }
            y *= 1.25;
        }
        let lim = |c: f64, p: f64| if p == 0.0 { c } else { 0.0 };
        lim(r1, p1) >= lim(r2, p2) && lim(l1, p1) >= lim(l2, p2)
    }

    /// `int_{|y|>R} |tail(y)| / (1 + |y|^{1+2s}) dy`.
    pub fn weighted_integral(&self, r: f64, s: f64) -> f64 {
        let (l, rt, p) = self.parts();
        let w = tail_weight_integral(r, p, 1.0 + 2.0 * s);
        (l.abs() + rt.abs()) * w
    }
}

/// `int_R^inf y^-p / (1 + y^sigma) dy`.
fn tail_weight_integral(r: f64, p: f64, sigma: f64) -> f64 {
    let split = r.max(2.0);
    let mut total = 0.0;
    if split > r {
        let rule = quad::gauss_legendre(40);
        let f = |y: f64| y.powf(-p) / (1.0 + y.powf(sigma));
        let pieces = 16;
        let step = (split - r) / pieces as f64;
        for k in 0..pieces {
            let lo = r + k as f64 * step;
            total += quad::integrate(&rule, lo, lo + step, f);
        }
    }
    // Alternating series in split^-sigma, split >= 2.
    for k in 0..200 {
        let e = p + sigma * (k as f64 + 1.0) - 1.0;
        let term = split.powf(-e) / e;
        total += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 * total.abs() {
            break;
        }
    }
    total
}

impl fmt::Display for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TailModel::Zero => write!(f, "zero"),
            TailModel::Constant { left, right } if left == right => write!(f, "const:{right:e}"),
            TailModel::Constant { left, right } => write!(f, "const:{left:e},{right:e}"),
            TailModel::Power { left, right, p } if left == right => {
                write!(f, "power:{right:e},{p:e}")
            }
            TailModel::Power { left, right, p } => write!(f, "power:{left:e},{right:e},{p:e}"),
        }
    }
}

impl FromStr for TailModel {
    type Err = Error;

    /// Parses `zero`, `const:<c>`, `const:<left>,<right>`, `power:<c>,<p>` or
    /// `power:<left>,<right>,<p>`.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "zero" {
            return Ok(TailModel::Zero);
        }
        let bad = || Error::InvalidTail(text.to_string());
        let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        match (kind, nums.as_slice()) {
            ("const", [c]) => Ok(TailModel::constant(*c)),
            ("const", [l, r]) => Ok(TailModel::Constant { left: *l, right: *r }),
            ("power", [c, p]) => TailModel::power(*c, *p),
            ("power", [l, r, p]) => TailModel::power_sided(*l, *r, *p),
            _ => Err(bad()),
        }
    }
}

/// Nodal values on a grid together with the far-field tail.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub tail: TailModel,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, tail: TailModel) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(GridFunction { grid, values, tail })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            values: vec![0.0; n],
            tail: TailModel::Zero,
        }
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.values[self.grid.interior()]
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec == other.grid.spec
    }

    pub fn scaled(&self, k: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| k * v).collect(),
            tail: self.tail.scaled(k),
        }
    }

    /// Max of `|u|` over interior nodes.
    pub fn interior_sup(&self) -> f64 {
        self.interior_values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max of `|u|` over all nodes.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Samples `f` at every node.
pub fn sample(f: impl Fn(f64) -> f64, grid: Arc<Grid>, tail: TailModel) -> Result<GridFunction> {
    let values = grid.nodes().iter().map(|&x| f(x)).collect();
    GridFunction::new(grid, values, tail)
}

/// Max of `|u|` over nodes with `|x - x0| <= r + h*1e-9`.
pub fn sup_on_ball(u: &GridFunction, x0: f64, r: f64) -> Result<f64> {
    let idx = u.grid.ball(x0, r)?;
    Ok(u.values[idx].iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Central differences, one-sided second-order stencils at the ends.
pub fn discrete_derivative(u: &GridFunction, order: usize) -> Result<GridFunction> {
    let n = u.values.len();
    if n < 5 {
        return Err(Error::TooFewNodes(n));
    }
    let h = u.grid.h();
    let v = &u.values;
    let out: Vec<f64> = match order {
        1 => (0..n)
            .map(|i| match i {
                0 => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
                _ if i == n - 1 => (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h),
                _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
            })
            .collect(),
        2 => (0..n)
            .map(|i| match i {
                0 => (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h),
                _ if i == n - 1 => {
                    (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h)
                }
                _ => (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h),
            })
            .collect(),
        k => return Err(Error::BadOrder(k)),
    };
    GridFunction::new(u.grid.clone(), out, TailModel::Zero)
}

/// Discrete Hölder seminorm of the `order`-th derivative over node pairs in
/// the ball.
pub fn holder_seminorm(u: &GridFunction, alpha: f64, x0: f64, r: f64, order: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            reason: "must lie in (0, 1]",
        });
    }
    let d = match order {
        0 => u.clone(),
        1 | 2 => discrete_derivative(u, order)?,
        k => return Err(Error::BadOrder(k)),
    };
    let idx = u.grid.ball(x0, r)?;
    if idx.len() < 2 {
        return Err(Error::EmptyPairs);
    }
    let x = u.grid.nodes();
    let mut best: f64 = 0.0;
    for i in idx.clone() {
        for j in (i + 1)..idx.end {
            let q = (d.values[i] - d.values[j]).abs() / (x[j] - x[i]).powf(alpha);
            best = best.max(q);
        }
    }
    Ok(best)
}

/// Trapezoid approximation of `int |u(y)| / (1 + |y|^{1+2s}) dy` on `[-R, R]`
/// plus the analytic contribution of the tail.
pub fn tail_norm(u: &GridFunction, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            reason: "must lie in (0, 1)",
        });
    }
    let sigma = 1.0 + 2.0 * s;
    let x = u.grid.nodes();
    let n = x.len();
    let w = |i: usize| u.values[i].abs() / (1.0 + x[i].abs().powf(sigma));
    let mut inner: f64 = (1..n - 1).map(w).sum();
    inner += 0.5 * (w(0) + w(n - 1));
    Ok(inner * u.grid.h() + u.tail.weighted_integral(u.grid.spec.r, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts() {
        let g = make_grid(GridSpec::new(1.0, 4.0, 0.25).unwrap());
        assert_eq!(g.len(), 33);
        assert_eq!(g.n_interior(), 7);
        let xs: Vec<f64> = g.interior().map(|i| g.x(i)).collect();
        assert_eq!(xs, vec![-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75]);
        let g = make_grid(GridSpec::new(1.0, 2.0, 1.0 / 64.0).unwrap());
        assert_eq!(g.len(), 257);
    }

    #[test]
    fn rejects_off_lattice() {
        assert!(matches!(GridSpec::new(1.0, 1.5, 0.3), Err(Error::InvalidGrid(_))));
        assert!(GridSpec::new(1.0, 1.0, 0.25).is_err());
        assert!(matches!(
            GridSpec::with_dim(1.0, 2.0, 0.25, 2),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn tail_encoding_roundtrip() {
        for t in [
            TailModel::Zero,
            TailModel::constant(1.5),
            TailModel::odd_constant(0.25),
            TailModel::power(2.0, 2.9).unwrap(),
            TailModel::power_sided(-1.0, 1.0, 1.9).unwrap(),
        ] {
            let back: TailModel = t.to_string().parse().unwrap();
            assert_eq!(back, t);
        }
        assert!("power:1,0".parse::<TailModel>().is_err());
        assert!("wave:1".parse::<TailModel>().is_err());
    }

    #[test]
    fn ball_membership_closed() {
        let g = Grid::new(1.0, 2.0, 0.25).unwrap();
        let b = g.ball(0.0, 0.5).unwrap();
        assert_eq!(b.len(), 5);
        assert!(g.ball(1.9, 0.5).is_err());
        assert!(g.ball(0.0, 0.1).is_err());
        let full = g.ball(0.0, 2.0).unwrap();
        assert_eq!(full, 0..g.len());
    }

    #[test]
    fn tail_weight_matches_arctan() {
        // s = 1/2: int_R^inf dy / (1 + y^2) = pi/2 - atan(R).
        for r in [0.5, 1.0, 3.0, 64.0] {
            let v = tail_weight_integral(r, 0.0, 2.0);
            let exact = std::f64::consts::FRAC_PI_2 - f64::atan(r);
            assert!((v - exact).abs() < 1e-13, "{r}: {v} vs {exact}");
        }
    }
}

use crate::error::{Error, Result};
use crate::grid::{sup_on_ball, GridFunction};

/// Per-doubling factor separating the classes.
const FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Decaying,
    Critical,
    Growing,
}

impl std::fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthClass::Decaying => "decaying",
            GrowthClass::Critical => "critical",
            GrowthClass::Growing => "growing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleReport {
    pub beta: f64,
    pub radii: Vec<f64>,
    /// `q(R) = sup_{B_R} |u| / R^β`.
    pub q: Vec<f64>,
    pub class: GrowthClass,
    pub sup: f64,
    /// For solver outputs classified as decaying: whether `sup |u|` is below
    /// the smallness tolerance. `None` when the conclusion is not examined.
    pub conclusion_holds: Option<bool>,
}

/// Growth probe about the origin. `q` decaying by at least 10% per doubling
/// of `R` is "decaying", staying within 10% per doubling is "critical".
pub fn liouville_probe(
    u: &GridFunction,
    s: f64,
    gamma: f64,
    radii: &[f64],
    solver_output: bool,
    smallness_tol: f64,
) -> Result<LiouvilleReport> {
    if !(s > 0.0 && s <= 1.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange { name: "s", value: s, reason: "need s in (0, 1], gamma in (0, 1)" });
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadWindow("radii must be increasing, at least two".into()));
    }
    let beta = 2.0 * s / (1.0 - gamma);
    let mut q = Vec::with_capacity(radii.len());
    for &r in radii {
        q.push(sup_on_ball(u, 0.0, r)? / r.powf(beta));
    }
    let per_doubling: Vec<f64> = (0..q.len() - 1)
        .map(|k| {
            let e = std::f64::consts::LN_2 / (radii[k + 1] / radii[k]).ln();
            (q[k] / q[k + 1]).powf(e)
        })
        .collect();
    let class = if q.iter().all(|&v| v == 0.0) || per_doubling.iter().all(|&f| f >= FACTOR) {
        GrowthClass::Decaying
    } else if per_doubling.iter().all(|&f| f < FACTOR && f > 1.0 / FACTOR) {
        GrowthClass::Critical
    } else {
        GrowthClass::Growing
    };
    let sup = u.sup();
    let conclusion_holds = (solver_output && class == GrowthClass::Decaying).then_some(sup <= smallness_tol);
    Ok(LiouvilleReport { beta, radii: radii.to_vec(), q, class, sup, conclusion_holds })
}

use crate::error::{Error, Result};
use crate::fraclap::FracLapOperator;
use crate::grid::{discrete_derivative, GridFunction};
use crate::profiles::{ExteriorData, ExteriorShape};
use crate::solver::{solve_with_load, ReactionSpec, SolveReport, SolverConfig};

/// Geometric bisection settings for the critical amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConfig {
    pub lo: f64,
    pub hi: f64,
    /// Stop once `hi / lo <= 1 + rel_tol`.
    pub rel_tol: f64,
    pub x0: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { lo: 1.0, hi: 256.0, rel_tol: 1e-4, x0: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalAmplitude {
    /// Largest amplitude found that passes the test (the lower bracket end).
    pub amplitude: f64,
    pub bracket: (f64, f64),
    pub report: SolveReport,
    pub solves: usize,
}

/// Branching test at `x0` with thresholds `‖u‖_{L∞(Ω)} (h^β, h^{β-1}, h^{β-2})`.
pub fn passes_normalized_test(u: &GridFunction, x0: f64, beta: f64) -> Result<bool> {
    let i = u.grid.node_at(x0).filter(|&i| u.grid.is_interior(i)).ok_or(Error::OutOfRange {
        name: "x0",
        value: x0,
        reason: "must be an interior node",
    })?;
    let scale = u.interior_sup();
    if scale == 0.0 {
        return Ok(true);
    }
    let h = u.grid.h();
    let du = discrete_derivative(u, 1)?;
    let d2u = discrete_derivative(u, 2)?;
    Ok(u.values[i].abs() <= scale * h.powf(beta)
        && du.values[i].abs() <= scale * h.powf(beta - 1.0)
        && d2u.values[i].abs() <= scale * h.powf(beta - 2.0))
}

/// Largest amplitude `λ` of `λ * shape` for which `x0` still passes the
/// normalized branching test at the rate `2s/(1-γ)`. Small data give solutions
/// with a flatter, dead-core-like center; large data give `u'(x0) != 0`. At
/// the transition the solution vanishes at the sharp rate.
pub fn critical_amplitude(
    op: &FracLapOperator,
    shape: ExteriorShape,
    spec: &ReactionSpec,
    cfg: &SolverConfig,
    cal: &CalibrationConfig,
) -> Result<CriticalAmplitude> {
    if !(cal.lo > 0.0 && cal.hi > cal.lo && cal.rel_tol > 0.0) {
        return Err(Error::Calibration("need 0 < lo < hi and rel_tol > 0".into()));
    }
    let unit = ExteriorData::new(shape, 1.0)?.sample(op.grid.clone())?;
    let b1 = op.load(&unit)?;
    let beta = 2.0 * op.s / (1.0 - spec.gamma);
    let mut solves = 0;
    let mut run = |amp: f64| -> Result<(bool, SolveReport)> {
        solves += 1;
        let g = unit.scaled(amp);
        let b: Vec<f64> = b1.iter().map(|v| amp * v).collect();
        let rep = solve_with_load(op, &g, &b, spec, cfg, None)?.require_converged()?;
        Ok((passes_normalized_test(&rep.u, cal.x0, beta)?, rep))
    };
    let (ok_lo, mut best) = run(cal.lo)?;
    if !ok_lo {
        return Err(Error::Calibration(format!("test already fails at lo = {}", cal.lo)));
    }
    let (ok_hi, _) = run(cal.hi)?;
    if ok_hi {
        return Err(Error::Calibration(format!("test still passes at hi = {}", cal.hi)));
    }
    let (mut lo, mut hi) = (cal.lo, cal.hi);
    while hi / lo > 1.0 + cal.rel_tol {
        let mid = (lo * hi).sqrt();
        let (ok, rep) = run(mid)?;
        if ok {
            lo = mid;
            best = rep;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalAmplitude { amplitude: lo, bracket: (lo, hi), report: best, solves })
}

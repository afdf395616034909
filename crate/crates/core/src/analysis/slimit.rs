use std::sync::Arc;

use crate::analysis::calibrate::{critical_amplitude, CalibrationConfig};
use crate::analysis::fit::{default_window, fit_growth_exponent};
use crate::error::Result;
use crate::fraclap::{assemble, QuadratureConfig};
use crate::grid::Grid;
use crate::profiles::ExteriorData;
use crate::solver::{solve, solve_local, ReactionSpec, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SLimitOptions {
    /// Also fit the exponent at the origin, on data of the same shape scaled
    /// to the critical amplitude (odd shapes only).
    pub slopes: bool,
    pub calibration: CalibrationConfig,
    pub qc: QuadratureConfig,
}

impl Default for SLimitOptions {
    fn default() -> Self {
        SLimitOptions { slopes: true, calibration: CalibrationConfig::default(), qc: QuadratureConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SLimitRow {
    pub s: f64,
    /// `‖u_s - u_local‖_∞` over Ω.
    pub distance: f64,
    pub slope: Option<f64>,
    pub critical_amplitude: Option<f64>,
}

/// Distances between nonlocal solves and the local solve with boundary
/// values `g(±a)`, plus optional exponent fits.
pub fn s_limit_study(
    grid: Arc<Grid>,
    data: &ExteriorData,
    spec: &ReactionSpec,
    s_list: &[f64],
    cfg: &SolverConfig,
    opts: &SLimitOptions,
) -> Result<Vec<SLimitRow>> {
    let g = data.sample(grid.clone())?;
    let boundary = data.edge_values();
    let local = solve_local(grid.clone(), boundary, spec, cfg)?.require_converged()?;
    let (r_min, r_max, k) = default_window(grid.h(), grid.spec.a);
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let op = assemble(grid.clone(), s, opts.qc)?;
        let rep = solve(&op, &g, spec, cfg)?.require_converged()?;
        let distance = rep
            .u
            .interior_values()
            .iter()
            .zip(local.u.interior_values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let (slope, amp) = if opts.slopes && data.is_odd() && data.amplitude > 0.0 {
            let cal = critical_amplitude(&op, data.shape, spec, cfg, &opts.calibration)?;
            let fit = fit_growth_exponent(&cal.report.u, opts.calibration.x0, r_min, r_max, k, 0)?;
            (Some(fit.slope), Some(cal.amplitude))
        } else {
            (None, None)
        };
        rows.push(SLimitRow { s, distance, slope, critical_amplitude: amp });
    }
    Ok(rows)
}

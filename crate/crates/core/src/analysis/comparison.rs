use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fraclap::FracLapOperator;
use crate::grid::{Grid, GridFunction, TailModel};
use crate::solver::{solve, ReactionSpec, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome {
    pub holds: bool,
    /// `max(u2 - u1, 0)` over interior nodes.
    pub max_violation: f64,
    pub tolerance: f64,
}

/// Solves with `g1 >= g2` and checks `u1 >= u2 - 10 residual_tol` in Ω.
pub fn comparison_check(
    op: &FracLapOperator,
    spec: &ReactionSpec,
    g1: &GridFunction,
    g2: &GridFunction,
    cfg: &SolverConfig,
) -> Result<ComparisonOutcome> {
    if !g1.same_grid(g2) {
        return Err(Error::GridMismatch);
    }
    let grid = &g1.grid;
    if let Some(j) = grid.exterior().find(|&j| g1.values[j] < g2.values[j]) {
        return Err(Error::Unordered(format!("g1 < g2 at x = {}", grid.x(j))));
    }
    if !g1.tail.dominates(&g2.tail, grid.spec.r) {
        return Err(Error::Unordered(format!("tail {} is not above {}", g1.tail, g2.tail)));
    }
    let u1 = solve(op, g1, spec, cfg)?.require_converged()?;
    let u2 = solve(op, g2, spec, cfg)?.require_converged()?;
    let max_violation = u1
        .u
        .interior_values()
        .iter()
        .zip(u2.u.interior_values())
        .map(|(a, b)| (b - a).max(0.0))
        .fold(0.0, f64::max);
    let tolerance = 10.0 * cfg.residual_tol;
    Ok(ComparisonOutcome {
        holds: max_violation <= tolerance,
        max_violation,
        tolerance,
    })
}

/// Random smooth ordered data `g1 >= g2`:
/// `g1 = c0 + e^{-(y/ℓ)²} Σ a_k sin(ω_k y + φ_k)` and
/// `g2 = g1 - d0 - d1 (1 + cos(ω y + φ))/2`, with `ℓ = R/3` and constant tails.
pub fn random_ordered_pair(grid: &Arc<Grid>, rng: &mut impl Rng) -> Result<(GridFunction, GridFunction)> {
    let ell = grid.spec.r / 3.0;
    let c0: f64 = rng.random_range(-1.0..1.0);
    let modes: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-0.5..0.5),
                rng.random_range(0.5..4.0),
                rng.random_range(0.0..TAU),
            )
        })
        .collect();
    let d0: f64 = rng.random_range(0.0..0.2);
    let d1: f64 = rng.random_range(0.0..0.5);
    let (om, ph): (f64, f64) = (rng.random_range(0.5..4.0), rng.random_range(0.0..TAU));
    let g1 = |y: f64| {
        let osc: f64 = modes.iter().map(|&(a, w, p)| a * (w * y + p).sin()).sum();
        c0 + (-(y / ell).powi(2)).exp() * osc
    };
    let gap = |y: f64| d0 + d1 * 0.5 * (1.0 + (om * y + ph).cos());
    let mask = |i: usize, v: f64| if grid.is_interior(i) { 0.0 } else { v };
    let v1: Vec<f64> = (0..grid.len()).map(|i| mask(i, g1(grid.x(i)))).collect();
    let v2: Vec<f64> = (0..grid.len()).map(|i| mask(i, g1(grid.x(i)) - gap(grid.x(i)))).collect();
    let a = GridFunction::new(grid.clone(), v1, TailModel::constant(c0))?;
    let b = GridFunction::new(grid.clone(), v2, TailModel::constant(c0 - d0 - d1))?;
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub seed: u64,
    pub pairs: usize,
    pub failures: usize,
    pub max_violation: f64,
    pub outcomes: Vec<ComparisonOutcome>,
}

/// Runs `comparison_check` on `pairs` random ordered pairs from a ChaCha8
/// stream seeded with `seed`.
pub fn comparison_campaign(
    op: &FracLapOperator,
    spec: &ReactionSpec,
    cfg: &SolverConfig,
    pairs: usize,
    seed: u64,
) -> Result<CampaignSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (g1, g2) = random_ordered_pair(&op.grid, &mut rng)?;
        outcomes.push(comparison_check(op, spec, &g1, &g2, cfg)?);
    }
    Ok(CampaignSummary {
        seed,
        pairs,
        failures: outcomes.iter().filter(|o| !o.holds).count(),
        max_violation: outcomes.iter().map(|o| o.max_violation).fold(0.0, f64::max),
        outcomes,
    })
}

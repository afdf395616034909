use crate::analysis::deadcore::detect_dead_core;
use crate::error::{Error, Result};
use crate::grid::{discrete_derivative, GridFunction};
use crate::profiles::{ExponentTable, Nu};
use crate::solver::{ReactionMode, SolveReport};

/// Number of derivatives required to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuMode {
    One,
    Two,
}

impl std::fmt::Display for NuMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NuMode::One => "1",
            NuMode::Two => "2",
        })
    }
}

/// Thresholds on `(|u|, |Du|, |D²u|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl Tolerances {
    /// `factor * (h^β, h^{β-1}, h^{β-2})`.
    pub fn scaled(h: f64, beta: f64, factor: f64) -> Self {
        Tolerances {
            tau0: factor * h.powf(beta),
            tau1: factor * h.powf(beta - 1.0),
            tau2: factor * h.powf(beta - 2.0),
        }
    }

    /// Default thresholds: ten times the expected size at distance `h`.
    pub fn default_for(h: f64, beta: f64) -> Self {
        Self::scaled(h, beta, 10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingCandidate {
    pub index: usize,
    pub x0: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingReport {
    pub candidates: Vec<BranchingCandidate>,
    pub tolerances: Tolerances,
    pub mode: NuMode,
    /// Every interior node passed: `u` vanishes to tolerance on all of Ω.
    pub identically_zero: bool,
}

impl BranchingReport {
    /// One representative per run of adjacent candidates (the node with the
    /// smallest `|u|`, ties resolved toward the run center).
    pub fn points(&self) -> Vec<BranchingCandidate> {
        let mut out = Vec::new();
        let mut run: Vec<BranchingCandidate> = Vec::new();
        let flush = |run: &mut Vec<BranchingCandidate>, out: &mut Vec<BranchingCandidate>| {
            if run.is_empty() {
                return;
            }
            let mid = 0.5 * (run[0].x0 + run[run.len() - 1].x0);
            let best = run
                .iter()
                .min_by(|a, b| {
                    a.u.abs()
                        .total_cmp(&b.u.abs())
                        .then((a.x0 - mid).abs().total_cmp(&(b.x0 - mid).abs()))
                })
                .copied();
            out.extend(best);
            run.clear();
        };
        for c in &self.candidates {
            if let Some(last) = run.last() {
                if c.index != last.index + 1 {
                    flush(&mut run, &mut out);
                }
            }
            run.push(*c);
        }
        flush(&mut run, &mut out);
        out
    }

    /// Representative point nearest to `x`.
    pub fn nearest(&self, x: f64) -> Option<BranchingCandidate> {
        self.points()
            .into_iter()
            .min_by(|a, b| (a.x0 - x).abs().total_cmp(&(b.x0 - x).abs()))
    }
}

/// Interior nodes where `|u|`, `|Du|` (and for `ν = 2`, `|D²u|`) fall below
/// the thresholds.
pub fn detect_branching(u: &GridFunction, mode: NuMode, tol: Tolerances) -> Result<BranchingReport> {
    let du = discrete_derivative(u, 1)?;
    let d2u = discrete_derivative(u, 2)?;
    let range = u.grid.interior();
    let candidates: Vec<BranchingCandidate> = range
        .clone()
        .filter(|&i| {
            u.values[i].abs() <= tol.tau0
                && du.values[i].abs() <= tol.tau1
                && (mode == NuMode::One || d2u.values[i].abs() <= tol.tau2)
        })
        .map(|i| BranchingCandidate {
            index: i,
            x0: u.grid.x(i),
            u: u.values[i].abs(),
            du: du.values[i].abs(),
            d2u: d2u.values[i].abs(),
        })
        .collect();
    let identically_zero = candidates.len() == range.len();
    Ok(BranchingReport {
        candidates,
        tolerances: tol,
        mode,
        identically_zero,
    })
}

/// Warning when `mode` disagrees with the regime of `table`.
pub fn regime_warning(table: &ExponentTable, mode: NuMode) -> Option<String> {
    match (table.nu, mode) {
        (Nu::Indeterminate, _) => Some(format!(
            "nu is indeterminate for s = {}, gamma = {} (s between 1-gamma and 1-gamma/2)",
            table.s, table.gamma
        )),
        (Nu::One, NuMode::Two) | (Nu::Two, NuMode::One) => Some(format!(
            "mode nu = {mode} differs from the regime nu = {} at s = {}, gamma = {}",
            table.nu, table.s, table.gamma
        )),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryCheck {
    pub passed: bool,
    /// Endpoint of the dead core lying strictly inside Ω.
    pub x_star: f64,
    /// Nodes on both sides of the free boundary.
    pub nodes: Vec<BranchingCandidate>,
    pub tolerances: Tolerances,
}

/// Locates the dead-core endpoint inside Ω (nodes with `|u| <= tau_core`)
/// and tests `|u|, |Du|, |D²u|` at the two nodes around it against
/// `10 (h^β, h^{β-1}, h^{β-2})`, `β = 2/(1-γ)`.
pub fn free_boundary_branching_check(u: &GridFunction, gamma: f64, tau_core: f64) -> Result<FreeBoundaryCheck> {
    let grid = &u.grid;
    let core = detect_dead_core(u, tau_core);
    let range = grid.interior();
    let mut pair = None;
    for iv in &core.intervals {
        if iv.end + 1 < range.end {
            pair = Some((iv.end, iv.end + 1));
            break;
        }
        if iv.start > range.start {
            pair = Some((iv.start, iv.start - 1));
            break;
        }
    }
    let (edge, out) = pair.ok_or(Error::NoFreeBoundary)?;
    let beta = 2.0 / (1.0 - gamma);
    let tol = Tolerances::default_for(grid.h(), beta);
    let du = discrete_derivative(u, 1)?;
    let d2u = discrete_derivative(u, 2)?;
    let nodes: Vec<BranchingCandidate> = [edge, out]
        .iter()
        .map(|&i| BranchingCandidate {
            index: i,
            x0: grid.x(i),
            u: u.values[i].abs(),
            du: du.values[i].abs(),
            d2u: d2u.values[i].abs(),
        })
        .collect();
    let passed = nodes
        .iter()
        .all(|c| c.u <= tol.tau0 && c.du <= tol.tau1 && c.d2u <= tol.tau2);
    Ok(FreeBoundaryCheck {
        passed,
        x_star: grid.x(edge),
        nodes,
        tolerances: tol,
    })
}

/// Free-boundary branching test on a one-phase local solve. The dead core is
/// the set where `|u| <= 1e-3 h^β`.
pub fn one_phase_branching_check(report: &SolveReport) -> Result<FreeBoundaryCheck> {
    if report.spec.mode != ReactionMode::OnePhase {
        return Err(Error::Parse("one-phase solve report required".into()));
    }
    let gamma = report.spec.gamma;
    let beta = 2.0 / (1.0 - gamma);
    let tau = 1e-3 * report.u.grid.h().powf(beta);
    free_boundary_branching_check(&report.u, gamma, tau)
}

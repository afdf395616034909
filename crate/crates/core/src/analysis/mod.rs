//! Dead cores, branching points, growth-exponent fits, blow-ups, comparison
//! and Liouville probes, and the s -> 1 study.

mod blowup;
mod branching;
mod calibrate;
mod comparison;
mod deadcore;
mod fit;
mod liouville;
mod slimit;

pub use blowup::{blow_up, coincident_nodes};
pub use branching::{
    detect_branching, free_boundary_branching_check, one_phase_branching_check, regime_warning,
    BranchingCandidate, BranchingReport, FreeBoundaryCheck, NuMode, Tolerances,
};
pub use calibrate::{critical_amplitude, passes_normalized_test, CalibrationConfig, CriticalAmplitude};
pub use comparison::{
    comparison_campaign, comparison_check, random_ordered_pair, CampaignSummary, ComparisonOutcome,
};
pub use deadcore::{detect_dead_core, DeadCoreInterval, DeadCoreReport};
pub use fit::{default_window, fit_growth_exponent, fit_growth_exponent_with_radii, geometric_radii, ExponentFit};
pub use liouville::{liouville_probe, GrowthClass, LiouvilleReport};
pub use slimit::{s_limit_study, SLimitOptions, SLimitRow};

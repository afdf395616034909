//! Numerical laboratory for the two-phase nonlocal dead-core equation
//!
//! ```text
//! -(-Δ)^s u = u₊^γ - u₋^γ   in (-a, a),   u = g outside,
//! ```
//!
//! on uniform one-dimensional grids: operator assembly, a convex energy
//! solver, closed-form local profiles and the analysis tools used to measure
//! growth exponents at branching points.

pub mod analysis;
pub mod error;
pub mod fraclap;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod profiles;
mod quad;
pub mod solver;

pub use error::{Error, Result};
pub use fraclap::{assemble, normalization_constant, FracLapOperator, QuadratureConfig};
pub use grid::{make_grid, sample, Grid, GridFunction, GridSpec, TailModel};
pub use profiles::{exact_local_profile, exponent_table, ExponentTable, ExteriorData, ExteriorShape, LocalProfile, Nu};
pub use solver::{solve, solve_local, ReactionMode, ReactionSpec, SolveReport, SolverConfig};

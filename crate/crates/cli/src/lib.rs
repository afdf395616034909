//! Experiment runner: plain-text configs in, CSV tables and `key=value`
//! metadata sidecars out.

pub mod config;
pub mod run;
pub mod validate;

pub use config::{Amplitude, Boundary, Data, ExperimentConfig, Mode};
pub use run::{plan, run_config, RunOptions, RunSummary};
pub use validate::{validate_config, validate_params, Diagnostic, Level};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("solver did not converge (residual {residual:e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Core(deadcore::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        CliError::Config { line, message: message.into() }
    }

    /// Process exit code: 2 for invalid input, 3 for non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Validation(_) => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Core(deadcore::Error::OutOfRange { .. } | deadcore::Error::InvalidGrid(_)) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<deadcore::Error> for CliError {
    fn from(e: deadcore::Error) -> Self {
        match e {
            deadcore::Error::NotConverged { residual, iterations } => CliError::NotConverged { residual, iterations },
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

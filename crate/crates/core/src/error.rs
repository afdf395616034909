use thiserror::Error;

/// Errors raised by grid construction, assembly, solving and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported dimension {0} (only n = 1 is implemented)")]
    UnsupportedDimension(usize),
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("ball [{lo}, {hi}] exits the grid")]
    BallOutsideGrid { lo: f64, hi: f64 },
    #[error("radius {r} is smaller than the spacing {h}")]
    RadiusTooSmall { r: f64, h: f64 },
    #[error("derivative order {0} not supported")]
    BadOrder(usize),
    #[error("grid has {0} nodes, at least 5 are required")]
    TooFewNodes(usize),
    #[error("no node pairs inside the ball")]
    EmptyPairs,
    #[error("parameter {name} = {value} out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid tail model: {0}")]
    InvalidTail(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("solver did not converge (residual {residual:e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },
    #[error("flat function: sup over the ball of radius {0} is zero")]
    FlatFunction(f64),
    #[error("invalid fit window: {0}")]
    BadWindow(String),
    #[error("no free boundary found")]
    NoFreeBoundary,
    #[error("exterior data are not ordered: {0}")]
    Unordered(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::solver::SolveResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} while sampling node {index}")]
    Sampling { index: usize, value: f64 },

    #[error("point {0:?} outside the grid box")]
    OutOfDomain(Vec<f64>),

    #[error("radius {radius} outside admissible window [{min}, {max}]")]
    InvalidRadius { radius: f64, min: f64, max: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("invalid profile spec: {0}")]
    InvalidSpec(String),

    #[error("no free boundary: {0}")]
    NoFreeBoundary(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver stopped after {} sweeps with max update {:.3e}", .0.sweeps, .0.max_update)]
    NotConverged(Box<SolveResult>),

    #[error("field format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

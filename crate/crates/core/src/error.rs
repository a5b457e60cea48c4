use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polynomial of odd degree {0} cannot be a sum of squares")]
    OddDegree(u32),

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("degenerate direction: support value {0:e} is too close to zero")]
    DegenerateDirection(f64),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("direction is not covered by any cone of the partition (max violation {0:e})")]
    NotCovered(f64),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

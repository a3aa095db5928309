use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoposError {
    #[error("resource cap exceeded: {what} ({size} > {limit})")]
    ResourceCap {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: u32, got: u32 },
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("solver returned no usable answer: {0}")]
    SolverUnknown(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoposError>;

use thiserror::Error;

/// Errors raised by grid construction, body operations, valuations and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radial functions live on different grids")]
    GridMismatch,
    #[error("membership oracle still true at rmax along node {node}: body is unbounded for this rmax")]
    UnboundedBody { node: usize },
    #[error("membership oracle rejects the origin: not a star set")]
    NotStarSet,
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("matrix is not orthogonal (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("exhaustive search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("set is empty")]
    EmptySet,
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

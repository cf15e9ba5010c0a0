use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or state violates one of its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("capacity {capacity} exceeds total population {population}")]
    CapacityInfeasible { capacity: u64, population: u64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The parity bound's log argument is non-positive (N too small for the requested eta/omega).
    #[error("bound invalid: {0}")]
    BoundInvalid(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

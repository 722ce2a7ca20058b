use thiserror::Error;

/// Errors raised by the optimizer, its problems and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid operator configuration: {0}")]
    InvalidOperator(String),
    #[error("crossover needs at least two individuals, population has {0}")]
    CrossoverUnavailable(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle unsupported: {0}")]
    OracleUnsupported(String),
    #[error("undefined quantity: {0}")]
    Undefined(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("trace error: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

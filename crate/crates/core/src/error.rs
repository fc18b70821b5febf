use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the climate-index pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    MalformedRow { path: PathBuf, row: usize, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no records in {0}")]
    NoRecords(String),

    #[error("state {0:?} is not present in the region mapping")]
    UnmappedState(String),

    #[error("duplicate key {0}")]
    DuplicateKey(String),

    #[error("missing value: {0}")]
    Missing(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no feasible family among candidates")]
    NoFeasibleFamily,

    #[error("infeasible family {family}: {reason}")]
    InfeasibleFamily { family: String, reason: String },

    #[error("infeasible cross-validation plan: {0}")]
    InfeasiblePlan(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

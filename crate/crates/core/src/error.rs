use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid dialect tag {0:?}")]
    InvalidTag(String),

    #[error("invalid condition {0:?}")]
    InvalidCondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Metric(String),

    #[error("request {request_id}: {message}")]
    RequestFailed { request_id: String, message: String },

    #[error("metric failed on example {example_id}: {message}")]
    MetricOnExample { example_id: String, message: String },

    #[error("subprocess: {0}")]
    Subprocess(String),

    #[error("unbalanced design; offending examples: {}", .0.join(", "))]
    Unbalanced(Vec<String>),

    #[error("{0}")]
    Stats(String),

    #[error("missing field: {field} (mode {mode})")]
    MissingField { mode: String, field: String },

    #[error("no surviving sentences; drops: {0}")]
    NoSurvivors(String),

    #[error("{0}")]
    Sampling(String),

    #[error("duplicate score for ({metric}, {example_id}, {condition})")]
    DuplicateScore {
        metric: String,
        example_id: String,
        condition: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wraps an I/O failure with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants split into two families that the command line maps onto exit
/// codes: configuration problems (bad flags, missing files, invalid
/// thresholds) and data problems (malformed or inconsistent input content).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown language code `{0}`")]
    UnknownLanguage(String),

    #[error("invalid direction `{0}`")]
    InvalidDirection(String),

    #[error("tokenization failed at byte offset {offset}: no piece matches and byte fallback is disabled")]
    Tokenization { offset: usize },

    #[error("English sentence {index} tokenizes to zero tokens; length ratio is undefined")]
    ZeroLength { index: usize },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("candidate {candidate} has no score for metric `{metric}`")]
    MissingScore { candidate: usize, metric: String },

    #[error("conflicting values for {key}: {first} vs {second}")]
    ScoreConflict {
        key: String,
        first: f64,
        second: f64,
    },

    #[error("embedding provider failed: {0}")]
    Provider(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the invocation rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

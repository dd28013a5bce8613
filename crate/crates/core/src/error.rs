//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed access-log record. Carries the 1-based line number so
    /// callers can skip-and-count or abort with context.
    #[error("line {line}: {message}")]
    LogParse { line: usize, message: String },

    /// The usage data carries no visits at all, so frequency scores (and
    /// everything downstream) are undefined.
    #[error("empty usage data")]
    EmptyUsageData,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),

    #[error("model format version {found} not supported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn log_parse(line: usize, message: impl Into<String>) -> Self {
        Error::LogParse {
            line,
            message: message.into(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("algebra mismatch: {0}")]
    Mismatch(String),
    #[error("search truncated: {0}")]
    Truncated(String),
    #[error("iteration cap reached: {0}")]
    Unbounded(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure means "not enough budget" rather than bad input.
    pub fn is_truncation(&self) -> bool {
        matches!(self, Error::Truncated(_) | Error::Unbounded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

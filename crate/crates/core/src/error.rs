use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the mining pipeline or the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: cannot parse token {token:?} as an item identifier")]
    Parse {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value {value} is outside the domain of size {size}")]
    OutOfDomain { value: usize, size: usize },

    #[error("transaction {index} is not in descending item-rank order")]
    Unordered { index: usize },

    #[error("user {user} was asked to report twice")]
    DoubleReport { user: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

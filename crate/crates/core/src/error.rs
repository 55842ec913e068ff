use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the estimation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("duplicate date {date} in {path}")]
    DuplicateDate { path: PathBuf, date: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
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

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::DegenerateSample(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

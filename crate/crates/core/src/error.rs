use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no token occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },

    #[error("training diverged at epoch {epoch}: cost is {cost}")]
    Diverged { epoch: usize, cost: f64 },

    #[error("correlation undefined: {0}")]
    Correlation(String),

    #[error(
        "vocabulary size {size} needs about {needed_mib} MiB, only {available_mib} MiB available"
    )]
    OutOfMemory {
        size: usize,
        needed_mib: u64,
        available_mib: u64,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by fitting, evaluation and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dataset has a single treatment arm (a = {0} for every row)")]
    SingleArm(u8),

    #[error("no events of this kind ({0})")]
    NoEvents(&'static str),

    #[error("cross-fitting needs 2 <= K <= n/10, got K = {k} with n = {n}")]
    FoldCount { k: usize, n: usize },

    #[error("all sample weights are zero")]
    ZeroWeights,

    #[error("sum of weighting values is zero")]
    ZeroWeightSum,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero baseline PEHE at horizon {0}")]
    ZeroBaseline(usize),

    #[error("degenerate regression: {0}")]
    Degenerate(&'static str),

    #[error("{path}: row {row}: {reason}")]
    Csv {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    PayloadSizeMismatch { expected: u64, actual: u64 },

    #[error("non-positive spacing: {0:?}")]
    NonPositiveSpacing([f64; 3]),

    #[error("invalid volume dims {0:?}: every axis must be at least 8")]
    DimsTooSmall([u64; 3]),

    #[error("degenerate box after clipping to volume")]
    DegenerateBox,

    #[error("cannot act on a terminated episode")]
    EpisodeTerminated,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("input shape {0:?} too small for the pooling stack of architecture 2")]
    InputTooSmall([usize; 3]),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("scan {0} has no annotation")]
    MissingAnnotation(String),

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("dataset has {scans} usable scans but {folds} folds were requested")]
    TooFewScans { scans: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Parse { path: path.into(), source }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}

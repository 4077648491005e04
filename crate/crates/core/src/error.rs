use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires a non-empty dataset")]
    EmptyDataset,

    #[error("non-finite coordinate at point {point}, coordinate {coord}")]
    NonFinite { point: usize, coord: usize },

    #[error("coordinate {coord} of point {point} is not an integer ({value})")]
    NonIntegral {
        point: usize,
        coord: usize,
        value: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("labels have {found} entries but the dataset has {expected} points")]
    LabelCount { expected: usize, found: usize },

    #[error("selection policy {0} requires class labels")]
    MissingLabels(&'static str),

    #[error("selection policy {0} is not applicable here")]
    UnsupportedPolicy(&'static str),

    #[error("(1+eps)^(r-1) overflows f64 for eps={epsilon}, r={r}; use log space")]
    Overflow { epsilon: f64, r: usize },

    #[error("nearest distance is exactly zero; the distance ratio is undefined")]
    DegenerateDistance,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

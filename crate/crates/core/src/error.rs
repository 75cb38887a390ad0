use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base {0}: bases must be at least 2")]
    InvalidBase(u64),

    #[error("bases {0} and {1} are not coprime")]
    NonCoprimeBases(u64, u64),

    #[error("direction numbers, line {line}: {message}")]
    DirectionNumbers { line: usize, message: String },

    #[error("no direction-number record for dimension {0}")]
    MissingDimension(usize),

    #[error("index {index} out of range for a generator of precision {precision} bits")]
    IndexOutOfRange { index: u128, precision: u32 },

    #[error("precision {requested} exceeds the supported maximum of {max} bits")]
    Precision { requested: u32, max: u32 },

    #[error("expected {expected} points, got {actual}")]
    WrongPointCount { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid integrand: {0}")]
    InvalidIntegrand(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty point set")]
    EmptyPoints,

    #[error("Gram matrix is not numerically positive definite (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("negative worst-case error radicand {0:e}; the kernel sum is inconsistent")]
    NegativeRadicand(f64),

    #[error("a fooling-function cell contains point {point}")]
    OccupiedCell { point: usize },

    #[error("certificate step {step} violated: {detail}")]
    CertificateViolation { step: &'static str, detail: String },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

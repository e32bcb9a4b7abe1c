use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("corrupt or truncated WAV file: {0}")]
    CorruptWav(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input too short: {0}")]
    TooShort(String),

    #[error("all frames unvoiced")]
    AllUnvoiced,

    #[error(
        "unvoiced gap of {frames} frames at frame {at} exceeds the bridgeable limit of {limit}"
    )]
    UnvoicedGap {
        at: usize,
        frames: usize,
        limit: usize,
    },

    #[error("too few cycles: found {found}, need at least {required}")]
    TooFewCycles { found: usize, required: usize },

    #[error("need at least {required} values, got {got}")]
    NotEnoughValues { required: usize, got: usize },

    #[error("non-positive value {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("class {0} has too few samples: {1}")]
    ClassTooSmall(&'static str, String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("CSV parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

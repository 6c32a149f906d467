use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid function sample: {0}")]
    InvalidSample(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not orthonormal: |<w_{q},w_{r}> - delta| = {deviation:e}")]
    NotOrthonormal { q: usize, r: usize, deviation: f64 },

    #[error("grid too coarse: axis {axis} has {points} points, need at least {required}")]
    Resolution {
        axis: usize,
        points: usize,
        required: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

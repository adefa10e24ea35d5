use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sampling rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("downscaling not supported")]
    DownscalingNotSupported,
    #[error("bad magic")]
    BadMagic,
    #[error("truncated file")]
    Truncated,
    #[error("dimension overflow")]
    DimensionOverflow,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("unsupported channel count {0}")]
    UnsupportedChannels(u32),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no segments produced")]
    NoSegments,

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] ::image::ImageError),
}

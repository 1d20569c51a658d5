use std::path::PathBuf;

/// Errors produced by the image pipeline, the codec and the detectors.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image file: {0}")]
    Format(String),

    #[error("unsupported image layout: {0}")]
    Unsupported(String),

    /// Both dimensions must be at least one full block.
    #[error("image is {width}x{height}, smaller than one 8x8 block")]
    TooSmall { width: usize, height: usize },

    #[error("sample buffer holds {actual} values, expected {expected}")]
    SampleCount { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quality {0} is outside 1..=100")]
    Quality(u32),

    #[error("invalid quantization step {0}")]
    InvalidStep(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no observations supplied")]
    EmptyInput,

    #[error("missing Laplacian fit for subband {0}")]
    MissingFit(crate::Subband),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

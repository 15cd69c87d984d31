use std::path::PathBuf;

/// Errors produced by the drift pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid LUT: {0}")]
    InvalidLut(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("homography estimation failed: {0}")]
    EstimationFailed(String),
    #[error("unknown category {value:?} for {field}")]
    UnknownCategory { field: String, value: String },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("malformed {kind} data: {message}")]
    Format { kind: &'static str, message: String },
    #[error("tile {index} failed: {source}")]
    TileFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: message.into(),
        }
    }
}

use std::path::PathBuf;

/// Errors produced anywhere in the essay planning pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("word not in vocabulary: {0}")]
    OutOfVocabulary(String),
    #[error("no in-vocabulary words among: {}", .0.join(", "))]
    AllOutOfVocabulary(Vec<String>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sentence {doc_id}#{index} cannot be scored: {reason}")]
    Unscoreable {
        doc_id: String,
        index: usize,
        reason: String,
    },
    #[error("non-finite loss at epoch {epoch}, sample {sample}: {loss}")]
    NonFiniteLoss { epoch: usize, sample: usize, loss: f64 },
    #[error("{backend} expansion failed: {source}")]
    Expansion {
        backend: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

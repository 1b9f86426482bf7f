use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty downsample: {len} samples with reduction factor {reduction}")]
    EmptyDownsample { len: usize, reduction: usize },

    #[error("series of length {len} too short for dimension {dim} and delay {delay}")]
    SeriesTooShort {
        len: usize,
        dim: usize,
        delay: usize,
    },

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("oracle supports at most {max} points, got {got}")]
    OracleTooLarge { max: usize, got: usize },

    #[error("model format: {0}")]
    Model(String),

    #[error("sample {sample}: {source}")]
    Sample {
        sample: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the error stems from a broken internal invariant rather
    /// than bad input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Invariant(_) => true,
            Error::Sample { source, .. } | Error::Stage { source, .. } => source.is_internal(),
            _ => false,
        }
    }
}

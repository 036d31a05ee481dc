use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Per-query IK failures are not errors; they are
/// reported through [`crate::IkStatus`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation axis is not unit length (norm = {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("joint vector has {got} entries, model expects {expected}")]
    DofMismatch { expected: usize, got: usize },

    #[error("invalid robot model: {0}")]
    InvalidModel(String),

    #[error("pose rotation is not orthonormal (deviation {deviation:e} exceeds {limit:e})")]
    InvalidPose { deviation: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("objective returned a non-finite value at x = {x:?}")]
    NonFiniteObjective { x: Vec<f64> },

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

    #[error(transparent)]
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

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

use crate::mode::ModeLabel;

/// Errors produced anywhere in the recognition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("channel {channel}: {reason}")]
    Channel { channel: String, reason: String },

    #[error("feature vector: {0}")]
    Feature(String),

    #[error("training data is missing mode {0}")]
    MissingMode(ModeLabel),

    #[error("SMO did not converge after {iterations} iterations (KKT residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate second layer: c * sum(P_k) is zero")]
    DegenerateSecondLayer,

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: msg.into(),
        }
    }

    /// True for errors caused by malformed files rather than by the computation.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. } | Error::Json(_) | Error::Csv(_) | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

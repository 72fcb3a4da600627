use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a mathematical precondition (non-positive modulus, empty game, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input file or document.
    #[error("format error: {0}")]
    Format(String),

    /// A specific line of a tabular input could not be accepted.
    #[error("{path}: line {line}: {message}")]
    Line {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A QoI evaluation failed at a named sweep configuration.
    #[error("evaluation failed at (e={0}, rho={1}, h={2}): {3}", point[0], point[1], point[2], message)]
    Evaluation { point: [f64; 3], message: String },

    /// Training diverged; the loss history up to the failure is attached.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss {
        epoch: usize,
        history: crate::regress::mlp::LossHistory,
    },

    /// Bad or missing configuration value.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: msg.into(),
        }
    }
}

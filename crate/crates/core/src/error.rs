use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SliceError {
    /// A configuration value violates an invariant. `path` names the offending field.
    #[error("invalid configuration at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("numeric domain error: {0}")]
    Domain(String),

    #[error("no feasible action: {0}")]
    NoFeasibleAction(String),

    #[error("probability snapshots were not recorded for this run")]
    SnapshotsUnavailable,

    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SliceError {
    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        SliceError::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SliceError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SliceError> = std::result::Result<T, E>;

//! Error type of the command-line driver and its mapping to exit codes.

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while configuring, running or persisting an analysis.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to encode {what}: {reason}")]
    Encode { what: String, reason: String },

    #[error(transparent)]
    Physics(#[from] cslqp_core::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for solver
    /// non-convergence, 4 for a failed root bracket, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Physics(cslqp_core::Error::NonConvergence { .. }) => 3,
            CliError::Physics(cslqp_core::Error::StepUnderflow { .. }) => 3,
            CliError::Physics(cslqp_core::Error::Bracketing { .. }) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

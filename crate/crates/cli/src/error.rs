//! Error type and exit-code conventions for the command-line tool.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Exit code for hard errors (bad input, I/O failure, compute failure).
pub const EXIT_ERROR: i32 = 1;
/// Exit code for partial success: the edit ran, but some targets were
/// skipped as infeasible and are reported in the diagnostics.
pub const EXIT_PARTIAL: i32 = 2;
/// Exit code for a verification run that completed but found at least one
/// failing certificate.
pub const EXIT_VERIFY_FAILED: i32 = 3;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Everything that can go wrong before or around the numerical work.
///
/// Hard errors are printed to standard error as a machine-readable JSON
/// object (see [`CliError::to_json`]) and terminate the process with
/// [`EXIT_ERROR`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {detail}")]
    MatrixFormat { path: PathBuf, detail: String },

    #[error("manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Compute(#[from] nulledit_core::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Wraps an I/O error with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable, machine-matchable discriminator for the JSON error object.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::MatrixFormat { .. } => "matrix_format",
            CliError::Manifest { .. } => "manifest",
            CliError::Invalid(_) => "invalid_request",
            CliError::Compute(_) => "compute",
            CliError::Json(_) => "serialization",
        }
    }

    /// The JSON object printed to standard error on exit 1.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "detail": self.to_string(),
            }
        })
        .to_string()
    }
}

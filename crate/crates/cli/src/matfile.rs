//! Extension-dispatched matrix file access: `.npy` (the native format) or
//! `.csv` (the fallback input format).

use std::path::Path;

use nulledit_core::linalg::Matrix;

use crate::error::{CliError, Result};
use crate::{csvmat, npy};

fn extension(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .ok_or_else(|| CliError::MatrixFormat {
            path: path.to_path_buf(),
            detail: "no file extension; matrix files must end in .npy or .csv".into(),
        })
}

/// Reads a matrix, choosing the format from the file extension.
pub fn read(path: &Path) -> Result<Matrix> {
    match extension(path)?.as_str() {
        "npy" => npy::read(path),
        "csv" => csvmat::read(path),
        other => Err(CliError::MatrixFormat {
            path: path.to_path_buf(),
            detail: format!("unsupported extension {other:?}; expected .npy or .csv"),
        }),
    }
}

/// Writes a matrix, choosing the format from the file extension.
pub fn write(path: &Path, matrix: &Matrix) -> Result<()> {
    match extension(path)?.as_str() {
        "npy" => npy::write(path, matrix),
        "csv" => csvmat::write(path, matrix),
        other => Err(CliError::MatrixFormat {
            path: path.to_path_buf(),
            detail: format!("unsupported extension {other:?}; expected .npy or .csv"),
        }),
    }
}

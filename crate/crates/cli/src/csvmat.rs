//! CSV fallback format for matrices.
//!
//! The first line is a header stating the dimensions, `rows,cols` (for
//! example `3,4`); each following line holds one row of comma-separated
//! values. Values are written with 17 significant digits, so this format
//! also round-trips 64-bit floats exactly — it exists for hand-written
//! inputs and spreadsheet interop, not for compactness.

use std::path::Path;

use nulledit_core::linalg::Matrix;

use crate::artifact;
use crate::error::{CliError, Result};
use crate::jsonfmt::sig17;

/// Renders `matrix` in the CSV matrix format.
pub fn to_text(matrix: &Matrix) -> String {
    let cols = matrix.cols();
    let mut out = String::new();
    out.push_str(&format!("{},{cols}\n", matrix.rows()));
    let data = matrix.row_major_data();
    for i in 0..matrix.rows() {
        let row = &data[i * cols..(i + 1) * cols];
        let line: Vec<String> = row.iter().map(|&v| sig17(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses the CSV matrix format. The error is a bare description;
/// [`read`] attaches the file path.
pub fn from_text(text: &str) -> Result<Matrix, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file; expected a rows,cols header")?;
    let mut dims = header.split(',').map(str::trim);
    let parse_dim = |token: Option<&str>| -> Result<usize, String> {
        token
            .filter(|s| !s.is_empty())
            .ok_or_else(|| format!("header {header:?} must be rows,cols"))?
            .parse::<usize>()
            .map_err(|_| format!("header {header:?} must hold two non-negative integers"))
    };
    let rows = parse_dim(dims.next())?;
    let cols = parse_dim(dims.next())?;
    if dims.next().is_some() {
        return Err(format!("header {header:?} has more than two fields"));
    }

    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {rows} data rows, found {i}"))?;
        let fields: Vec<&str> = if line.trim().is_empty() {
            Vec::new()
        } else {
            line.split(',').collect()
        };
        if fields.len() != cols {
            return Err(format!(
                "row {i} has {} fields but the header promises {cols}",
                fields.len()
            ));
        }
        for field in fields {
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| format!("row {i}: {field:?} is not a number"))?;
            values.push(value);
        }
    }
    for (extra, line) in lines.enumerate() {
        if !line.trim().is_empty() {
            return Err(format!(
                "unexpected content after row {}: {line:?}",
                rows + extra
            ));
        }
    }
    Matrix::from_row_major(rows, cols, values).map_err(|e| e.to_string())
}

/// Writes `matrix` to `path` atomically.
pub fn write(path: &Path, matrix: &Matrix) -> Result<()> {
    artifact::write_atomic(path, to_text(matrix).as_bytes())
}

/// Reads the matrix stored at `path`.
pub fn read(path: &Path) -> Result<Matrix> {
    from_text(&artifact::read_text(path)?).map_err(|detail| CliError::MatrixFormat {
        path: path.to_path_buf(),
        detail,
    })
}

//! Reader and writer for NPY files, format version 1.0.
//!
//! Scope is deliberately narrow: two-dimensional arrays of little-endian
//! 64-bit floats (`'<f8'`), the one layout every matrix artifact in this
//! toolkit uses. The format stores raw IEEE-754 bytes, so matrices survive
//! a write/read round trip bit for bit — which is what lets a verification
//! run recompute residuals on exactly the numbers the edit produced.
//!
//! Writing always emits C (row-major) order and a 2-D shape. Reading is
//! slightly more liberal, accepting Fortran order and 1-D shapes (as
//! single columns) so arrays saved by other tooling load without fuss.

use std::path::Path;

use nulledit_core::linalg::Matrix;

use crate::artifact;
use crate::error::{CliError, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Encodes `matrix` as the bytes of a version-1.0 NPY file.
pub fn to_bytes(matrix: &Matrix) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}",
        matrix.rows(),
        matrix.cols()
    );
    // Pad the header with spaces, newline-terminated, so the data section
    // starts on a 64-byte boundary (as the format prescribes).
    let prefix_len = MAGIC.len() + 2 + 2;
    let unpadded = prefix_len + dict.len() + 1;
    let padding = (64 - unpadded % 64) % 64;
    let header_len = dict.len() + padding + 1;
    assert!(u16::try_from(header_len).is_ok(), "header cannot exceed 64 KiB");

    let mut bytes =
        Vec::with_capacity(prefix_len + header_len + 8 * matrix.rows() * matrix.cols());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&[1, 0]); // format version 1.0
    bytes.extend_from_slice(&(header_len as u16).to_le_bytes());
    bytes.extend_from_slice(dict.as_bytes());
    bytes.resize(bytes.len() + padding, b' ');
    bytes.push(b'\n');
    for value in matrix.row_major_data() {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    bytes
}

/// Decodes a version-1.0 NPY byte stream. The error is a bare description;
/// [`read`] attaches the file path.
pub fn from_bytes(bytes: &[u8]) -> Result<Matrix, String> {
    if bytes.len() < 10 {
        return Err("file too short to hold an NPY header".into());
    }
    if &bytes[..6] != MAGIC {
        return Err("missing NPY magic string".into());
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(format!(
            "NPY format version {major}.{minor} is not supported; artifacts use version 1.0"
        ));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = 10 + header_len;
    if bytes.len() < data_start {
        return Err("header length field exceeds the file size".into());
    }
    let header = std::str::from_utf8(&bytes[10..data_start])
        .map_err(|_| "header is not valid UTF-8".to_string())?;

    let descr = field(header, "descr").ok_or("header lacks a 'descr' entry")?;
    if descr != "<f8" {
        return Err(format!(
            "dtype {descr:?} is not supported; matrices are little-endian 64-bit floats ('<f8')"
        ));
    }
    let fortran = match field(header, "fortran_order").ok_or("header lacks 'fortran_order'")? {
        "False" => false,
        "True" => true,
        other => return Err(format!("fortran_order must be True or False, got {other:?}")),
    };
    let dims = parse_shape(field(header, "shape").ok_or("header lacks a 'shape' entry")?)?;
    let (rows, cols) = match dims.as_slice() {
        [n] => (*n, 1),
        [r, c] => (*r, *c),
        other => {
            return Err(format!(
                "expected a 1- or 2-dimensional array, got {} dimensions",
                other.len()
            ))
        }
    };

    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or("shape overflows the address space")?;
    let data = &bytes[data_start..];
    if data.len() != expected {
        return Err(format!(
            "data section holds {} bytes but shape ({rows}, {cols}) needs {expected}",
            data.len()
        ));
    }

    let at = |index: usize| f64::from_le_bytes(data[8 * index..8 * index + 8].try_into().unwrap());
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let index = if fortran { j * rows + i } else { i * cols + j };
            values.push(at(index));
        }
    }
    Matrix::from_row_major(rows, cols, values).map_err(|e| e.to_string())
}

/// Extracts the value of `key` from the header's Python dict literal:
/// a quoted string, a parenthesized tuple, or a bare token.
fn field<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let start = ['\'', '"'].iter().find_map(|q| {
        let needle = format!("{q}{key}{q}");
        header.find(&needle).map(|i| i + needle.len())
    })?;
    let rest = header[start..].trim_start().strip_prefix(':')?.trim_start();
    if let Some(quoted) = rest.strip_prefix('\'').or_else(|| rest.strip_prefix('"')) {
        let end = quoted.find(['\'', '"'])?;
        Some(&quoted[..end])
    } else if rest.starts_with('(') {
        let end = rest.find(')')?;
        Some(&rest[..=end])
    } else {
        let end = rest.find([',', '}']).unwrap_or(rest.len());
        Some(rest[..end].trim_end())
    }
}

fn parse_shape(token: &str) -> Result<Vec<usize>, String> {
    let inner = token
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("shape {token:?} is not a tuple"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| format!("shape entry {s:?} is not a non-negative integer"))
        })
        .collect()
}

/// Writes `matrix` to `path` atomically.
pub fn write(path: &Path, matrix: &Matrix) -> Result<()> {
    artifact::write_atomic(path, &to_bytes(matrix))
}

/// Reads the matrix stored at `path`.
pub fn read(path: &Path) -> Result<Matrix> {
    from_bytes(&artifact::read_bytes(path)?).map_err(|detail| CliError::MatrixFormat {
        path: path.to_path_buf(),
        detail,
    })
}

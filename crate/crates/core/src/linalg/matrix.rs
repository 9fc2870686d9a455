//! Dense real matrix with a validated-finite invariant.
//!
//! Every public constructor rejects NaN and infinite entries, so downstream
//! decompositions never have to re-check. Entries are stored in an
//! [`nalgebra`] column-major buffer internally, but the public API speaks
//! row-major (the order weights are written to disk and printed).
//!
//! Matrices are immutable once constructed: all arithmetic returns new
//! values. Zero-dimensional shapes (`n x 0`, `0 x m`) are legal and behave as
//! empty factors — an empty preserved set, or the factor list of a rank-zero
//! decomposition.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense `rows x cols` matrix of finite `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    /// Builds a matrix from a row-major entry buffer.
    ///
    /// Fails if the buffer length is not `rows * cols` or any entry is
    /// non-finite.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows * cols;
        if data.len() != expected {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected,
                got: data.len(),
            });
        }
        for (idx, &value) in data.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx.checked_div(cols).unwrap_or(0),
                    col: idx.checked_rem(cols).unwrap_or(0),
                    value,
                });
            }
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    /// Builds a matrix entry-by-entry from a closure; validates the results.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let inner = DMatrix::from_fn(rows, cols, &mut f);
        Self::from_dmatrix_checked(inner)
    }

    /// All-zero matrix. Zero dimensions are allowed.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    /// Square identity matrix.
    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Builds a single-column matrix from a vector of entries.
    pub fn column_vector(data: Vec<f64>) -> Result<Self> {
        let rows = data.len();
        Self::from_row_major(rows, 1, data)
    }

    /// Internal constructor for results of arithmetic on already-validated
    /// inputs. Debug builds re-check the finite invariant (overflow is the
    /// only way arithmetic on finite inputs can break it).
    pub(crate) fn from_dmatrix(inner: DMatrix<f64>) -> Self {
        debug_assert!(
            inner.iter().all(|v| v.is_finite()),
            "internal arithmetic produced a non-finite entry"
        );
        Self { inner }
    }

    /// Internal constructor that surfaces a non-finite entry as an error
    /// instead of panicking; used where inputs are not yet trusted.
    pub(crate) fn from_dmatrix_checked(inner: DMatrix<f64>) -> Result<Self> {
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let value = inner[(i, j)];
                if !value.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j, value });
                }
            }
        }
        Ok(Self { inner })
    }

    pub(crate) fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    /// True when either dimension is zero (the matrix holds no entries).
    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    /// Entry accessor. Panics when the index is out of bounds.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Entries in row-major order (the order used for on-disk formats).
    pub fn row_major_data(&self) -> Vec<f64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Copy of column `j` as a plain vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.inner.column(j).iter().copied().collect()
    }

    /// New matrix keeping only the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let inner = self.inner.select_columns(indices.iter());
        Self { inner }
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Horizontal concatenation `[a | b | ...]`. All blocks must share the
    /// row count; the result may have zero columns if all blocks do.
    pub fn hstack(blocks: &[&Matrix]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "hstack of zero blocks has no defined row count".into(),
            });
        }
        let rows = blocks[0].rows();
        for (i, b) in blocks.iter().enumerate() {
            if b.rows() != rows {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "hstack block {i} has {} rows, expected {rows}",
                        b.rows()
                    ),
                });
            }
        }
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut inner = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            inner
                .columns_mut(offset, b.cols())
                .copy_from(&b.inner.columns(0, b.cols()));
            offset += b.cols();
        }
        Ok(Self { inner })
    }

    /// Frobenius norm (Euclidean norm of all entries).
    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Euclidean norm of column `j`.
    pub fn column_norm(&self, j: usize) -> f64 {
        self.inner.column(j).norm()
    }

    /// Largest absolute entry; 0 for empty matrices.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Scalar multiple. The scalar must be finite.
    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() {
            return Err(Error::NonFiniteEntry {
                row: 0,
                col: 0,
                value: factor,
            });
        }
        Ok(Self::from_dmatrix(&self.inner * factor))
    }
}

impl std::ops::Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows(), self.cols()),
            (rhs.rows(), rhs.cols()),
            "matrix addition requires equal shapes"
        );
        Matrix::from_dmatrix(&self.inner + &rhs.inner)
    }
}

impl std::ops::Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows(), self.cols()),
            (rhs.rows(), rhs.cols()),
            "matrix subtraction requires equal shapes"
        );
        Matrix::from_dmatrix(&self.inner - &rhs.inner)
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols(),
            rhs.rows(),
            "matrix product requires inner dimensions to agree"
        );
        Matrix::from_dmatrix(&self.inner * &rhs.inner)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Matrix", 3)?;
        s.serialize_field("rows", &self.rows())?;
        s.serialize_field("cols", &self.cols())?;
        s.serialize_field("data", &self.row_major_data())?;
        s.end()
    }
}

#[derive(Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        Matrix::from_row_major(repr.rows, repr.cols, repr.data).map_err(D::Error::custom)
    }
}

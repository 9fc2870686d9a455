//! Orthonormal bases for nullspaces, spectral complements, and projections.
//!
//! The editing methods in this crate need two related constructions:
//!
//! * the left nullspace of a column set (directions no preserved vector
//!   touches), and
//! * its generalization, the complement of the top-`k` left singular
//!   directions, which deliberately sacrifices the weakest spectral tail of
//!   the preserved set in exchange for more room to edit.
//!
//! Both are produced by completing the thin-SVD `U` factor to a full
//! orthonormal basis with Householder reflectors — a deterministic, exactly
//! orthogonal construction — and discarding the leading block. Individual
//! basis vectors are only unique up to rotation, so all guarantees are
//! phrased through projectors, which are rotation-invariant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::matrix::Matrix;
use crate::linalg::svd::{thin_svd, RankTolerance, ThinSvd};

/// Orthonormal basis of a subspace of `R^ambient_dim`.
///
/// Invariant: `basis` is `ambient_dim x dim` with orthonormal columns
/// (`dim = 0` is legal and denotes the trivial subspace).
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    basis: Matrix,
    ambient_dim: usize,
}

impl SubspaceBasis {
    fn new(basis: Matrix) -> Self {
        let ambient_dim = basis.rows();
        Self { basis, ambient_dim }
    }

    /// The orthonormal column block itself.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Dimension of the surrounding space.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the spanned subspace.
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Orthogonal projector `B B^T` onto the subspace. Projectors are the
    /// rotation-invariant face of a basis: use them for comparisons.
    pub fn projector(&self) -> Matrix {
        if self.dim() == 0 {
            return Matrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        Matrix::from_dmatrix(self.basis.as_dmatrix() * self.basis.as_dmatrix().transpose())
    }

    /// Coordinates `B^T v` of columns of `v` in this basis.
    pub fn coordinates(&self, v: &Matrix) -> Result<Matrix> {
        if v.rows() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "subspace lives in R^{}, vectors live in R^{}",
                    self.ambient_dim,
                    v.rows()
                ),
            });
        }
        Ok(Matrix::from_dmatrix(
            self.basis.as_dmatrix().transpose() * v.as_dmatrix(),
        ))
    }
}

/// Completes the orthonormal columns of `u1` to a full orthonormal basis of
/// `R^n` and returns the trailing `n - t` columns (the orthogonal
/// complement of `col(u1)`).
///
/// Works by taking the Householder QR of `u1`: the reflector product `Q`
/// agrees with `col(u1)` on its first `t` columns, so the remaining columns
/// are an exactly orthonormal complement. For `t = 0` this degenerates to
/// the identity basis.
fn householder_complement(u1: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u1.nrows();
    let t = u1.ncols();
    debug_assert!(t <= n, "cannot have more orthonormal columns than rows");

    // Forward pass: reduce u1 to triangular form, recording reflectors
    // H_j = I - beta_j v_j v_j^T acting on rows j..n.
    let mut work = u1.clone();
    let mut reflectors: Vec<(DVector<f64>, f64)> = Vec::with_capacity(t);
    for j in 0..t {
        let len = n - j;
        let mut v = DVector::zeros(len);
        for i in 0..len {
            v[i] = work[(j + i, j)];
        }
        let alpha = v.norm();
        if alpha == 0.0 {
            // Zero column: orthonormal inputs never produce this, but the
            // identity reflector keeps the construction total.
            reflectors.push((v, 0.0));
            continue;
        }
        // Choose the sign that avoids cancellation in v[0].
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let beta = 2.0 / v.norm_squared();
        for col in j..t {
            let mut s = 0.0;
            for i in 0..len {
                s += v[i] * work[(j + i, col)];
            }
            s *= beta;
            for i in 0..len {
                work[(j + i, col)] -= s * v[i];
            }
        }
        reflectors.push((v, beta));
    }

    // Backward pass: complement column i is H_0 H_1 ... H_{t-1} e_{t+i}.
    let mut out = DMatrix::zeros(n, n - t);
    for (slot, col) in (t..n).enumerate() {
        let mut w = DVector::zeros(n);
        w[col] = 1.0;
        for j in (0..t).rev() {
            let (v, beta) = &reflectors[j];
            if *beta == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for i in 0..v.len() {
                s += v[i] * w[j + i];
            }
            s *= beta;
            for i in 0..v.len() {
                w[j + i] -= s * v[i];
            }
        }
        out.column_mut(slot).copy_from(&w);
    }
    out
}

/// Orthonormal basis of the left nullspace of `a`: all directions `u` with
/// `u^T a = 0` up to the numerical-rank cut.
///
/// The basis has `a.rows() - rank(a)` columns; a zero or empty `a` yields
/// the identity basis of the full space.
pub fn left_nullspace_basis(a: &Matrix, tol: RankTolerance) -> Result<SubspaceBasis> {
    let svd = thin_svd(a, tol)?;
    Ok(SubspaceBasis::new(Matrix::from_dmatrix(
        householder_complement(svd.u().as_dmatrix()),
    )))
}

/// Orthonormal basis of the complement of the top-`k` left singular
/// directions of `c_pres`, built from an already-computed decomposition.
///
/// The returned block is `[U_tail | U_out]`: first the retained-but-weak
/// singular directions `k+1 .. rank`, then the directions entirely outside
/// the column span. Together with the top-`k` block it completes an
/// orthonormal basis of the ambient space.
pub fn complement_basis_topk_from_svd(svd: &ThinSvd, k: usize) -> Result<SubspaceBasis> {
    let rank = svd.numerical_rank();
    if k > rank {
        return Err(Error::TruncationOutOfRange { k, rank });
    }
    let n = svd.rows();
    let u = svd.u().as_dmatrix();
    let mut out = DMatrix::zeros(n, n - k);
    out.columns_mut(0, rank - k).copy_from(&u.columns(k, rank - k));
    out.columns_mut(rank - k, n - rank)
        .copy_from(&householder_complement(u));
    Ok(SubspaceBasis::new(Matrix::from_dmatrix(out)))
}

/// Orthonormal basis of the complement of the top-`k` left singular
/// directions of `c_pres` (see [`complement_basis_topk_from_svd`]).
///
/// `k = rank(c_pres)` recovers the left nullspace; `k` above the numerical
/// rank is rejected. An empty preserved set yields the identity basis.
pub fn complement_basis_topk(c_pres: &Matrix, k: usize, tol: RankTolerance) -> Result<SubspaceBasis> {
    let svd = thin_svd(c_pres, tol)?;
    complement_basis_topk_from_svd(&svd, k)
}

/// Orthogonal projection of each column of `v` onto the column span of `s`:
/// `S (S^T S)^+ S^T v`, computed stably through the thin SVD of `s`.
///
/// A rank-zero `s` projects everything to zero. Row counts must agree.
pub fn orthogonal_project(s: &Matrix, v: &Matrix, tol: RankTolerance) -> Result<Matrix> {
    if s.rows() != v.rows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "projection basis has {} rows, vectors have {}",
                s.rows(),
                v.rows()
            ),
        });
    }
    let svd = thin_svd(s, tol)?;
    if svd.numerical_rank() == 0 {
        return Ok(Matrix::zeros(v.rows(), v.cols()));
    }
    let u = svd.u().as_dmatrix();
    Ok(Matrix::from_dmatrix(u * (u.transpose() * v.as_dmatrix())))
}

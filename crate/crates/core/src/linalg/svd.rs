//! Thin singular value decomposition with an explicit numerical-rank cut,
//! plus the Moore–Penrose pseudoinverse built on top of it.
//!
//! Every rank decision in this crate flows through [`RankTolerance`]: a
//! singular value is kept iff it exceeds `rel * sigma_max`, where `rel` is
//! either caller-chosen or the conventional `machine_epsilon * max(rows,
//! cols)`. The absolute cutoff actually used is recorded on the returned
//! [`ThinSvd`] so reports can state which directions were discarded.

use faer::Mat;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::Matrix;

/// Relative threshold separating "numerically zero" singular values from
/// real ones.
///
/// Serialized as `null` (default) or a bare number (explicit relative
/// threshold), which is how configuration files and reports spell it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankTolerance {
    /// `machine_epsilon * max(rows, cols)`, the standard SVD-based rank rule.
    #[default]
    Default,
    /// Caller-supplied relative threshold; must be positive and finite.
    Relative(f64),
}

impl RankTolerance {
    /// The relative threshold for a matrix of the given shape.
    pub fn relative_threshold(self, rows: usize, cols: usize) -> Result<f64> {
        match self {
            RankTolerance::Default => Ok(f64::EPSILON * rows.max(cols).max(1) as f64),
            RankTolerance::Relative(t) => {
                if t.is_finite() && t > 0.0 {
                    Ok(t)
                } else {
                    Err(Error::InvalidTolerance(t))
                }
            }
        }
    }

    /// Absolute cutoff for a matrix with largest singular value `sigma_max`.
    pub fn absolute_cutoff(self, rows: usize, cols: usize, sigma_max: f64) -> Result<f64> {
        Ok(self.relative_threshold(rows, cols)? * sigma_max)
    }
}

/// Rank-revealing thin SVD: `A = U diag(sigma) Vt` with `U: rows x q`,
/// `Vt: q x cols`, and `q` the numerical rank under the recorded cutoff.
///
/// Invariants upheld by construction:
/// * `sigma` is sorted in descending order and every entry exceeds
///   [`ThinSvd::tolerance`];
/// * `U` and `Vt`'s transpose have orthonormal columns;
/// * a rank-zero input yields empty factors (`q = 0`).
#[derive(Clone, Debug)]
pub struct ThinSvd {
    rows: usize,
    cols: usize,
    u: Matrix,
    sigma: Vec<f64>,
    vt: Matrix,
    tolerance: f64,
}

impl ThinSvd {
    /// Row count of the decomposed matrix.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count of the decomposed matrix.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Left singular vectors, `rows x rank`.
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    /// Retained singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Right singular vectors transposed, `rank x cols`.
    pub fn vt(&self) -> &Matrix {
        &self.vt
    }

    /// Number of singular values above the cutoff.
    pub fn numerical_rank(&self) -> usize {
        self.sigma.len()
    }

    /// Largest singular value of the input (0 for a zero matrix).
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Absolute cutoff that separated retained from discarded directions.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `U diag(sigma) Vt`, the best rank-`q` reconstruction of the input.
    pub fn reconstruct(&self) -> Matrix {
        if self.numerical_rank() == 0 {
            return Matrix::zeros(self.rows, self.cols);
        }
        let mut scaled = self.u.as_dmatrix().clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(s);
        }
        Matrix::from_dmatrix(scaled * self.vt.as_dmatrix())
    }

    /// Moore–Penrose pseudoinverse `V diag(1/sigma) Ut`, `cols x rows`.
    pub fn pseudoinverse(&self) -> Matrix {
        if self.numerical_rank() == 0 {
            return Matrix::zeros(self.cols, self.rows);
        }
        let mut vt_scaled = self.vt.as_dmatrix().clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            vt_scaled.row_mut(j).scale_mut(1.0 / s);
        }
        Matrix::from_dmatrix(vt_scaled.transpose() * self.u.as_dmatrix().transpose())
    }
}

/// Computes the rank-revealing thin SVD of `a` under `tol`.
///
/// Empty shapes and the zero matrix are legal and produce rank 0 with empty
/// factors. Fails only for an invalid tolerance or (pathologically) a
/// non-converging bidiagonal sweep.
pub fn thin_svd(a: &Matrix, tol: RankTolerance) -> Result<ThinSvd> {
    let (rows, cols) = (a.rows(), a.cols());
    let rel = tol.relative_threshold(rows, cols)?;
    if a.is_empty() {
        return Ok(ThinSvd {
            rows,
            cols,
            u: Matrix::zeros(rows, 0),
            sigma: Vec::new(),
            vt: Matrix::zeros(0, cols),
            tolerance: 0.0,
        });
    }

    let svd = to_faer(a)
        .thin_svd()
        .map_err(|_| Error::SvdFailure { rows, cols })?;
    let u_thin = svd.U();
    let v_thin = svd.V();
    let values = svd.S();

    let sigma_max = values[0];
    let cutoff = rel * sigma_max;
    // Singular values arrive sorted descending, so the retained set is the
    // leading prefix that clears the cutoff.
    let rank = (0..values.dim())
        .take_while(|&i| values[i] > cutoff)
        .count();

    let mut u = DMatrix::zeros(rows, rank);
    let mut vt = DMatrix::zeros(rank, cols);
    let mut sigma = Vec::with_capacity(rank);
    for k in 0..rank {
        for i in 0..rows {
            u[(i, k)] = u_thin[(i, k)];
        }
        for j in 0..cols {
            vt[(k, j)] = v_thin[(j, k)];
        }
        sigma.push(values[k]);
    }

    Ok(ThinSvd {
        rows,
        cols,
        u: Matrix::from_dmatrix(u),
        sigma,
        vt: Matrix::from_dmatrix(vt),
        tolerance: cutoff,
    })
}

/// Moore–Penrose pseudoinverse of `a` with rank decided by `tol`.
///
/// The zero matrix (rank 0) maps to the zero matrix of transposed shape.
pub fn pinv(a: &Matrix, tol: RankTolerance) -> Result<Matrix> {
    Ok(thin_svd(a, tol)?.pseudoinverse())
}

/// All singular values of `a`, descending; empty for empty shapes.
///
/// Unlike [`thin_svd`] this applies no rank cut, so trailing numerically-zero
/// values are included.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(a).singular_values().map_err(|_| Error::SvdFailure {
        rows: a.rows(),
        cols: a.cols(),
    })
}

/// Largest singular value of `a`; 0 for empty or zero matrices.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

fn to_faer(a: &Matrix) -> Mat<f64> {
    let d = a.as_dmatrix();
    Mat::from_fn(a.rows(), a.cols(), |i, j| d[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_full_rank_and_unit_spectrum() {
        let svd = thin_svd(&Matrix::identity(3), RankTolerance::Default).unwrap();
        assert_eq!(svd.numerical_rank(), 3);
        for &s in svd.sigma() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
        }
        let recon = svd.reconstruct();
        assert!((&recon - &Matrix::identity(3)).max_abs() <= 1e-14);
    }

    #[test]
    fn zero_matrix_has_rank_zero_and_empty_factors() {
        let svd = thin_svd(&Matrix::zeros(2, 4), RankTolerance::Default).unwrap();
        assert_eq!(svd.numerical_rank(), 0);
        assert_eq!(svd.u().cols(), 0);
        assert_eq!(svd.vt().rows(), 0);
        assert_eq!(svd.sigma_max(), 0.0);
        assert_eq!(svd.reconstruct(), Matrix::zeros(2, 4));
    }

    #[test]
    fn near_null_directions_fall_below_default_cutoff() {
        // Default cutoff is eps * max(dims) * sigma_1 ~ 2.2e-15 here.
        let a = Matrix::from_row_major(2, 2, vec![5.0, 0.0, 0.0, 1e-16]).unwrap();
        let svd = thin_svd(&a, RankTolerance::Default).unwrap();
        assert_eq!(svd.numerical_rank(), 1);
        assert_abs_diff_eq!(svd.sigma()[0], 5.0, epsilon = 1e-12);

        // The pseudoinverse inverts only the retained direction.
        let p = pinv(&a, RankTolerance::Default).unwrap();
        assert_abs_diff_eq!(p.get(0, 0), 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(p.get(1, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn explicit_relative_tolerance_overrides_default() {
        // A looser explicit tolerance drops what the default keeps...
        let a = Matrix::from_row_major(2, 2, vec![5.0, 0.0, 0.0, 1e-13]).unwrap();
        assert_eq!(
            thin_svd(&a, RankTolerance::Default).unwrap().numerical_rank(),
            2
        );
        let svd = thin_svd(&a, RankTolerance::Relative(1e-10)).unwrap();
        assert_eq!(svd.numerical_rank(), 1);
        // ...and a tighter one keeps what the default drops.
        let b = Matrix::from_row_major(2, 2, vec![5.0, 0.0, 0.0, 1e-16]).unwrap();
        let svd = thin_svd(&b, RankTolerance::Relative(1e-18)).unwrap();
        assert_eq!(svd.numerical_rank(), 2);
        assert!(thin_svd(&a, RankTolerance::Relative(0.0)).is_err());
        assert!(thin_svd(&a, RankTolerance::Relative(f64::NAN)).is_err());
    }

    #[test]
    fn pinv_of_zero_matrix_is_zero_of_transposed_shape() {
        let p = pinv(&Matrix::zeros(3, 5), RankTolerance::Default).unwrap();
        assert_eq!((p.rows(), p.cols()), (5, 3));
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn singular_values_are_sorted_descending() {
        let a = Matrix::from_row_major(3, 3, vec![0.0, 2.0, 0.0, 7.0, 0.0, 0.0, 0.0, 0.0, 4.0])
            .unwrap();
        let svd = thin_svd(&a, RankTolerance::Default).unwrap();
        let s = svd.sigma();
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        assert_abs_diff_eq!(s[0], 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn near_singular_inputs_factor_accurately() {
        // A rank-1 outer product whose rounding-level second singular value
        // defeats shift-based iterations that decide convergence too late:
        // the factorization must still reconstruct the input and report the
        // true spectrum (sigma_1 ~ 1.8576, sigma_2 ~ 1e-16 -> rank 1).
        let a = Matrix::from_row_major(
            2,
            2,
            vec![
                0.47678085012515414,
                -1.177274298663847,
                0.508808054099652,
                -1.256356342515532,
            ],
        )
        .unwrap();
        let svd = thin_svd(&a, RankTolerance::Default).unwrap();
        assert_eq!(svd.numerical_rank(), 1);
        assert_abs_diff_eq!(svd.sigma()[0], 1.8575822050817012, epsilon = 1e-12);
        assert!((&svd.reconstruct() - &a).max_abs() <= 1e-14);

        let p = pinv(&a, RankTolerance::Default).unwrap();
        let apa = &(&a * &p) * &a;
        assert!((&apa - &a).max_abs() <= 1e-14);
    }

    #[test]
    fn spectral_norm_matches_largest_singular_value() {
        let a = Matrix::from_row_major(2, 3, vec![1.0, 0.0, 0.0, 0.0, -3.0, 0.0]).unwrap();
        assert_abs_diff_eq!(spectral_norm(&a).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(spectral_norm(&Matrix::zeros(0, 4)).unwrap(), 0.0);
    }
}

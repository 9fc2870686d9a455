//! Certificate for the perturbation lower bound of the least-squares route.
//!
//! For a single-target least-squares edit with invertible correlation matrix
//! `N = c c^T + C_pres C_pres^T`, the update is the rank-one matrix
//! `delta_w = (W0 c* - W0 c) c^T N^{-1}`. Two consequences are checkable:
//!
//! * **Lower bound.** For each preserved column `p`, with the realized
//!   coefficient `lambda = (c^T N^{-1} p) / (c^T N^{-1} c)`,
//!   `||delta_w p|| >= lambda ||delta_w c||` — in fact equality holds with
//!   `|lambda|`, so any positive correlation between `c` and `p` in the
//!   `N^{-1}` geometry forces a proportional hit on the preserved image.
//! * **Collinearity.** `delta_w p` is a scalar multiple of the erasure
//!   direction `W0 c* - W0 c`: the damage is not noise, it is the erasure
//!   itself bleeding into preserved concepts.
//!
//! The certificate evaluates both statements numerically on the actual
//! update. A singular `N` is rejected with a condition report, since the
//! `N^{-1}`-weighted geometry behind `lambda` is then undefined.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, RankTolerance};

/// Additive slack used when checking the lower bound numerically.
pub const PERTURBATION_SLACK: f64 = 1e-8;

/// Largest acceptable sine between `delta_w p` and the erasure direction.
pub const COLLINEARITY_TOL: f64 = 1e-8;

/// Relative floor below which a moved image counts as unmeasurable.
///
/// When `||delta_w p||` is at rounding level (relative to `||delta_w||_F
/// ||p||`), the direction of the computed vector is noise and its angle
/// against the erasure direction carries no information; the sine is
/// reported as zero for such columns.
pub const COLLINEARITY_MEASUREMENT_FLOOR: f64 = 1e-12;

/// Numerical evidence for the perturbation lower bound on one edit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationCertificate {
    /// Eigenvalues of `N`, descending. All strictly positive (else the
    /// certificate is refused).
    pub correlation_spectrum: Vec<f64>,
    /// `lambda_max / lambda_min` of `N`.
    pub condition_number: f64,
    /// Realized coefficient `lambda_j` per preserved column.
    pub lambdas: Vec<f64>,
    /// `||delta_w c||`.
    pub delta_c_norm: f64,
    /// `||delta_w p_j||` per preserved column.
    pub delta_p_norms: Vec<f64>,
    /// Sine of the angle between `delta_w p_j` and the erasure direction
    /// (0 when `delta_w p_j` vanishes).
    pub collinearity_sines: Vec<f64>,
    /// Additive slack used in the bound checks.
    pub slack: f64,
    /// Per column: `||delta_w p_j|| >= lambda_j ||delta_w c|| - slack`.
    pub bounds_satisfied: Vec<bool>,
    /// All bounds hold and all sines are below [`COLLINEARITY_TOL`].
    pub all_satisfied: bool,
}

/// Evaluates the perturbation certificate for the single-target
/// least-squares edit defined by `(w0, c, c_star, c_pres)`.
///
/// Fails with [`Error::SingularCorrelation`] when `N` is numerically
/// rank-deficient (the bound needs `N^{-1}`), and with shape errors when the
/// inputs are inconsistent.
pub fn certify_perturbation(
    w0: &Matrix,
    c: &Matrix,
    c_star: &Matrix,
    c_pres: &Matrix,
    tol: RankTolerance,
) -> Result<PerturbationCertificate> {
    let n = c.rows();
    if c.cols() != 1 || c_star.cols() != 1 {
        return Err(Error::DimensionMismatch {
            context: "perturbation certificate takes a single target column and its anchor".into(),
        });
    }
    if c_star.rows() != n || c_pres.rows() != n || w0.cols() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "inconsistent dimensions: c in R^{n}, anchor in R^{}, preserved in R^{}, weights act on R^{}",
                c_star.rows(),
                c_pres.rows(),
                w0.cols()
            ),
        });
    }
    if c.column_norm(0) == 0.0 {
        return Err(Error::ZeroTargetColumn {
            index: 0,
            norm: 0.0,
        });
    }

    // N = c c^T + C_pres C_pres^T, assembled once as [c | C_pres] times its
    // transpose so symmetry is exact.
    let stacked = Matrix::hstack(&[c, c_pres])?;
    let n_mat = stacked.as_dmatrix() * stacked.as_dmatrix().transpose();
    let eigen = SymmetricEigen::new(n_mat);

    let mut spectrum: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    spectrum.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let lambda_max = spectrum.first().copied().unwrap_or(0.0);
    let cutoff = tol.relative_threshold(n, n)? * lambda_max;
    let rank = spectrum.iter().filter(|&&v| v > cutoff).count();
    if rank < n {
        let lambda_min = spectrum.last().copied().unwrap_or(0.0);
        let cond = if lambda_min > 0.0 {
            lambda_max / lambda_min
        } else {
            f64::INFINITY
        };
        return Err(Error::SingularCorrelation { rank, dim: n, cond });
    }
    let condition_number = lambda_max / spectrum[n - 1];

    // N^{-1} c through the eigendecomposition: Q diag(1/lambda) Q^T c.
    let q = &eigen.eigenvectors;
    let mut coeffs = q.transpose() * stacked.as_dmatrix().column(0);
    for (i, &ev) in eigen.eigenvalues.iter().enumerate() {
        coeffs[i] /= ev;
    }
    let ninv_c = q * coeffs;
    let denom = (stacked.as_dmatrix().column(0).transpose() * &ninv_c)[(0, 0)];

    let resid = w0.as_dmatrix() * (c_star.as_dmatrix() - c.as_dmatrix());
    let resid_norm = resid.norm();
    let delta_w: DMatrix<f64> = &resid * ninv_c.transpose();
    let delta_c_norm = (&delta_w * c.as_dmatrix()).norm();
    let delta_w_fro = delta_w.norm();

    let m = c_pres.cols();
    let mut lambdas = Vec::with_capacity(m);
    let mut delta_p_norms = Vec::with_capacity(m);
    let mut collinearity_sines = Vec::with_capacity(m);
    let mut bounds_satisfied = Vec::with_capacity(m);
    for j in 0..m {
        let p = c_pres.as_dmatrix().column(j);
        let lambda = (p.transpose() * &ninv_c)[(0, 0)] / denom;
        let moved = &delta_w * p;
        let moved_norm = moved.norm();
        let measurement_floor = COLLINEARITY_MEASUREMENT_FLOOR * delta_w_fro * p.norm();
        let sine = if moved_norm <= measurement_floor || resid_norm == 0.0 {
            0.0
        } else {
            let along = &resid * (resid.dot(&moved) / (resid_norm * resid_norm));
            (moved - along).norm() / moved_norm
        };
        bounds_satisfied.push(moved_norm >= lambda * delta_c_norm - PERTURBATION_SLACK);
        lambdas.push(lambda);
        delta_p_norms.push(moved_norm);
        collinearity_sines.push(sine);
    }

    let all_satisfied = bounds_satisfied.iter().all(|&b| b)
        && collinearity_sines.iter().all(|&s| s <= COLLINEARITY_TOL);

    Ok(PerturbationCertificate {
        correlation_spectrum: spectrum,
        condition_number,
        lambdas,
        delta_c_norm,
        delta_p_norms,
        collinearity_sines,
        slack: PERTURBATION_SLACK,
        bounds_satisfied,
        all_satisfied,
    })
}

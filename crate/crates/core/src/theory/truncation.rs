//! Certificate for truncated nullspace edits: what is risked and what is
//! still guaranteed when only the top-`k` preserved directions are
//! protected.
//!
//! Write `delta_w = Z* U_2^T` with `U_2` the complement of the top-`k` left
//! singular directions of `C_pres`. Two families of statements are checked:
//!
//! * **Preservation decay.** For every preserved column `p_i`,
//!   `||delta_w p_i|| <= ||Z*||_2 sigma_{k+1}(C_pres)`: the damage to the
//!   preserved set is controlled by the first sacrificed singular value. At
//!   `k = rank` the right-hand side vanishes and preservation is exact.
//! * **Erasure identity and floor.** On the feasible targets `C_f`, the
//!   realized change factors exactly as `delta_w C_f = B V V^T`, where
//!   `B = W0 (C_f* - C_f)` and `V` collects the right singular vectors of
//!   `U_2^T C_f`. Whenever `B V` has full column rank
//!   (`sigma_min(B V) > kernel_tol`), every feasible target moves by at
//!   least `sigma_min(B V) ||y_i||` with `y_i` the `i`-th row of `V` — the
//!   edit cannot silently leave a feasible target behind.
//!
//! `Z*` is reconstructed from the finished edit as `delta_w U_2`, so the
//! certificate checks the artifact that was actually produced, not a
//! recomputation of it.

use serde::{Deserialize, Serialize};

use crate::erasure::{EditProblem, EditResult};
use crate::error::{Error, Result};
use crate::linalg::{complement_basis_topk_from_svd, spectral_norm, thin_svd, Matrix, RankTolerance};

/// Additive slack applied to both bound checks.
pub const TRUNCATION_SLACK: f64 = 1e-8;

/// Relative tolerance for the factorization identity.
pub const IDENTITY_REL_TOL: f64 = 1e-8;

/// Default threshold on `sigma_min(B V)` below which the erasure floor is
/// reported as vacuous rather than asserted.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

/// Numerical evidence for the truncation trade-off of one edit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationCertificate {
    /// Number of protected spectral directions.
    pub k: usize,
    /// Numerical rank of the preserved set.
    pub preserved_rank: usize,
    /// Spectral norm of the reconstructed `Z* = delta_w U_2`.
    pub z_star_spectral_norm: f64,
    /// First sacrificed singular value `sigma_{k+1}(C_pres)` (0 at full
    /// protection).
    pub sigma_k_plus_1: f64,
    /// `||delta_w p_i||` per preserved column (absolute norms).
    pub per_preserved_perturbation: Vec<f64>,
    /// Every preserved perturbation is at most
    /// `z_star_spectral_norm * sigma_k_plus_1 + slack`.
    pub preservation_bound_satisfied: bool,
    /// `||delta_w C_f - B V V^T||_F / max(||B||_F, eps)`.
    pub identity_relative_residual: f64,
    /// Identity residual at or below [`IDENTITY_REL_TOL`].
    pub identity_satisfied: bool,
    /// Smallest singular value of `B V`.
    pub sigma_min_bv: f64,
    /// `sigma_min_bv` exceeds the kernel threshold, so the erasure floor is
    /// a real guarantee rather than vacuous.
    pub kernel_condition_holds: bool,
    /// Guaranteed minimum movement `sigma_min_bv * ||y_i||` per feasible
    /// target.
    pub erasure_lower_bounds: Vec<f64>,
    /// Measured `||delta_w c_i||` per feasible target.
    pub measured_erasures: Vec<f64>,
    /// When the kernel condition holds: every measured erasure exceeds its
    /// floor (up to slack). Vacuously true otherwise.
    pub erasure_bound_satisfied: bool,
    /// Indices of the targets that took part in the fit.
    pub feasible_targets: Vec<usize>,
    /// Additive slack used in the bound checks.
    pub slack: f64,
}

impl TruncationCertificate {
    /// All checked statements hold.
    pub fn passed(&self) -> bool {
        self.preservation_bound_satisfied
            && self.identity_satisfied
            && (!self.kernel_condition_holds || self.erasure_bound_satisfied)
    }
}

/// Evaluates the truncation certificate for a nullspace-route result.
///
/// `result` must come from the nullspace route (its diagnostics carry the
/// truncation level); least-squares results are rejected.
pub fn certify_truncation(
    problem: &EditProblem,
    result: &EditResult,
    tol: RankTolerance,
    kernel_tol: f64,
) -> Result<TruncationCertificate> {
    let k = result.diagnostics().truncation_k.ok_or_else(|| {
        Error::InvalidSpec(
            "truncation certificate applies to nullspace-route results (no truncation level found)"
                .into(),
        )
    })?;
    if !(kernel_tol.is_finite() && kernel_tol > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "kernel threshold must be positive and finite, got {kernel_tol}"
        )));
    }

    let delta_w = result.delta_w();
    let c_pres = problem.c_pres();
    let c_tgt = problem.c_tgt();

    let svd_pres = thin_svd(c_pres, tol)?;
    let preserved_rank = svd_pres.numerical_rank();
    if k > preserved_rank {
        return Err(Error::TruncationOutOfRange {
            k,
            rank: preserved_rank,
        });
    }
    let sigma_k_plus_1 = if k < preserved_rank {
        svd_pres.sigma()[k]
    } else {
        0.0
    };

    // Z* as the artifact realizes it.
    let u2 = complement_basis_topk_from_svd(&svd_pres, k)?;
    let z_star = Matrix::from_dmatrix(delta_w.as_dmatrix() * u2.basis().as_dmatrix());
    let z_star_spectral_norm = spectral_norm(&z_star)?;

    let mut per_preserved_perturbation = Vec::with_capacity(c_pres.cols());
    for j in 0..c_pres.cols() {
        per_preserved_perturbation
            .push((delta_w.as_dmatrix() * nalgebra::DVector::from_vec(c_pres.column(j))).norm());
    }
    let preservation_cap = z_star_spectral_norm * sigma_k_plus_1 + TRUNCATION_SLACK;
    let preservation_bound_satisfied = per_preserved_perturbation
        .iter()
        .all(|&v| v <= preservation_cap);

    // Feasible-target block, matching the fit the edit actually performed.
    let infeasible = &result.diagnostics().infeasible_targets;
    let feasible_targets: Vec<usize> =
        (0..c_tgt.cols()).filter(|i| !infeasible.contains(i)).collect();
    let c_f = c_tgt.select_columns(&feasible_targets);
    let a_f = result.proxies().select_columns(&feasible_targets);
    let b = Matrix::from_dmatrix(w0_times_shift(problem, &a_f, &c_f));

    let c_perp = u2.coordinates(&c_f)?;
    let svd_perp = thin_svd(&c_perp, tol)?;
    let v = svd_perp.vt().transpose(); // t_f x q

    // Identity: delta_w C_f = B V V^T.
    let lhs = delta_w.as_dmatrix() * c_f.as_dmatrix();
    let rhs = b.as_dmatrix() * (v.as_dmatrix() * v.as_dmatrix().transpose());
    let identity_relative_residual = (lhs - rhs).norm() / b.frobenius_norm().max(f64::MIN_POSITIVE);
    let identity_satisfied = identity_relative_residual <= IDENTITY_REL_TOL;

    // Erasure floor through sigma_min(B V) — the full spectrum, not the
    // rank-cut one, since a tiny value must *fail* the kernel condition.
    let bv = &b * &v;
    let sigma_min_bv = smallest_singular_value(&bv)?;
    let kernel_condition_holds = bv.cols() > 0 && sigma_min_bv > kernel_tol;

    let mut erasure_lower_bounds = Vec::with_capacity(feasible_targets.len());
    let mut measured_erasures = Vec::with_capacity(feasible_targets.len());
    for (row, &idx) in feasible_targets.iter().enumerate() {
        let y_norm = v.as_dmatrix().row(row).norm();
        erasure_lower_bounds.push(sigma_min_bv * y_norm);
        measured_erasures
            .push((delta_w.as_dmatrix() * nalgebra::DVector::from_vec(c_tgt.column(idx))).norm());
    }
    let erasure_bound_satisfied = !kernel_condition_holds
        || measured_erasures
            .iter()
            .zip(&erasure_lower_bounds)
            .all(|(&meas, &floor)| meas >= floor - TRUNCATION_SLACK);

    Ok(TruncationCertificate {
        k,
        preserved_rank,
        z_star_spectral_norm,
        sigma_k_plus_1,
        per_preserved_perturbation,
        preservation_bound_satisfied,
        identity_relative_residual,
        identity_satisfied,
        sigma_min_bv,
        kernel_condition_holds,
        erasure_lower_bounds,
        measured_erasures,
        erasure_bound_satisfied,
        feasible_targets,
        slack: TRUNCATION_SLACK,
    })
}

fn w0_times_shift(
    problem: &EditProblem,
    anchors: &Matrix,
    targets: &Matrix,
) -> nalgebra::DMatrix<f64> {
    problem.w0().as_dmatrix() * (anchors.as_dmatrix() - targets.as_dmatrix())
}

/// Smallest singular value over the full spectrum of `a` (0 for empty
/// shapes), including values a rank cut would discard.
fn smallest_singular_value(a: &Matrix) -> Result<f64> {
    // A wide matrix has a nontrivial right kernel even if all computed
    // singular values are positive.
    if a.is_empty() || a.cols() > a.rows() {
        return Ok(0.0);
    }
    let values = crate::linalg::singular_values(a)?;
    Ok(values.iter().fold(f64::INFINITY, |acc, &v| acc.min(v)))
}

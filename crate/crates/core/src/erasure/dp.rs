//! Nullspace-constrained editing route ("double projection").
//!
//! Two projections give the route its shape:
//!
//! 1. **Anchor projection.** Each target embedding is projected onto a safe
//!    subspace (or replaced by an explicit anchor), fixing *what* the edited
//!    layer should produce for erased concepts.
//! 2. **Update projection.** The weight update is constrained to act only on
//!    the orthogonal complement of the protected span: with `U_2` an
//!    orthonormal basis of that complement, `delta_w = Z U_2^T` for some
//!    `Z`. Every protected direction `p` then satisfies `delta_w p = 0`
//!    *identically* — preservation is a structural property, not a solved
//!    trade-off.
//!
//! The protected span is the top-`k` left singular subspace of `C_pres`
//! (`k = rank` by default, i.e. the whole span). Within the constraint, `Z`
//! is chosen as the minimum-Frobenius-norm least-squares fit mapping each
//! feasible target `c_i` to `W0 c_i*`:
//!
//! ```text
//! Z* = B (U_2^T C_tgt)^+        with  B = W0 (C_tgt* - C_tgt),
//! delta_w = Z* U_2^T.
//! ```
//!
//! A target whose component outside the protected span is numerically zero
//! cannot be moved without disturbing preserved directions; such targets are
//! excluded from the fit and reported, rather than silently amplifying
//! noise. With a single feasible target the formula collapses to the
//! rank-one update `W0 (c* - c) x^T / ||x||^2 U_2^T`, `x = U_2^T c`, which
//! maps `c` to `W0 c*` exactly.

use nalgebra::DMatrix;

use crate::erasure::{
    build_diagnostics, resolve_proxies, ConceptSet, EditConfig, EditProblem, EditResult, Method,
};
use crate::error::{Error, Result};
use crate::linalg::{complement_basis_topk_from_svd, thin_svd, Matrix, SubspaceBasis};

/// Concept-side quantities shared by every layer in a batch.
pub(crate) struct PreparedDp {
    proxies: Matrix,
    degenerate: Vec<usize>,
    preserved_rank: usize,
    k: usize,
    /// Orthonormal basis of the unprotected complement, `n x (n - k)`.
    u2: SubspaceBasis,
    feasible: Vec<usize>,
    infeasible: Vec<usize>,
    /// `(A - C_tgt)` restricted to feasible columns, `n x t_f`.
    shift_feasible: Matrix,
    /// `(U_2^T C_f)^+`, `t_f x (n - k)`.
    pinv_cperp: DMatrix<f64>,
}

pub(crate) fn prepare(concepts: &ConceptSet, config: &EditConfig) -> Result<PreparedDp> {
    if !(config.infeasible_threshold.is_finite() && config.infeasible_threshold > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "infeasible threshold must be positive and finite, got {}",
            config.infeasible_threshold
        )));
    }

    let resolved = resolve_proxies(concepts, config)?;

    let svd_pres = thin_svd(concepts.c_pres(), config.rank_tolerance)?;
    let preserved_rank = svd_pres.numerical_rank();
    let k = match config.truncation_k {
        Some(k) if k > preserved_rank => {
            return Err(Error::TruncationOutOfRange {
                k,
                rank: preserved_rank,
            })
        }
        Some(k) => k,
        None => preserved_rank,
    };
    let u2 = complement_basis_topk_from_svd(&svd_pres, k)?;

    // Feasibility: a target is editable iff it has a nontrivial component in
    // the unprotected complement.
    let coords = u2.coordinates(concepts.c_tgt())?;
    let mut feasible = Vec::new();
    let mut infeasible = Vec::new();
    for i in 0..concepts.c_tgt().cols() {
        let out_norm = coords.column_norm(i);
        if out_norm <= config.infeasible_threshold * concepts.c_tgt().column_norm(i) {
            infeasible.push(i);
        } else {
            feasible.push(i);
        }
    }

    let shift_all = resolved.proxies.as_dmatrix() - concepts.c_tgt().as_dmatrix();
    let shift_feasible = Matrix::from_dmatrix(shift_all.select_columns(feasible.iter()));
    let cperp = coords.select_columns(&feasible);
    let pinv_cperp = thin_svd(&cperp, config.rank_tolerance)?
        .pseudoinverse()
        .as_dmatrix()
        .clone();

    Ok(PreparedDp {
        proxies: resolved.proxies,
        degenerate: resolved.degenerate,
        preserved_rank,
        k,
        u2,
        feasible,
        infeasible,
        shift_feasible,
        pinv_cperp,
    })
}

pub(crate) fn apply(
    prepared: &PreparedDp,
    w0: &Matrix,
    concepts: &ConceptSet,
    _config: &EditConfig,
) -> Result<EditResult> {
    let p = w0.rows();
    let n = concepts.dim();

    let delta_w = if prepared.feasible.is_empty() {
        // Nothing can be moved without breaking preservation: zero update.
        Matrix::zeros(p, n)
    } else {
        let b = w0.as_dmatrix() * prepared.shift_feasible.as_dmatrix();
        let z = b * &prepared.pinv_cperp;
        Matrix::from_dmatrix_checked(z * prepared.u2.basis().as_dmatrix().transpose())?
    };

    Ok(EditResult::assemble(
        w0,
        delta_w,
        prepared.proxies.clone(),
        |delta_w, w_new| {
            build_diagnostics(
                Method::Dp,
                w0,
                delta_w,
                w_new,
                concepts.c_tgt(),
                &prepared.proxies,
                concepts.c_pres(),
                prepared.preserved_rank,
                Some(prepared.k),
                prepared.infeasible.clone(),
                prepared.degenerate.clone(),
                false,
            )
        },
    ))
}

/// Runs the nullspace-constrained route on a single problem.
///
/// `config.truncation_k` selects how much of the preserved spectrum to
/// protect (`None` = all of it); `config.method` is not consulted.
pub fn dp_edit(problem: &EditProblem, config: &EditConfig) -> Result<EditResult> {
    let prepared = prepare(problem.concepts(), config)?;
    apply(&prepared, problem.w0(), problem.concepts(), config)
}

//! Least-squares editing route.
//!
//! Solves the stationarity system of the joint objective "map each target
//! `c_i` to its anchor `c_i*`, keep each preserved `p_j` fixed":
//!
//! ```text
//! W (C_tgt C_tgt^T + C_pres C_pres^T) = V* C_tgt^T + W0 C_pres C_pres^T
//! ```
//!
//! with `V* = W0 [c_1* ... c_T*]`. When the normal matrix `G` on the left is
//! invertible this is the textbook closed form `W = RHS G^{-1}`. When `G` is
//! rank-deficient (fewer independent concept columns than dimensions — the
//! common case for wide layers) the system is solved as
//!
//! ```text
//! W = W0 + (RHS - W0 G) G^+,
//! ```
//!
//! the solution closest to `W0` in Frobenius norm. It satisfies the same
//! stationarity equations, coincides with `RHS G^{-1}` whenever `G` is
//! invertible, and degrades gracefully instead of zeroing `W0` outside the
//! concept span. The fallback is flagged in diagnostics.
//!
//! `G` is never inverted directly: with `C = [C_tgt | C_pres]` we have
//! `G = C C^T`, so a thin SVD `C = U S V^T` gives `G^+ = U S^{-2} U^T` at the
//! cost of decomposing an `n x (T+m)` matrix instead of an `n x n` one.

use nalgebra::DMatrix;

use crate::erasure::{
    build_diagnostics, resolve_proxies, ConceptSet, EditConfig, EditProblem, EditResult, Method,
};
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix};

/// Concept-side quantities shared by every layer in a batch.
pub(crate) struct PreparedUce {
    proxies: Matrix,
    degenerate: Vec<usize>,
    preserved_rank: usize,
    /// Left singular vectors of `C = [C_tgt | C_pres]`, `n x q`.
    gram_u: DMatrix<f64>,
    /// `C_tgt^T U S^{-2}`, `T x q`: the target-side half of the update.
    tgt_u_sinv2: DMatrix<f64>,
    gram_fallback: bool,
}

pub(crate) fn prepare(concepts: &ConceptSet, config: &EditConfig) -> Result<PreparedUce> {
    if config.truncation_k.is_some() {
        return Err(Error::InvalidSpec(
            "spectral truncation applies only to the nullspace method (dp)".into(),
        ));
    }
    if !(config.infeasible_threshold.is_finite() && config.infeasible_threshold > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "infeasible threshold must be positive and finite, got {}",
            config.infeasible_threshold
        )));
    }

    let resolved = resolve_proxies(concepts, config)?;
    let n = concepts.dim();

    let preserved_rank = thin_svd(concepts.c_pres(), config.rank_tolerance)?.numerical_rank();

    let c_all = Matrix::hstack(&[concepts.c_tgt(), concepts.c_pres()])?;
    let svd = thin_svd(&c_all, config.rank_tolerance)?;
    let gram_fallback = svd.numerical_rank() < n;

    // tgt_u_sinv2 = C_tgt^T U diag(1/s^2); combined with gram_u it applies
    // C_tgt^T G^+ without ever forming the n x n normal matrix.
    let mut tgt_u = concepts.c_tgt().as_dmatrix().transpose() * svd.u().as_dmatrix();
    for (j, &s) in svd.sigma().iter().enumerate() {
        tgt_u.column_mut(j).scale_mut(1.0 / (s * s));
    }

    Ok(PreparedUce {
        proxies: resolved.proxies,
        degenerate: resolved.degenerate,
        preserved_rank,
        gram_u: svd.u().as_dmatrix().clone(),
        tgt_u_sinv2: tgt_u,
        gram_fallback,
    })
}

pub(crate) fn apply(
    prepared: &PreparedUce,
    w0: &Matrix,
    concepts: &ConceptSet,
    _config: &EditConfig,
) -> Result<EditResult> {
    // RHS - W0 G collapses to W0 (A - C_tgt) C_tgt^T, so the update is
    // delta_w = W0 (A - C_tgt) C_tgt^T G^+ with A the resolved anchors.
    let shift = w0.as_dmatrix() * (prepared.proxies.as_dmatrix() - concepts.c_tgt().as_dmatrix());
    let delta = (&shift * &prepared.tgt_u_sinv2) * prepared.gram_u.transpose();
    let delta_w = Matrix::from_dmatrix_checked(delta)?;

    Ok(EditResult::assemble(
        w0,
        delta_w,
        prepared.proxies.clone(),
        |delta_w, w_new| {
            build_diagnostics(
                Method::Uce,
                w0,
                delta_w,
                w_new,
                concepts.c_tgt(),
                &prepared.proxies,
                concepts.c_pres(),
                prepared.preserved_rank,
                None,
                Vec::new(),
                prepared.degenerate.clone(),
                prepared.gram_fallback,
            )
        },
    ))
}

/// Runs the least-squares route on a single problem.
///
/// `config.truncation_k` must be `None` (truncation belongs to the nullspace
/// route); `config.method` is not consulted.
pub fn uce_edit(problem: &EditProblem, config: &EditConfig) -> Result<EditResult> {
    let prepared = prepare(problem.concepts(), config)?;
    apply(&prepared, problem.w0(), problem.concepts(), config)
}

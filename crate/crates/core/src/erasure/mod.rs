//! Closed-form weight editing: problem types, anchor/proxy resolution, and
//! the two editing routes.
//!
//! An *edit problem* bundles a weight matrix `W0: p x n`, target concept
//! embeddings `C_tgt: n x T` whose images must change, preserved embeddings
//! `C_pres: n x m` whose images must not, and an anchor specification
//! describing what each target should map to instead. Both routes produce a
//! `delta_w` with `w_new = w0 + delta_w` constructed literally as that sum,
//! so the decomposition can be re-checked bit-for-bit later.
//!
//! * [`uce_edit`](crate::erasure::uce_edit) solves the regularized
//!   least-squares trade-off between erasure and preservation in one
//!   normal-equation solve. Preservation is approximate: correlated
//!   directions leak.
//! * [`dp_edit`](crate::erasure::dp_edit) first projects targets onto a safe
//!   subspace to get anchors, then confines the entire update to the
//!   orthogonal complement of the (top-`k` spectral part of the) preserved
//!   span. Preservation of the protected directions is exact by
//!   construction.

mod dp;
mod uce;

pub use dp::dp_edit;
pub use uce::uce_edit;

use nalgebra::DVector;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_project, thin_svd, Matrix, RankTolerance};

/// Default relative threshold below which a target's component outside the
/// protected span is treated as zero (the target is then infeasible: erasing
/// it would necessarily disturb preserved directions).
pub const DEFAULT_INFEASIBLE_THRESHOLD: f64 = 1e-8;

/// How reported metrics relate to downstream quality measures. Attached to
/// every report this crate emits.
pub const METRIC_NOTE: &str = "Metrics are operator-level surrogates computed directly on the \
     edited weights, not downstream generation scores: erasure residual = \
     ||W_new c - W0 c*|| / (||W0 c*|| + 1) per target column c with anchor \
     c*; preservation drop = ||(W_new - W0) p|| / ||W0 p|| per preserved \
     column p (absolute norm if ||W0 p|| = 0); update norms are Frobenius.";

/// Which closed-form editing route to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Regularized least-squares edit (approximate preservation).
    Uce,
    /// Nullspace-constrained double-projection edit (exact preservation).
    Dp,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uce" => Ok(Method::Uce),
            "dp" => Ok(Method::Dp),
            other => Err(Error::InvalidSpec(format!(
                "unknown method {other:?}; expected \"uce\" or \"dp\""
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Uce => "uce",
            Method::Dp => "dp",
        })
    }
}

/// Where each erased target should land.
///
/// Either an explicit anchor column per target, a safe subspace whose
/// orthogonal projection supplies anchors, or both. When both are present
/// the explicit anchors win; setting
/// [`EditConfig::project_explicit_anchors`] additionally projects the
/// explicit anchors onto the safe span before use.
#[derive(Clone, Debug, Serialize)]
pub struct AnchorSpec {
    explicit_anchors: Option<Matrix>,
    safe_basis: Option<Matrix>,
}

impl AnchorSpec {
    /// Validates that at least one source of anchors is present.
    pub fn new(explicit_anchors: Option<Matrix>, safe_basis: Option<Matrix>) -> Result<Self> {
        if explicit_anchors.is_none() && safe_basis.is_none() {
            return Err(Error::InvalidAnchors {
                context: "need explicit anchors, a safe basis, or both".into(),
            });
        }
        Ok(Self {
            explicit_anchors,
            safe_basis,
        })
    }

    /// Anchors from explicit columns only.
    pub fn explicit(anchors: Matrix) -> Self {
        Self {
            explicit_anchors: Some(anchors),
            safe_basis: None,
        }
    }

    /// Anchors from projection onto a safe subspace only.
    pub fn from_safe_basis(safe_basis: Matrix) -> Self {
        Self {
            explicit_anchors: None,
            safe_basis: Some(safe_basis),
        }
    }

    /// Explicit anchor columns, if given.
    pub fn explicit_anchors(&self) -> Option<&Matrix> {
        self.explicit_anchors.as_ref()
    }

    /// Safe-subspace basis, if given.
    pub fn safe_basis(&self) -> Option<&Matrix> {
        self.safe_basis.as_ref()
    }
}

#[derive(Deserialize)]
struct AnchorSpecRepr {
    explicit_anchors: Option<Matrix>,
    safe_basis: Option<Matrix>,
}

impl<'de> Deserialize<'de> for AnchorSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = AnchorSpecRepr::deserialize(deserializer)?;
        AnchorSpec::new(repr.explicit_anchors, repr.safe_basis).map_err(D::Error::custom)
    }
}

/// The concept-side data of an edit: targets, preserved set, anchors.
///
/// Shared across layers when several weight matrices are edited against the
/// same concepts (see [`batch_edit`]). Validates shape agreement and that
/// every target column is nonzero.
#[derive(Clone, Debug, Serialize)]
pub struct ConceptSet {
    c_tgt: Matrix,
    c_pres: Matrix,
    anchors: AnchorSpec,
}

impl ConceptSet {
    /// Validates and bundles the concept-side matrices.
    ///
    /// `c_tgt` must be `n x T` with `T >= 1` and nonzero columns; `c_pres`
    /// is `n x m` with `m >= 0` (pass an `n x 0` matrix for "preserve
    /// nothing"); anchor shapes must agree with `n` and `T`.
    pub fn new(c_tgt: Matrix, c_pres: Matrix, anchors: AnchorSpec) -> Result<Self> {
        let n = c_tgt.rows();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                context: "embedding dimension must be at least 1".into(),
            });
        }
        let t = c_tgt.cols();
        if t == 0 {
            return Err(Error::EmptyTargets);
        }
        for i in 0..t {
            let norm = c_tgt.column_norm(i);
            if norm == 0.0 {
                return Err(Error::ZeroTargetColumn { index: i, norm });
            }
        }
        if c_pres.rows() != n {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "preserved set lives in R^{}, targets in R^{n}",
                    c_pres.rows()
                ),
            });
        }
        if let Some(a) = anchors.explicit_anchors() {
            if a.rows() != n || a.cols() != t {
                return Err(Error::InvalidAnchors {
                    context: format!(
                        "explicit anchors are {}x{}, expected {n}x{t} (one column per target)",
                        a.rows(),
                        a.cols()
                    ),
                });
            }
        }
        if let Some(s) = anchors.safe_basis() {
            if s.rows() != n {
                return Err(Error::InvalidAnchors {
                    context: format!("safe basis lives in R^{}, targets in R^{n}", s.rows()),
                });
            }
            if s.cols() == 0 {
                return Err(Error::InvalidAnchors {
                    context: "safe basis has no columns".into(),
                });
            }
        }
        Ok(Self {
            c_tgt,
            c_pres,
            anchors,
        })
    }

    /// Embedding dimension `n`.
    pub fn dim(&self) -> usize {
        self.c_tgt.rows()
    }

    /// Target embeddings, `n x T`.
    pub fn c_tgt(&self) -> &Matrix {
        &self.c_tgt
    }

    /// Preserved embeddings, `n x m`.
    pub fn c_pres(&self) -> &Matrix {
        &self.c_pres
    }

    /// The anchor specification.
    pub fn anchors(&self) -> &AnchorSpec {
        &self.anchors
    }
}

#[derive(Deserialize)]
struct ConceptSetRepr {
    c_tgt: Matrix,
    c_pres: Matrix,
    anchors: AnchorSpec,
}

impl<'de> Deserialize<'de> for ConceptSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ConceptSetRepr::deserialize(deserializer)?;
        ConceptSet::new(repr.c_tgt, repr.c_pres, repr.anchors).map_err(D::Error::custom)
    }
}

/// One complete editing instance: a weight matrix plus concept data.
#[derive(Clone, Debug, Serialize)]
pub struct EditProblem {
    w0: Matrix,
    concepts: ConceptSet,
}

impl EditProblem {
    /// Validates shapes and bundles everything needed for an edit.
    pub fn new(w0: Matrix, c_tgt: Matrix, c_pres: Matrix, anchors: AnchorSpec) -> Result<Self> {
        Self::from_concepts(w0, ConceptSet::new(c_tgt, c_pres, anchors)?)
    }

    /// Builds a problem from pre-validated concept data.
    pub fn from_concepts(w0: Matrix, concepts: ConceptSet) -> Result<Self> {
        if w0.rows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "weight matrix must have at least one row".into(),
            });
        }
        if w0.cols() != concepts.dim() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "weight matrix has {} input columns but embeddings live in R^{}",
                    w0.cols(),
                    concepts.dim()
                ),
            });
        }
        Ok(Self { w0, concepts })
    }

    /// Initial weights, `p x n`.
    pub fn w0(&self) -> &Matrix {
        &self.w0
    }

    /// Target embeddings, `n x T`.
    pub fn c_tgt(&self) -> &Matrix {
        self.concepts.c_tgt()
    }

    /// Preserved embeddings, `n x m`.
    pub fn c_pres(&self) -> &Matrix {
        self.concepts.c_pres()
    }

    /// The anchor specification.
    pub fn anchors(&self) -> &AnchorSpec {
        self.concepts.anchors()
    }

    /// The concept-side bundle (shared across layers in batch edits).
    pub fn concepts(&self) -> &ConceptSet {
        &self.concepts
    }
}

#[derive(Deserialize)]
struct EditProblemRepr {
    w0: Matrix,
    concepts: ConceptSet,
}

impl<'de> Deserialize<'de> for EditProblem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = EditProblemRepr::deserialize(deserializer)?;
        EditProblem::from_concepts(repr.w0, repr.concepts).map_err(D::Error::custom)
    }
}

/// Tunable knobs of an edit. All fields have sensible defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EditConfig {
    /// Editing route to run.
    pub method: Method,
    /// Spectral truncation level for the nullspace route: protect only the
    /// top-`k` left singular directions of the preserved set. `None` means
    /// the full numerical rank (exact preservation). Rejected for `uce`.
    pub truncation_k: Option<usize>,
    /// Threshold separating numerically-zero singular values from real ones
    /// in every rank decision this edit makes.
    pub rank_tolerance: RankTolerance,
    /// Relative size below which a target's out-of-span component counts as
    /// zero, making the target infeasible.
    pub infeasible_threshold: f64,
    /// When explicit anchors and a safe basis are both present, project the
    /// explicit anchors onto the safe span instead of using them as-is.
    pub project_explicit_anchors: bool,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            method: Method::Dp,
            truncation_k: None,
            rank_tolerance: RankTolerance::Default,
            infeasible_threshold: DEFAULT_INFEASIBLE_THRESHOLD,
            project_explicit_anchors: false,
        }
    }
}

impl EditConfig {
    /// Checks internal consistency of the knobs.
    pub fn validate(&self) -> Result<()> {
        if !(self.infeasible_threshold.is_finite() && self.infeasible_threshold > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "infeasible threshold must be positive and finite, got {}",
                self.infeasible_threshold
            )));
        }
        if self.method == Method::Uce && self.truncation_k.is_some() {
            return Err(Error::InvalidSpec(
                "spectral truncation applies only to the nullspace method (dp)".into(),
            ));
        }
        // Surface bad tolerances at configuration time, not mid-edit.
        self.rank_tolerance.relative_threshold(1, 1)?;
        Ok(())
    }
}

/// Numeric summary of one edit, serialized into every report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Route that produced the edit.
    pub method: Method,
    /// Numerical rank of the preserved set.
    pub preserved_rank: usize,
    /// Truncation level actually used by the nullspace route (`None` for
    /// the least-squares route, `Some(rank)` when no truncation was asked).
    pub truncation_k: Option<usize>,
    /// Per target `i`: `||W_new c_i - W0 c_i*|| / (||W0 c_i*|| + 1)`.
    pub erasure_residuals: Vec<f64>,
    /// Per preserved column `j`: `||delta_w p_j|| / ||W0 p_j||`, falling
    /// back to the absolute norm when `||W0 p_j|| = 0`.
    pub preservation_drops: Vec<f64>,
    /// Frobenius norm of `delta_w`.
    pub update_frobenius: f64,
    /// Targets excluded from the nullspace fit because they lie (numerically)
    /// inside the protected span. Kept in ascending index order.
    pub infeasible_targets: Vec<usize>,
    /// Targets whose resolved anchor is numerically zero relative to the
    /// target norm (the edit maps them to zero).
    pub degenerate_anchors: Vec<usize>,
    /// True when the least-squares normal matrix was rank-deficient and the
    /// solve fell back to the Moore–Penrose pseudoinverse.
    pub gram_pseudoinverse_fallback: bool,
}

impl DiagnosticsReport {
    /// Largest per-target erasure residual (0 when there are no targets).
    pub fn max_erasure_residual(&self) -> f64 {
        self.erasure_residuals.iter().fold(0.0_f64, |a, &b| a.max(b))
    }

    /// Largest per-column preservation drop (0 when nothing is preserved).
    pub fn max_preservation_drop(&self) -> f64 {
        self.preservation_drops.iter().fold(0.0_f64, |a, &b| a.max(b))
    }
}

/// Output of an edit: the update, the new weights, the anchors actually
/// used, and the diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct EditResult {
    delta_w: Matrix,
    w_new: Matrix,
    proxies: Matrix,
    diagnostics: DiagnosticsReport,
}

impl EditResult {
    pub(crate) fn assemble(
        w0: &Matrix,
        delta_w: Matrix,
        proxies: Matrix,
        diagnostics_builder: impl FnOnce(&Matrix, &Matrix) -> DiagnosticsReport,
    ) -> Self {
        // w_new is *defined* as this sum so the decomposition can be
        // re-verified exactly from serialized artifacts.
        let w_new = w0 + &delta_w;
        let diagnostics = diagnostics_builder(&delta_w, &w_new);
        Self {
            delta_w,
            w_new,
            proxies,
            diagnostics,
        }
    }

    /// Reassembles a result from stored artifacts (matrix files plus the
    /// diagnostics written next to them) so its certificates can be
    /// re-evaluated later, possibly by another process.
    ///
    /// Only shape consistency is checked here; whether the matrices still
    /// satisfy the claims in `diagnostics` is exactly what re-running the
    /// certificates decides, so no numerical relation is enforced.
    pub fn from_artifacts(
        delta_w: Matrix,
        w_new: Matrix,
        proxies: Matrix,
        diagnostics: DiagnosticsReport,
    ) -> Result<Self> {
        if delta_w.rows() != w_new.rows() || delta_w.cols() != w_new.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "delta_w is {}x{} but w_new is {}x{}",
                    delta_w.rows(),
                    delta_w.cols(),
                    w_new.rows(),
                    w_new.cols()
                ),
            });
        }
        if !proxies.is_empty() && proxies.rows() != delta_w.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "proxies live in R^{} but the update acts on R^{}",
                    proxies.rows(),
                    delta_w.cols()
                ),
            });
        }
        Ok(Self {
            delta_w,
            w_new,
            proxies,
            diagnostics,
        })
    }

    /// The weight update, `p x n`.
    pub fn delta_w(&self) -> &Matrix {
        &self.delta_w
    }

    /// Edited weights, constructed as `w0 + delta_w`.
    pub fn w_new(&self) -> &Matrix {
        &self.w_new
    }

    /// Anchor columns actually used, `n x T` (one per target, including
    /// infeasible ones).
    pub fn proxies(&self) -> &Matrix {
        &self.proxies
    }

    /// Numeric summary of the edit.
    pub fn diagnostics(&self) -> &DiagnosticsReport {
        &self.diagnostics
    }
}

/// Frobenius norm of the update — the quantity both routes minimize subject
/// to their respective constraints.
pub fn minimum_update_norm(result: &EditResult) -> f64 {
    result.delta_w.frobenius_norm()
}

/// Projects each target column onto the span of `safe_basis`, yielding the
/// anchor ("proxy") the erased concept is redirected to.
///
/// A numerically zero safe basis is rejected: projection onto nothing is
/// undefined. A target orthogonal to the safe span yields a zero proxy;
/// the editing routes flag that case in diagnostics rather than failing.
pub fn compute_proxy(c_tgt: &Matrix, safe_basis: &Matrix, tol: RankTolerance) -> Result<Matrix> {
    let svd = thin_svd(safe_basis, tol)?;
    if svd.numerical_rank() == 0 {
        return Err(Error::ZeroSafeBasis {
            sigma_max: svd.sigma_max(),
        });
    }
    orthogonal_project(safe_basis, c_tgt, tol)
}

/// Anchors resolved for a concrete edit, plus which of them degenerated.
pub(crate) struct ResolvedProxies {
    pub proxies: Matrix,
    pub degenerate: Vec<usize>,
}

/// Applies the anchor-resolution policy: explicit anchors win when present;
/// otherwise targets are projected onto the safe span. With
/// `project_explicit_anchors`, explicit anchors are themselves projected.
pub(crate) fn resolve_proxies(concepts: &ConceptSet, config: &EditConfig) -> Result<ResolvedProxies> {
    let anchors = concepts.anchors();
    let proxies = match (anchors.explicit_anchors(), anchors.safe_basis()) {
        (Some(a), None) => a.clone(),
        (Some(a), Some(s)) => {
            if config.project_explicit_anchors {
                compute_proxy(a, s, config.rank_tolerance)?
            } else {
                a.clone()
            }
        }
        (None, Some(s)) => compute_proxy(concepts.c_tgt(), s, config.rank_tolerance)?,
        (None, None) => unreachable!("AnchorSpec::new enforces at least one source"),
    };
    let mut degenerate = Vec::new();
    for i in 0..proxies.cols() {
        if proxies.column_norm(i) <= config.infeasible_threshold * concepts.c_tgt().column_norm(i) {
            degenerate.push(i);
        }
    }
    Ok(ResolvedProxies { proxies, degenerate })
}

/// Computes the per-target and per-preserved-column metrics shared by both
/// routes (see [`METRIC_NOTE`] for definitions).
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_diagnostics(
    method: Method,
    w0: &Matrix,
    delta_w: &Matrix,
    w_new: &Matrix,
    c_tgt: &Matrix,
    proxies: &Matrix,
    c_pres: &Matrix,
    preserved_rank: usize,
    truncation_k: Option<usize>,
    infeasible_targets: Vec<usize>,
    degenerate_anchors: Vec<usize>,
    gram_pseudoinverse_fallback: bool,
) -> DiagnosticsReport {
    let w0_m = w0.as_dmatrix();
    let w_new_m = w_new.as_dmatrix();
    let delta_m = delta_w.as_dmatrix();

    let mut erasure_residuals = Vec::with_capacity(c_tgt.cols());
    for i in 0..c_tgt.cols() {
        let c = DVector::from_vec(c_tgt.column(i));
        let a = DVector::from_vec(proxies.column(i));
        let achieved = w_new_m * &c;
        let wanted = w0_m * &a;
        erasure_residuals.push((achieved - &wanted).norm() / (wanted.norm() + 1.0));
    }

    let mut preservation_drops = Vec::with_capacity(c_pres.cols());
    for j in 0..c_pres.cols() {
        let p = DVector::from_vec(c_pres.column(j));
        let moved = (delta_m * &p).norm();
        let base = (w0_m * &p).norm();
        preservation_drops.push(if base > 0.0 { moved / base } else { moved });
    }

    DiagnosticsReport {
        method,
        preserved_rank,
        truncation_k,
        erasure_residuals,
        preservation_drops,
        update_frobenius: delta_w.frobenius_norm(),
        infeasible_targets,
        degenerate_anchors,
        gram_pseudoinverse_fallback,
    }
}

/// Runs the route selected by `config.method`.
pub fn edit(problem: &EditProblem, config: &EditConfig) -> Result<EditResult> {
    match config.method {
        Method::Uce => uce_edit(problem, config),
        Method::Dp => dp_edit(problem, config),
    }
}

/// Edits several weight matrices against one shared concept set.
///
/// Concept-side work (anchor resolution, decompositions of the preserved
/// set, feasibility decisions) is done once; each layer then reuses it.
/// Results are returned in input order and are identical to calling the
/// single-matrix entry points one layer at a time.
pub fn batch_edit(
    weights: &[Matrix],
    concepts: &ConceptSet,
    config: &EditConfig,
) -> Result<Vec<EditResult>> {
    config.validate()?;
    match config.method {
        Method::Uce => {
            let prepared = uce::prepare(concepts, config)?;
            weights
                .iter()
                .map(|w0| {
                    let w0 = validate_layer(w0, concepts)?;
                    uce::apply(&prepared, w0, concepts, config)
                })
                .collect()
        }
        Method::Dp => {
            let prepared = dp::prepare(concepts, config)?;
            weights
                .iter()
                .map(|w0| {
                    let w0 = validate_layer(w0, concepts)?;
                    dp::apply(&prepared, w0, concepts, config)
                })
                .collect()
        }
    }
}

fn validate_layer<'a>(w0: &'a Matrix, concepts: &ConceptSet) -> Result<&'a Matrix> {
    if w0.rows() == 0 {
        return Err(Error::DimensionMismatch {
            context: "weight matrix must have at least one row".into(),
        });
    }
    if w0.cols() != concepts.dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "weight matrix has {} input columns but embeddings live in R^{}",
                w0.cols(),
                concepts.dim()
            ),
        });
    }
    Ok(w0)
}

//! Error type shared by every module in this crate.
//!
//! All fallible operations return [`Error`] so callers (and the CLI) can map
//! failures onto stable categories: invalid input, degenerate geometry, and
//! certificate violations. Messages carry enough numeric context (indices,
//! norms, condition numbers) to diagnose a failure without a debugger.

use thiserror::Error;

/// Unified error type for matrix construction, decomposition, editing,
/// certification, and synthetic-problem generation.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix entry was NaN or infinite.
    #[error("matrix entry ({row}, {col}) is {value}; all entries must be finite")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },

    /// The flat entry buffer disagrees with the requested shape.
    #[error("entry buffer holds {got} values but a {rows}x{cols} matrix needs {expected}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    /// Operands have incompatible shapes for the requested operation.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A rank/pseudoinverse tolerance was zero, negative, or non-finite.
    #[error("rank tolerance must be a positive finite number, got {0}")]
    InvalidTolerance(f64),

    /// The iterative bidiagonal SVD failed to converge (pathological input).
    #[error("singular value decomposition did not converge for a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    /// A truncation level exceeded the numerical rank it truncates.
    #[error("truncation level k={k} exceeds the numerical rank {rank} of the preserved set")]
    TruncationOutOfRange { k: usize, rank: usize },

    /// The safe subspace used for proxy projection is numerically zero.
    #[error("safe basis is numerically zero (largest singular value {sigma_max:.3e}); proxy projection is undefined")]
    ZeroSafeBasis { sigma_max: f64 },

    /// An edit problem must contain at least one target column.
    #[error("edit problem has no target columns")]
    EmptyTargets,

    /// Target columns must be nonzero to define an erasure direction.
    #[error("target column {index} is numerically zero (norm {norm:.3e})")]
    ZeroTargetColumn { index: usize, norm: f64 },

    /// The anchor specification disagrees with the targets in shape.
    #[error("anchor specification invalid: {context}")]
    InvalidAnchors { context: String },

    /// Every target was excluded as infeasible, or a caller requested a
    /// quantity that needs at least one feasible target.
    #[error("all {count} target columns lie inside the preserved span; nothing can be erased without breaking preservation")]
    AllTargetsInfeasible { count: usize },

    /// The correlation matrix N = c c^T + C_pres C_pres^T is singular, so the
    /// perturbation certificate's N^{-1}-weighted geometry is undefined.
    #[error("correlation matrix N is numerically singular: rank {rank} of {dim}, condition estimate {cond:.3e}; the perturbation certificate requires invertible N")]
    SingularCorrelation { rank: usize, dim: usize, cond: f64 },

    /// Requested synthetic geometry cannot exist at the given dimensions.
    #[error("unreachable synthetic geometry: {0}")]
    UnreachableGeometry(String),

    /// A synthetic spec or sweep description failed validation.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A theorem certificate failed during a benchmark run. The offending
    /// problem is serialized as JSON so the failure can be replayed.
    #[error("certificate violation during benchmark: {detail}\nreplay instance:\n{instance_json}")]
    CertificateViolation {
        detail: String,
        instance_json: String,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

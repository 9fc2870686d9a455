//! Dense linear-algebra layer: validated matrices, rank-revealing SVD,
//! pseudoinverses, and orthonormal subspace constructions.
//!
//! Everything above this module (editing, certificates, benchmarks) treats
//! these primitives as the single source of truth for rank decisions and
//! orthogonality, so tolerances are threaded explicitly rather than baked
//! into call sites.

mod matrix;
mod subspace;
mod svd;

pub use matrix::Matrix;
pub use subspace::{
    complement_basis_topk, complement_basis_topk_from_svd, left_nullspace_basis,
    orthogonal_project, SubspaceBasis,
};
pub use svd::{pinv, singular_values, spectral_norm, thin_svd, RankTolerance, ThinSvd};

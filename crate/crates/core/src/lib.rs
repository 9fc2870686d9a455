//! Closed-form concept erasure for linear layers.
//!
//! Given a weight matrix `W0`, a set of target concept embeddings to erase,
//! and a set of embeddings whose behavior must survive, this crate computes
//! a replacement weight matrix in closed form — no training loop, no
//! gradients. Two editing routes are provided:
//!
//! * a least-squares edit that trades erasure against preservation through a
//!   regularized normal-equation solve, and
//! * a nullspace-constrained edit that confines the whole update to the
//!   orthogonal complement of the preserved span (optionally only its top-`k`
//!   spectral directions), making preservation exact rather than approximate.
//!
//! The [`theory`] module turns the guarantees of the nullspace route into
//! machine-checkable certificates, and [`bench`] generates synthetic
//! problems with controlled geometry to compare the two routes head-to-head.

pub mod bench;
pub mod erasure;
pub mod error;
pub mod linalg;
mod rng;
pub mod theory;

pub use error::{Error, Result};

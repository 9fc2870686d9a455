//! Seeded random sampling helpers shared by the synthetic generator, the
//! geometric demo, and certificate spot-checks.
//!
//! All randomness in this crate flows through a counter-based ChaCha stream
//! seeded explicitly by the caller, so identical seeds produce identical
//! problems on every platform. Draw order is part of the output contract:
//! matrices are filled column by column, each column top to bottom.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Standard-normal matrix scaled by `scale`, filled column-major.
pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let g: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * g;
        }
    }
    m
}

/// Standard-normal vector.
pub(crate) fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    let mut v = DVector::zeros(len);
    for i in 0..len {
        v[i] = rng.sample::<f64, _>(StandardNormal);
    }
    v
}

/// Uniformly random unit vector (normalized Gaussian; redraws the
/// astronomically unlikely zero sample).
pub(crate) fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, len);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

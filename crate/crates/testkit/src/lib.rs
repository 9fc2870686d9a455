//! Reference solvers and constructed instances for testing `nulledit-core`.
//!
//! Everything here recomputes quantities the production crate also computes,
//! but through deliberately different algorithms: singular values come from
//! a one-sided Jacobi iteration instead of bidiagonalization, linear systems
//! are solved by Gaussian elimination instead of spectral decomposition, and
//! the editing routes are evaluated from their defining equations with full
//! projector matrices instead of the factored forms the production code
//! uses. Agreement between the two sides is then evidence of correctness
//! rather than the same code agreeing with itself.
//!
//! This crate is test support only; it is never a dependency of shipped
//! code.

use nalgebra::{DMatrix, DVector};
use nulledit_core::linalg::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Maximum number of Jacobi sweeps before giving up. Cyclic Jacobi converges
/// quadratically once rotations get small; well before this cap in practice.
const MAX_JACOBI_SWEEPS: usize = 60;

/// Converts the public matrix type into a dense `nalgebra` matrix.
pub fn dense(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), &m.row_major_data())
}

/// Converts a dense `nalgebra` matrix into the public matrix type.
pub fn from_dense(m: &DMatrix<f64>) -> Matrix {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            data.push(m[(r, c)]);
        }
    }
    Matrix::from_row_major(m.nrows(), m.ncols(), data).expect("reference matrices stay finite")
}

/// Frobenius distance between `actual` and `reference`, relative to the
/// reference when the reference is large and absolute when it is small
/// (denominator `max(||reference||_F, 1)`).
pub fn rel_fro(actual: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    (actual - reference).norm() / reference.norm().max(1.0)
}

/// Draws a `rows x cols` matrix with independent standard normal entries.
pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Thin SVD via one-sided (Hestenes) Jacobi rotations.
///
/// Returns `(u, sigma, v)` with `a = u * diag(sigma) * v^T`, `sigma` sorted
/// descending, and `min(rows, cols)` columns in both factors. Columns of `u`
/// belonging to zero singular values are left as zero vectors; callers that
/// need them (none here) must re-orthonormalize.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    if rows < cols {
        let (u, sigma, v) = jacobi_svd(&a.transpose());
        return (v, sigma, u);
    }

    let mut g = a.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..rows {
                    let x = g[(r, i)];
                    let y = g[(r, j)];
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotation angle that zeroes the (i, j) entry of G^T G: the
                // stable root of t^2 + 2*zeta*t - 1 = 0.
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..rows {
                    let x = g[(r, i)];
                    let y = g[(r, j)];
                    g[(r, i)] = cs * x - sn * y;
                    g[(r, j)] = sn * x + cs * y;
                }
                for r in 0..cols {
                    let x = v[(r, i)];
                    let y = v[(r, j)];
                    v[(r, i)] = cs * x - sn * y;
                    v[(r, j)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|i| g.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("finite norms"));

    let mut u = DMatrix::<f64>::zeros(rows, cols);
    let mut v_sorted = DMatrix::<f64>::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (slot, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for r in 0..rows {
                u[(r, slot)] = g[(r, src)] / s;
            }
        }
        for r in 0..cols {
            v_sorted[(r, slot)] = v[(r, src)];
        }
    }
    (u, sigma, v_sorted)
}

/// Moore–Penrose pseudoinverse built on [`jacobi_svd`], cutting singular
/// values at `machine epsilon * max(rows, cols) * sigma_1` — the same rank
/// convention the production crate documents, reached through a different
/// factorization.
pub fn jacobi_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (u, sigma, v) = jacobi_svd(a);
    let cutoff =
        f64::EPSILON * a.nrows().max(a.ncols()) as f64 * sigma.first().copied().unwrap_or(0.0);
    let mut out = DMatrix::<f64>::zeros(a.ncols(), a.nrows());
    for (idx, &s) in sigma.iter().enumerate() {
        if s > cutoff {
            let vi = v.column(idx);
            let ui = u.column(idx);
            for r in 0..a.ncols() {
                for c in 0..a.nrows() {
                    out[(r, c)] += vi[r] * ui[c] / s;
                }
            }
        }
    }
    out
}

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-13 * max|a|`, i.e. when the
/// system is (numerically) singular.
pub fn gauss_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "coefficient matrix must be square");
    assert_eq!(b.nrows(), n, "right-hand side row count must match");
    let m = b.ncols();

    let mut aug = DMatrix::<f64>::zeros(n, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, m)).copy_from(b);
    let floor = 1e-13 * a.amax().max(f64::MIN_POSITIVE);

    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if aug[(r, col)].abs() > aug[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if aug[(pivot, col)].abs() <= floor {
            return None;
        }
        if pivot != col {
            aug.swap_rows(pivot, col);
        }
        let d = aug[(col, col)];
        for r in (col + 1)..n {
            let f = aug[(r, col)] / d;
            if f != 0.0 {
                for c in col..(n + m) {
                    aug[(r, c)] -= f * aug[(col, c)];
                }
            }
        }
    }

    let mut x = DMatrix::<f64>::zeros(n, m);
    for rhs in 0..m {
        for row in (0..n).rev() {
            let mut acc = aug[(row, n + rhs)];
            for c in (row + 1)..n {
                acc -= aug[(row, c)] * x[(c, rhs)];
            }
            x[(row, rhs)] = acc / aug[(row, row)];
        }
    }
    Some(x)
}

/// Reference solution of the least-squares route.
pub struct UceReference {
    /// Edited weights.
    pub w_new: Matrix,
    /// True when the normal matrix was singular and the minimum-distance
    /// pseudoinverse form was used.
    pub gram_fallback: bool,
}

/// Solves the least-squares route from its stationarity equations.
///
/// Builds the full normal matrix `G = C_tgt C_tgt^T + C_pres C_pres^T` and
/// right-hand side `V* C_tgt^T + W0 C_pres C_pres^T`, then solves `W G = RHS`
/// by Gaussian elimination. When `G` is singular the same anchored form the
/// production crate documents, `W = W0 + (RHS - W0 G) G^+`, is evaluated
/// with the Jacobi pseudoinverse.
///
/// `proxies` are the resolved anchor columns (one per target).
pub fn uce_reference(
    w0: &Matrix,
    c_tgt: &Matrix,
    proxies: &Matrix,
    c_pres: &Matrix,
) -> UceReference {
    let w0 = dense(w0);
    let tgt = dense(c_tgt);
    let a = dense(proxies);
    let pres = dense(c_pres);

    let v_star = &w0 * &a;
    let gram = &tgt * tgt.transpose() + &pres * pres.transpose();
    let rhs = &v_star * tgt.transpose() + &w0 * &pres * pres.transpose();

    match gauss_solve(&gram, &rhs.transpose()) {
        Some(wt) => UceReference {
            w_new: from_dense(&wt.transpose()),
            gram_fallback: false,
        },
        None => {
            let w = &w0 + (&rhs - &w0 * &gram) * jacobi_pinv(&gram);
            UceReference {
                w_new: from_dense(&w),
                gram_fallback: true,
            }
        }
    }
}

/// Reference solution of the nullspace-constrained route.
pub struct DpReference {
    /// Weight update.
    pub delta_w: Matrix,
    /// Indices of targets that entered the fit (complement of the
    /// infeasible set), ascending.
    pub kept: Vec<usize>,
}

/// Solves the nullspace-constrained route through explicit projectors.
///
/// The production crate computes `delta_w = B (U_2^T C_f)^+ U_2^T` from a
/// Householder-completed complement basis. Since `U_2` has orthonormal
/// columns, that expression equals `B (P C_f)^+` where `P = I - U_k U_k^T`
/// projects onto the unprotected complement — a form needing no basis
/// completion at all. The projector is built from the Jacobi factorization
/// of the preserved set; feasibility uses the same relative threshold on
/// `||P c_i||` (identical to `||U_2^T c_i||` by orthonormality).
pub fn dp_reference(
    w0: &Matrix,
    c_tgt: &Matrix,
    proxies: &Matrix,
    c_pres: &Matrix,
    truncation_k: Option<usize>,
    infeasible_threshold: f64,
) -> DpReference {
    let w0 = dense(w0);
    let tgt = dense(c_tgt);
    let a = dense(proxies);
    let pres = dense(c_pres);
    let n = tgt.nrows();

    let projector = if pres.ncols() == 0 {
        DMatrix::<f64>::identity(n, n)
    } else {
        let (u, sigma, _) = jacobi_svd(&pres);
        let cutoff = f64::EPSILON
            * pres.nrows().max(pres.ncols()) as f64
            * sigma.first().copied().unwrap_or(0.0);
        let rank = sigma.iter().filter(|&&s| s > cutoff).count();
        let k = truncation_k.unwrap_or(rank);
        let u_k = u.columns(0, k);
        DMatrix::<f64>::identity(n, n) - u_k * u_k.transpose()
    };

    let mut kept = Vec::new();
    for i in 0..tgt.ncols() {
        let c = tgt.column(i);
        if (&projector * c).norm() > infeasible_threshold * c.norm() {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return DpReference {
            delta_w: from_dense(&DMatrix::zeros(w0.nrows(), n)),
            kept,
        };
    }

    let c_f = tgt.select_columns(kept.iter());
    let a_f = a.select_columns(kept.iter());
    let b = &w0 * (&a_f - &c_f);
    let delta = &b * jacobi_pinv(&(&projector * c_f));
    DpReference {
        delta_w: from_dense(&delta),
        kept,
    }
}

/// A single-target problem whose designated preserved column realizes a
/// chosen correlation coefficient under the `N^{-1}` geometry.
pub struct LambdaInstance {
    /// Initial weights, `p x n`.
    pub w0: Matrix,
    /// Target column, `n x 1`.
    pub c: Matrix,
    /// Anchor column, `n x 1`.
    pub c_star: Matrix,
    /// Preserved columns, `n x (n + 1)`; column [`Self::designated`] is the
    /// engineered one, the rest span all of R^n.
    pub c_pres: Matrix,
    /// Index of the engineered column inside `c_pres`.
    pub designated: usize,
    /// Correlation coefficient that column realizes, in `(0, 1]`.
    pub lambda: f64,
}

/// Constructs an instance whose designated preserved column realizes the
/// requested coefficient `lambda = (p^T N^{-1} c) / (c^T N^{-1} c)` exactly
/// (up to rounding), with `N = c c^T + C_pres C_pres^T`.
///
/// A positive coefficient requires the target to lie inside the preserved
/// span (otherwise `N^{-1} c` is orthogonal to every preserved column), so
/// the base preserved block is a well-conditioned `n x n` frame. Writing
/// `M` for the correlation matrix without the designated column and choosing
/// `w` with `w^T M^{-1} c = 0` scaled to `w^T M^{-1} w = 1`, the column
/// `p = a c + w` realizes coefficient `a / 2` under the full `N`
/// (rank-one-update algebra), so `a = 2 lambda` hits the request.
pub fn lambda_instance(seed: u64, n: usize, p_rows: usize, lambda: f64) -> LambdaInstance {
    assert!(
        lambda > 0.0 && lambda <= 1.0,
        "coefficient must lie in (0, 1], got {lambda}"
    );
    assert!(n >= 2, "need at least two dimensions, got {n}");
    let mut rng = rand::SeedableRng::seed_from_u64(seed);

    let frame =
        DMatrix::<f64>::identity(n, n) + gaussian(&mut rng, n, n) * (0.3 / (n as f64).sqrt());
    let c_raw = gaussian(&mut rng, n, 1);
    let c = &c_raw / c_raw.norm();
    let m_mat = &c * c.transpose() + &frame * frame.transpose();

    let y_c = gauss_solve(&m_mat, &c).expect("frame keeps M well-conditioned");
    let alpha = (c.transpose() * &y_c)[(0, 0)];

    // Residual of a random draw against c in the M^{-1} inner product,
    // rescaled to unit M^{-1} norm. Redraw in the measure-zero case where
    // the draw is essentially parallel to c.
    let w = loop {
        let z = gaussian(&mut rng, n, 1);
        let w = &z - &c * ((z.transpose() * &y_c)[(0, 0)] / alpha);
        let y_w = gauss_solve(&m_mat, &w).expect("frame keeps M well-conditioned");
        let omega = (w.transpose() * &y_w)[(0, 0)];
        if omega > 1e-8 {
            break w / omega.sqrt();
        }
    };

    let p_col = &c * (2.0 * lambda) + &w;
    let mut c_pres = DMatrix::<f64>::zeros(n, n + 1);
    c_pres.column_mut(0).copy_from(&p_col);
    c_pres.view_mut((0, 1), (n, n)).copy_from(&frame);

    let w0 = gaussian(&mut rng, p_rows, n) / (n as f64).sqrt();
    let star_raw = gaussian(&mut rng, n, 1);
    let c_star = &star_raw / star_raw.norm();

    LambdaInstance {
        w0: from_dense(&w0),
        c: from_dense(&c.clone_owned()),
        c_star: from_dense(&c_star),
        c_pres: from_dense(&c_pres),
        designated: 0,
        lambda,
    }
}

/// Correlation coefficients `(p_j^T N^{-1} c) / (c^T N^{-1} c)` per
/// preserved column, computed by Gaussian elimination. `None` when
/// `N = c c^T + C_pres C_pres^T` is singular.
pub fn realized_lambdas(c: &Matrix, c_pres: &Matrix) -> Option<Vec<f64>> {
    let c = dense(c);
    let pres = dense(c_pres);
    let n_mat = &c * c.transpose() + &pres * pres.transpose();
    let y = gauss_solve(&n_mat, &c)?;
    let denom = (c.transpose() * &y)[(0, 0)];
    let y_vec = DVector::from_column_slice(y.column(0).as_slice());
    Some(
        (0..pres.ncols())
            .map(|j| pres.column(j).dot(&y_vec) / denom)
            .collect(),
    )
}

//! Cross-checks both editing routes against the reference solvers from
//! `nulledit-testkit`.
//!
//! The references recompute each route from its defining equations with
//! different algorithms (Gaussian elimination, Jacobi factorizations, full
//! projector matrices), so agreement here is two independent derivations
//! landing on the same matrix — not the implementation agreeing with
//! itself. A handful of instances small enough to solve by hand pin the
//! absolute values as well.

use nulledit_core::bench::{generate_problem, SpectrumProfile, SyntheticSpec};
use nulledit_core::erasure::{
    dp_edit, uce_edit, AnchorSpec, EditConfig, EditProblem, Method,
};
use nulledit_core::linalg::Matrix;
use nulledit_testkit::{dense, dp_reference, jacobi_pinv, rel_fro, uce_reference};

const AGREEMENT_TOL: f64 = 1e-8;

fn matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_major(rows, cols, data.to_vec()).unwrap()
}

fn uce_config() -> EditConfig {
    EditConfig {
        method: Method::Uce,
        ..EditConfig::default()
    }
}

/// Specs whose combined concept set spans all of R^n, making the normal
/// matrix invertible: the preserved set fills all but a few dimensions and
/// the targets' out-of-span components generically fill the rest.
fn full_rank_gram_specs() -> Vec<SyntheticSpec> {
    let mut specs = Vec::new();
    for (n, preserved, targets) in [(6, 5, 2), (8, 6, 3), (10, 7, 4), (12, 11, 3)] {
        for seed in 0..5 {
            specs.push(SyntheticSpec {
                n,
                p: n - 2,
                targets,
                preserved,
                cosine: 0.5,
                safe_dim: 3,
                spectrum: SpectrumProfile::Flat,
                seed: 1000 + seed + (n as u64) * 31,
            });
        }
    }
    specs
}

/// Typical wide-layer specs: far fewer concept columns than dimensions, so
/// the normal matrix is rank-deficient.
fn singular_gram_specs() -> Vec<SyntheticSpec> {
    let mut specs = Vec::new();
    for (n, preserved, targets) in [(12, 4, 1), (24, 8, 2), (32, 10, 3), (48, 6, 5)] {
        for seed in 0..5 {
            specs.push(SyntheticSpec {
                n,
                p: 16,
                targets,
                preserved,
                cosine: 0.4,
                safe_dim: 4,
                spectrum: SpectrumProfile::Flat,
                seed: 2000 + seed + (n as u64) * 17,
            });
        }
    }
    specs
}

#[test]
fn least_squares_route_matches_the_elimination_oracle_on_invertible_grams() {
    for spec in full_rank_gram_specs() {
        let problem = generate_problem(&spec).unwrap();
        let result = uce_edit(&problem, &uce_config()).unwrap();
        assert!(
            !result.diagnostics().gram_pseudoinverse_fallback,
            "spec {spec:?} was meant to produce an invertible normal matrix"
        );

        let reference = uce_reference(
            problem.w0(),
            problem.c_tgt(),
            result.proxies(),
            problem.c_pres(),
        );
        assert!(!reference.gram_fallback, "oracle saw a singular system for {spec:?}");
        let err = rel_fro(&dense(result.w_new()), &dense(&reference.w_new));
        assert!(
            err <= AGREEMENT_TOL,
            "least-squares route disagrees with elimination by {err:.3e} on {spec:?}"
        );
    }
}

#[test]
fn least_squares_route_matches_the_anchored_pseudoinverse_oracle_on_singular_grams() {
    for spec in singular_gram_specs() {
        let problem = generate_problem(&spec).unwrap();
        let result = uce_edit(&problem, &uce_config()).unwrap();
        assert!(
            result.diagnostics().gram_pseudoinverse_fallback,
            "spec {spec:?} was meant to produce a singular normal matrix"
        );

        let reference = uce_reference(
            problem.w0(),
            problem.c_tgt(),
            result.proxies(),
            problem.c_pres(),
        );
        assert!(reference.gram_fallback);
        let err = rel_fro(&dense(result.w_new()), &dense(&reference.w_new));
        assert!(
            err <= AGREEMENT_TOL,
            "least-squares fallback disagrees with the reference by {err:.3e} on {spec:?}"
        );
    }
}

#[test]
fn nullspace_route_matches_the_projector_oracle() {
    let mut specs = singular_gram_specs();
    specs.extend(full_rank_gram_specs());
    for spec in specs {
        let problem = generate_problem(&spec).unwrap();
        let config = EditConfig::default();
        let result = dp_edit(&problem, &config).unwrap();
        assert!(result.diagnostics().infeasible_targets.is_empty());

        let reference = dp_reference(
            problem.w0(),
            problem.c_tgt(),
            result.proxies(),
            problem.c_pres(),
            None,
            config.infeasible_threshold,
        );
        assert_eq!(reference.kept.len(), spec.targets);
        let err = rel_fro(&dense(result.delta_w()), &dense(&reference.delta_w));
        assert!(
            err <= AGREEMENT_TOL,
            "nullspace route disagrees with the projector oracle by {err:.3e} on {spec:?}"
        );
    }
}

#[test]
fn nullspace_route_matches_the_projector_oracle_under_truncation() {
    for seed in 0..8 {
        let spec = SyntheticSpec {
            n: 16,
            p: 12,
            targets: 3,
            preserved: 6,
            cosine: 0.6,
            safe_dim: 3,
            spectrum: SpectrumProfile::Decay { ratio: 0.5 },
            seed: 3000 + seed,
        };
        let problem = generate_problem(&spec).unwrap();
        for k in [0usize, 1, 3, 6] {
            let config = EditConfig {
                truncation_k: Some(k),
                ..EditConfig::default()
            };
            let result = dp_edit(&problem, &config).unwrap();
            let reference = dp_reference(
                problem.w0(),
                problem.c_tgt(),
                result.proxies(),
                problem.c_pres(),
                Some(k),
                config.infeasible_threshold,
            );
            let err = rel_fro(&dense(result.delta_w()), &dense(&reference.delta_w));
            assert!(
                err <= AGREEMENT_TOL,
                "truncated route (k = {k}) disagrees by {err:.3e} on seed {seed}"
            );
        }
    }
}

#[test]
fn single_feasible_target_is_fit_exactly() {
    for seed in 0..50 {
        let spec = SyntheticSpec {
            n: 8 + (seed as usize % 3) * 8,
            p: 10,
            targets: 1,
            preserved: 3 + (seed as usize % 4),
            cosine: 0.1 * (seed % 9) as f64,
            safe_dim: 2,
            spectrum: SpectrumProfile::Flat,
            seed: 4000 + seed,
        };
        let problem = generate_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();
        assert!(result.diagnostics().infeasible_targets.is_empty());

        let c = dense(problem.c_tgt());
        let wanted = dense(problem.w0()) * dense(result.proxies());
        let achieved = dense(result.w_new()) * c;
        let err = (achieved - &wanted).norm();
        assert!(
            err <= 1e-8 * (wanted.norm() + 1.0),
            "single-target fit misses by {err:.3e} on {spec:?}"
        );
    }
}

#[test]
fn empty_preserved_set_matches_the_minimum_norm_oracle() {
    for seed in 0..10 {
        let spec = SyntheticSpec {
            n: 16,
            p: 8,
            targets: 3,
            preserved: 0,
            cosine: 0.0,
            safe_dim: 3,
            spectrum: SpectrumProfile::Flat,
            seed: 5000 + seed,
        };
        let problem = generate_problem(&spec).unwrap();
        let config = EditConfig::default();
        let result = dp_edit(&problem, &config).unwrap();
        assert_eq!(result.diagnostics().preserved_rank, 0);

        let reference = dp_reference(
            problem.w0(),
            problem.c_tgt(),
            result.proxies(),
            problem.c_pres(),
            None,
            config.infeasible_threshold,
        );
        let err = rel_fro(&dense(result.delta_w()), &dense(&reference.delta_w));
        assert!(err <= AGREEMENT_TOL, "min-norm fit disagrees by {err:.3e}");

        // Minimum-norm solutions keep every update row inside the span of
        // the target columns.
        let delta = dense(result.delta_w());
        let tgt = dense(problem.c_tgt());
        let residual = &delta - &delta * &tgt * jacobi_pinv(&tgt);
        assert!(residual.norm() <= 1e-10 * delta.norm().max(1.0));
    }
}

#[test]
fn safe_basis_proxies_match_an_independent_projection() {
    for seed in 0..10 {
        let spec = SyntheticSpec {
            seed: 6000 + seed,
            ..SyntheticSpec::default()
        };
        let problem = generate_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();

        let safe = dense(problem.anchors().safe_basis().unwrap());
        let projector = &safe * jacobi_pinv(&safe);
        let expected = projector * dense(problem.c_tgt());
        let err = rel_fro(&dense(result.proxies()), &expected);
        assert!(err <= 1e-10, "proxy projection off by {err:.3e}");
    }
}

#[test]
fn infeasible_columns_are_excluded_by_both_route_and_oracle() {
    // Column 0 sits exactly inside the preserved span; column 1 points out
    // of it. The route must skip column 0, fit column 1, and agree with the
    // reference doing the same.
    let w0 = matrix(2, 3, &[1.0, 0.4, 0.0, 0.0, 1.0, 0.8]);
    let c_pres = matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let c_tgt = matrix(3, 2, &[0.6, 0.1, -0.8, 0.2, 0.0, 1.0]);
    let anchors = matrix(3, 2, &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5]);
    let problem = EditProblem::new(w0, c_tgt, c_pres, AnchorSpec::explicit(anchors)).unwrap();

    let config = EditConfig::default();
    let result = dp_edit(&problem, &config).unwrap();
    assert_eq!(result.diagnostics().infeasible_targets, vec![0]);

    let reference = dp_reference(
        problem.w0(),
        problem.c_tgt(),
        result.proxies(),
        problem.c_pres(),
        None,
        config.infeasible_threshold,
    );
    assert_eq!(reference.kept, vec![1]);
    let err = rel_fro(&dense(result.delta_w()), &dense(&reference.delta_w));
    assert!(err <= AGREEMENT_TOL);
}

#[test]
fn hand_solved_least_squares_instance_is_reproduced() {
    // n = 2, target e1 -> anchor e2, preserve p = (1, 1), W0 = I. The
    // normal matrix [[2, 1], [1, 1]] is invertible with inverse
    // [[1, -1], [-1, 2]]; carrying W = RHS G^{-1} through by hand gives
    // W = [[0, 1], [1, 0]], which interpolates both conditions exactly.
    let problem = EditProblem::new(
        Matrix::identity(2),
        matrix(2, 1, &[1.0, 0.0]),
        matrix(2, 1, &[1.0, 1.0]),
        AnchorSpec::explicit(matrix(2, 1, &[0.0, 1.0])),
    )
    .unwrap();
    let result = uce_edit(&problem, &uce_config()).unwrap();
    assert!(!result.diagnostics().gram_pseudoinverse_fallback);

    let expected = matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let err = (dense(result.w_new()) - dense(&expected)).norm();
    assert!(err <= 1e-12, "hand-solved instance off by {err:.3e}");
}

#[test]
fn hand_solved_singular_instance_is_reproduced() {
    // n = 2, target e1 -> anchor e2, nothing preserved, W0 = I. The normal
    // matrix e1 e1^T is singular; the anchored pseudoinverse form gives
    // W = [[0, 0], [1, 1]] by hand.
    let problem = EditProblem::new(
        Matrix::identity(2),
        matrix(2, 1, &[1.0, 0.0]),
        Matrix::zeros(2, 0),
        AnchorSpec::explicit(matrix(2, 1, &[0.0, 1.0])),
    )
    .unwrap();
    let result = uce_edit(&problem, &uce_config()).unwrap();
    assert!(result.diagnostics().gram_pseudoinverse_fallback);

    let expected = matrix(2, 2, &[0.0, 0.0, 1.0, 1.0]);
    let err = (dense(result.w_new()) - dense(&expected)).norm();
    assert!(err <= 1e-12, "hand-solved fallback instance off by {err:.3e}");

    // The erased direction lands on the anchor image while the rest of the
    // plane keeps its (rotated) behavior: e1 now maps to e2 exactly.
    let image = dense(result.w_new()) * dense(problem.c_tgt());
    assert!((image - dense(&matrix(2, 1, &[0.0, 1.0]))).norm() <= 1e-12);
}

//! Property-based tests of the editing routes' defining guarantees.
//!
//! The nullspace route must annihilate the protected span exactly and keep
//! its update rows inside the fitted span (minimum-norm characterization);
//! a single target must collapse to the rank-one special case. The
//! least-squares route must land on a stationary point of its objective,
//! and any perturbation with a visible footprint on the concept columns
//! must strictly raise that objective. Batch editing must be
//! indistinguishable from one edit at a time.

use nulledit_core::bench::{
    generate_in_span_problem, generate_problem, SpectrumProfile, SyntheticSpec,
};
use nulledit_core::erasure::{
    batch_edit, dp_edit, edit, uce_edit, AnchorSpec, EditConfig, EditProblem, Method,
};
use nulledit_core::linalg::{left_nullspace_basis, Matrix, RankTolerance};
use nulledit_testkit::dense;
use proptest::prelude::*;

const EXACTNESS_TOL: f64 = 1e-10;
const STATIONARITY_TOL: f64 = 1e-8;

fn matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_major(rows, cols, data.to_vec()).unwrap()
}

fn uce_config() -> EditConfig {
    EditConfig {
        method: Method::Uce,
        ..EditConfig::default()
    }
}

/// Random generator specs covering empty-to-large preserved sets, both
/// spectra, and the full feasible cosine range.
fn any_spec() -> impl Strategy<Value = SyntheticSpec> {
    (
        4usize..=24,
        2usize..=16,
        1usize..=4,
        0usize..=8,
        0usize..=8,
        1usize..=3,
        prop::bool::ANY,
        0u64..1_000_000,
    )
        .prop_map(
            |(n, p, targets, pres_raw, cos_decile, safe_dim, decay, seed)| {
                let preserved = pres_raw.min(n - 1);
                let cosine = if preserved == 0 {
                    0.0
                } else {
                    0.1 * cos_decile as f64
                };
                SyntheticSpec {
                    n,
                    p,
                    targets,
                    preserved,
                    cosine,
                    safe_dim,
                    spectrum: if decay {
                        SpectrumProfile::Decay { ratio: 0.6 }
                    } else {
                        SpectrumProfile::Flat
                    },
                    seed,
                }
            },
        )
}

/// Like [`any_spec`] but guaranteed to keep at least one preserved column.
fn preserving_spec() -> impl Strategy<Value = SyntheticSpec> {
    any_spec().prop_map(|mut spec| {
        spec.preserved = spec.preserved.max(1);
        spec
    })
}

/// The objective the least-squares route minimizes: squared misfit of the
/// interpolation conditions over targets and preserved columns.
fn ls_objective(w: &Matrix, problem: &EditProblem, proxies: &Matrix) -> f64 {
    let wanted_tgt = problem.w0() * proxies;
    let tgt_gap = &(w * problem.c_tgt()) - &wanted_tgt;
    let wanted_pres = problem.w0() * problem.c_pres();
    let pres_gap = &(w * problem.c_pres()) - &wanted_pres;
    tgt_gap.frobenius_norm().powi(2) + pres_gap.frobenius_norm().powi(2)
}

/// `W G - RHS` for the least-squares normal equations, whose norm measures
/// stationarity.
fn normal_equation_gap(w: &Matrix, problem: &EditProblem, proxies: &Matrix) -> (Matrix, f64) {
    let c_tgt = problem.c_tgt();
    let c_pres = problem.c_pres();
    let gram = &(c_tgt * &c_tgt.transpose()) + &(c_pres * &c_pres.transpose());
    let rhs = problem.w0() * &(&(proxies * &c_tgt.transpose()) + &(c_pres * &c_pres.transpose()));
    let gap = &(w * &gram) - &rhs;
    let rhs_norm = rhs.frobenius_norm();
    (gap, rhs_norm)
}

proptest! {
    /// Protected columns pass through a nullspace edit untouched: the update
    /// annihilates every preserved column and every sampled combination of
    /// them.
    #[test]
    fn nullspace_edits_annihilate_the_protected_span(spec in any_spec()) {
        let problem = generate_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();
        let delta = result.delta_w();
        let scale = delta.frobenius_norm();

        for j in 0..problem.c_pres().cols() {
            let p = problem.c_pres().select_columns(&[j]);
            let hit = (delta * &p).frobenius_norm();
            prop_assert!(
                hit <= EXACTNESS_TOL * (scale * problem.c_pres().column_norm(j)).max(1e-300),
                "preserved column {j} moved by {hit:.3e} (update norm {scale:.3e})"
            );
        }

        // Arbitrary in-span vectors are annihilated too, not just the basis
        // the edit saw. Probe with two fixed coefficient patterns; skip
        // combinations that nearly cancel (their direction is dominated by
        // rounding of the combination itself, not by the edit).
        let m = problem.c_pres().cols();
        if m > 0 {
            let column_scale = (0..m)
                .map(|j| problem.c_pres().column_norm(j))
                .fold(0.0_f64, f64::max);
            for pattern in [
                vec![1.0; m],
                (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
            ] {
                let z = Matrix::from_row_major(m, 1, pattern).unwrap();
                let v = problem.c_pres() * &z;
                let v_norm = v.frobenius_norm();
                if v_norm <= 1e-6 * column_scale {
                    continue;
                }
                let hit = (delta * &v).frobenius_norm();
                prop_assert!(
                    hit <= EXACTNESS_TOL * (v_norm * scale).max(1e-300),
                    "in-span probe moved by {hit:.3e}"
                );
            }
        }
    }

    /// With one target the general fit collapses to the rank-one formula
    /// `B x^T U2^T / ||x||^2` with `x = U2^T c`.
    #[test]
    fn a_single_target_reduces_to_the_rank_one_formula(spec in any_spec()) {
        let spec = SyntheticSpec { targets: 1, ..spec };
        let problem = generate_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();
        prop_assert!(result.diagnostics().infeasible_targets.is_empty());

        let u2 = left_nullspace_basis(problem.c_pres(), RankTolerance::Default).unwrap();
        let x = &u2.basis().transpose() * problem.c_tgt();
        let x_norm_sq = x.frobenius_norm().powi(2);
        prop_assume!(x_norm_sq > 0.0);

        let b = problem.w0() * &(result.proxies() - problem.c_tgt());
        let rank_one = (&(&b * &x.transpose()) * &u2.basis().transpose())
            .scale(1.0 / x_norm_sq)
            .unwrap();

        let gap = (result.delta_w() - &rank_one).frobenius_norm();
        let scale = rank_one.frobenius_norm().max(1.0);
        prop_assert!(
            gap <= 1e-12 * scale,
            "general solve differs from the rank-one formula by {gap:.3e}"
        );
    }

    /// Minimum-norm characterization: expressed in the free-directions
    /// coordinates, every update row lies in the span actually needed to
    /// interpolate the targets.
    #[test]
    fn update_rows_stay_inside_the_fitted_span(spec in any_spec()) {
        let problem = generate_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();
        prop_assert!(result.diagnostics().infeasible_targets.is_empty());

        let u2 = left_nullspace_basis(problem.c_pres(), RankTolerance::Default).unwrap();
        let z = result.delta_w() * u2.basis();
        let m = &u2.basis().transpose() * problem.c_tgt();
        let fitted = nulledit_core::linalg::thin_svd(&m, RankTolerance::Default).unwrap();
        let u_q = fitted.u();

        let residual = &z - &(&(&z * u_q) * &u_q.transpose());
        let gap = residual.frobenius_norm();
        prop_assert!(
            gap <= EXACTNESS_TOL * z.frobenius_norm().max(1.0),
            "update has {gap:.3e} of mass outside the fitted span"
        );
    }

    /// The least-squares route lands on a stationary point of its objective:
    /// the normal-equation residual vanishes relative to the data.
    #[test]
    fn least_squares_solutions_are_stationary(spec in any_spec()) {
        let problem = generate_problem(&spec).unwrap();
        let result = uce_edit(&problem, &uce_config()).unwrap();
        let (gap, rhs_norm) = normal_equation_gap(result.w_new(), &problem, result.proxies());
        let gap_norm = gap.frobenius_norm();
        prop_assert!(
            gap_norm <= STATIONARITY_TOL * (rhs_norm + 1.0),
            "normal equations violated by {gap_norm:.3e} (rhs norm {rhs_norm:.3e})"
        );
    }

    /// Strict local optimality: any perturbation that touches the concept
    /// columns raises the least-squares objective by (at least, up to the
    /// stationarity residual) its own squared footprint.
    #[test]
    fn perturbing_a_least_squares_solution_raises_the_objective(
        (spec, d_data) in any_spec().prop_flat_map(|spec| {
            let len = spec.p * spec.n;
            (Just(spec), prop::collection::vec(-1.0f64..1.0, len))
        })
    ) {
        let problem = generate_problem(&spec).unwrap();
        let result = uce_edit(&problem, &uce_config()).unwrap();
        let w = result.w_new();
        let proxies = result.proxies();

        let d = Matrix::from_row_major(spec.p, spec.n, d_data)
            .unwrap()
            .scale(0.1)
            .unwrap();
        let footprint = (&d * problem.c_tgt()).frobenius_norm().powi(2)
            + (&d * problem.c_pres()).frobenius_norm().powi(2);

        let base = ls_objective(w, &problem, proxies);
        let moved = ls_objective(&(w + &d), &problem, proxies);
        let increase = moved - base;

        // Exact expansion: increase = 2 tr(D^T (WG - RHS)) + footprint.
        // Cauchy-Schwarz turns the cross term into a computable slack.
        let (gap, _) = normal_equation_gap(w, &problem, proxies);
        let slack = 2.0 * d.frobenius_norm() * gap.frobenius_norm() + 1e-9 * (base + 1.0);
        prop_assert!(
            increase >= footprint - slack,
            "objective rose by {increase:.3e}, expected at least {:.3e}",
            footprint - slack
        );
        if footprint >= 1e-6 {
            prop_assert!(increase > 0.0, "visible perturbation did not raise the objective");
        }
    }

    /// In-span targets are excluded and reported, and with every target
    /// in-span the edit is a no-op.
    #[test]
    fn fully_in_span_problems_produce_a_reported_no_op(spec in preserving_spec()) {
        let problem = generate_in_span_problem(&spec).unwrap();
        let result = dp_edit(&problem, &EditConfig::default()).unwrap();

        let all: Vec<usize> = (0..spec.targets).collect();
        prop_assert_eq!(&result.diagnostics().infeasible_targets, &all);
        prop_assert_eq!(result.delta_w().max_abs(), 0.0);
        prop_assert_eq!(dense(result.w_new()), dense(problem.w0()));
    }
}

#[test]
fn batch_editing_matches_one_edit_at_a_time() {
    for (method, seed) in [
        (Method::Dp, 7001),
        (Method::Dp, 7002),
        (Method::Uce, 7003),
        (Method::Uce, 7004),
    ] {
        let spec = SyntheticSpec {
            n: 12,
            p: 9,
            targets: 2,
            preserved: 5,
            cosine: 0.4,
            safe_dim: 3,
            spectrum: SpectrumProfile::Flat,
            seed,
        };
        let problem = generate_problem(&spec).unwrap();
        let concepts = problem.concepts().clone();
        let config = EditConfig {
            method,
            ..EditConfig::default()
        };

        // Three layers of different heights sharing one concept set.
        let weights = vec![
            problem.w0().clone(),
            problem.w0().scale(-0.5).unwrap(),
            Matrix::from_fn(4, spec.n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.25 - 0.5).unwrap(),
        ];

        let batched = batch_edit(&weights, &concepts, &config).unwrap();
        assert_eq!(batched.len(), weights.len());

        for (w0, from_batch) in weights.iter().zip(&batched) {
            let single = edit(
                &EditProblem::from_concepts(w0.clone(), concepts.clone()).unwrap(),
                &config,
            )
            .unwrap();
            assert_eq!(from_batch.delta_w(), single.delta_w(), "delta diverged ({method:?})");
            assert_eq!(from_batch.w_new(), single.w_new(), "result diverged ({method:?})");
            assert_eq!(from_batch.proxies(), single.proxies(), "proxies diverged ({method:?})");
            let a = serde_json::to_string(from_batch.diagnostics()).unwrap();
            let b = serde_json::to_string(single.diagnostics()).unwrap();
            assert_eq!(a, b, "diagnostics diverged ({method:?})");
        }
    }
}

#[test]
fn degenerate_anchors_are_flagged_and_map_their_target_to_zero() {
    // The safe space (e1) is orthogonal to the target (e3), so the proxy
    // anchor collapses to zero: the edit must flag it and send the target's
    // image to zero while leaving the preserved direction (e2) alone.
    let w0 = matrix(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 4.0]);
    let c_tgt = matrix(3, 1, &[0.0, 0.0, 1.0]);
    let c_pres = matrix(3, 1, &[0.0, 1.0, 0.0]);
    let safe = matrix(3, 1, &[1.0, 0.0, 0.0]);
    let problem =
        EditProblem::new(w0, c_tgt, c_pres, AnchorSpec::from_safe_basis(safe)).unwrap();

    for config in [EditConfig::default(), uce_config()] {
        let result = edit(&problem, &config).unwrap();
        assert_eq!(result.diagnostics().degenerate_anchors, vec![0]);
        assert_eq!(result.proxies().max_abs(), 0.0);

        let image = result.w_new() * problem.c_tgt();
        assert!(
            image.frobenius_norm() <= 1e-10,
            "degenerate-anchor target still has image norm {:.3e}",
            image.frobenius_norm()
        );
        let kept = result.w_new() * problem.c_pres();
        let wanted = problem.w0() * problem.c_pres();
        assert!((&kept - &wanted).frobenius_norm() <= 1e-10);
    }
}

//! Machine-checkable certificates for the guarantees of the editing routes.
//!
//! Every guarantee this crate advertises is re-measured on finished
//! artifacts rather than trusted:
//!
//! * [`certify_perturbation`] — the least-squares route's unavoidable damage
//!   to correlated preserved directions (a lower bound, with collinearity).
//! * [`certify_preservation`] — exact preservation under the untruncated
//!   nullspace route.
//! * [`certify_truncation`] — the spectral-decay cap on preserved damage and
//!   the erasure floor under truncated nullspace edits.
//! * [`geometric_least_squares_demo`] — a staged scene showing the two
//!   routes diverge exactly as the target/preserve correlation grows.
//!
//! [`certificates_for`] bundles whichever certificates apply to a given
//! result, so pipelines can demand `bundle.all_pass()` before shipping an
//! edited weight matrix.

mod demo;
mod perturbation;
mod preservation;
mod truncation;

pub use demo::{geometric_least_squares_demo, GeometricDemoPoint, GeometricDemoReport};
pub use perturbation::{
    certify_perturbation, PerturbationCertificate, COLLINEARITY_TOL, PERTURBATION_SLACK,
};
pub use preservation::{certify_preservation, PreservationReport, PRESERVATION_REL_TOL};
pub use truncation::{
    certify_truncation, TruncationCertificate, DEFAULT_KERNEL_TOL, IDENTITY_REL_TOL,
    TRUNCATION_SLACK,
};

use serde::{Deserialize, Serialize};

use crate::erasure::{EditProblem, EditResult, Method};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RankTolerance};

/// Outcome of attempting the perturbation certificate: some edits simply do
/// not admit it (multiple targets, or a singular correlation matrix), which
/// is a property of the problem, not a failure of the edit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationOutcome {
    Certificate(PerturbationCertificate),
    NotApplicable { reason: String },
}

/// The certificates applicable to one edit result.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CertificateBundle {
    /// Exact-preservation check (untruncated nullspace route only).
    pub preservation: Option<PreservationReport>,
    /// Truncation trade-off bounds (any nullspace-route edit).
    pub truncation: Option<TruncationCertificate>,
    /// Perturbation lower bound (single-target least-squares edits).
    pub perturbation: Option<PerturbationOutcome>,
}

impl CertificateBundle {
    /// True when every attached certificate passed (inapplicable
    /// certificates are vacuously fine).
    pub fn all_pass(&self) -> bool {
        let preservation_ok = self.preservation.as_ref().is_none_or(|r| r.passed);
        let truncation_ok = self.truncation.as_ref().is_none_or(|c| c.passed());
        let perturbation_ok = match &self.perturbation {
            Some(PerturbationOutcome::Certificate(c)) => c.all_satisfied,
            Some(PerturbationOutcome::NotApplicable { .. }) | None => true,
        };
        preservation_ok && truncation_ok && perturbation_ok
    }
}

/// Evaluates every certificate that applies to `result`.
///
/// * Nullspace-route results get the truncation certificate, plus the
///   exact-preservation check when nothing was truncated.
/// * Single-target least-squares results get the perturbation certificate;
///   a singular correlation matrix downgrades it to "not applicable" with
///   the reported condition, since that is a property of the data.
pub fn certificates_for(
    problem: &EditProblem,
    result: &EditResult,
    tol: RankTolerance,
    kernel_tol: f64,
) -> Result<CertificateBundle> {
    let mut bundle = CertificateBundle::default();
    match result.diagnostics().method {
        Method::Dp => {
            let cert = certify_truncation(problem, result, tol, kernel_tol)?;
            let fully_protected = cert.k == cert.preserved_rank;
            bundle.truncation = Some(cert);
            if fully_protected {
                bundle.preservation = Some(certify_preservation(result, problem.c_pres())?);
            }
        }
        Method::Uce => {
            bundle.perturbation = Some(if problem.c_tgt().cols() == 1 {
                let c = single_column(problem.c_tgt(), 0);
                let c_star = single_column(result.proxies(), 0);
                match certify_perturbation(problem.w0(), &c, &c_star, problem.c_pres(), tol) {
                    Ok(cert) => PerturbationOutcome::Certificate(cert),
                    Err(err @ Error::SingularCorrelation { .. }) => {
                        PerturbationOutcome::NotApplicable {
                            reason: err.to_string(),
                        }
                    }
                    Err(other) => return Err(other),
                }
            } else {
                PerturbationOutcome::NotApplicable {
                    reason: format!(
                        "perturbation certificate covers single-target edits; this edit has {} targets",
                        problem.c_tgt().cols()
                    ),
                }
            });
        }
    }
    Ok(bundle)
}

fn single_column(m: &Matrix, j: usize) -> Matrix {
    m.select_columns(&[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::{edit, AnchorSpec, EditConfig};

    fn matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_major(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn bundle_for_nullspace_route_includes_preservation_and_truncation() {
        let problem = EditProblem::new(
            matrix(2, 3, &[1.0, 0.2, 0.0, 0.0, 1.0, 0.4]),
            matrix(3, 1, &[0.1, 1.0, 0.0]),
            matrix(3, 1, &[1.0, 0.0, 0.0]),
            AnchorSpec::explicit(matrix(3, 1, &[0.0, 0.0, 1.0])),
        )
        .unwrap();
        let result = edit(&problem, &EditConfig::default()).unwrap();
        let bundle =
            certificates_for(&problem, &result, RankTolerance::Default, DEFAULT_KERNEL_TOL)
                .unwrap();
        assert!(bundle.preservation.is_some());
        assert!(bundle.truncation.is_some());
        assert!(bundle.perturbation.is_none());
        assert!(bundle.all_pass());
    }

    #[test]
    fn truncated_edit_omits_the_exactness_certificate() {
        let problem = EditProblem::new(
            Matrix::identity(3),
            matrix(3, 1, &[0.0, 0.5, 1.0]),
            matrix(3, 2, &[2.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            AnchorSpec::explicit(matrix(3, 1, &[0.0, 0.0, 0.0])),
        )
        .unwrap();
        let config = EditConfig {
            truncation_k: Some(1),
            ..EditConfig::default()
        };
        let result = edit(&problem, &config).unwrap();
        let bundle =
            certificates_for(&problem, &result, RankTolerance::Default, DEFAULT_KERNEL_TOL)
                .unwrap();
        assert!(bundle.preservation.is_none());
        assert!(bundle.truncation.is_some());
        assert!(bundle.all_pass());
    }

    #[test]
    fn uce_bundle_downgrades_gracefully_on_singular_correlation() {
        use crate::erasure::Method;
        // One preserved column in R^3: N = c c^T + p p^T has rank 2.
        let problem = EditProblem::new(
            Matrix::identity(3),
            matrix(3, 1, &[1.0, 0.0, 0.0]),
            matrix(3, 1, &[0.0, 1.0, 0.0]),
            AnchorSpec::explicit(matrix(3, 1, &[0.0, 0.0, 1.0])),
        )
        .unwrap();
        let config = EditConfig {
            method: Method::Uce,
            ..EditConfig::default()
        };
        let result = edit(&problem, &config).unwrap();
        let bundle =
            certificates_for(&problem, &result, RankTolerance::Default, DEFAULT_KERNEL_TOL)
                .unwrap();
        match bundle.perturbation {
            Some(PerturbationOutcome::NotApplicable { ref reason }) => {
                assert!(reason.contains("singular"), "reason: {reason}");
            }
            ref other => panic!("expected NotApplicable, got {other:?}"),
        }
        assert!(bundle.all_pass());
    }

    #[test]
    fn uce_bundle_certifies_when_correlation_is_invertible() {
        use crate::erasure::Method;
        // Preserved columns span the whole space and the target sits inside
        // their span (c = 0.8 p1 + 0.5 p2), so the realized lambdas are
        // genuinely positive: hand computation gives 0.8/0.89 and 0.5/0.89.
        let problem = EditProblem::new(
            matrix(2, 2, &[1.0, 0.3, -0.2, 1.0]),
            matrix(2, 1, &[0.95, 0.5]),
            matrix(2, 2, &[1.0, 0.3, 0.0, 1.0]),
            AnchorSpec::explicit(matrix(2, 1, &[0.0, 1.0])),
        )
        .unwrap();
        let config = EditConfig {
            method: Method::Uce,
            ..EditConfig::default()
        };
        let result = edit(&problem, &config).unwrap();
        let bundle =
            certificates_for(&problem, &result, RankTolerance::Default, DEFAULT_KERNEL_TOL)
                .unwrap();
        match bundle.perturbation {
            Some(PerturbationOutcome::Certificate(ref cert)) => {
                assert!(cert.all_satisfied);
                assert!((cert.lambdas[0] - 0.8 / 0.89).abs() <= 1e-10);
                assert!((cert.lambdas[1] - 0.5 / 0.89).abs() <= 1e-10);
            }
            ref other => panic!("expected a certificate, got {other:?}"),
        }
        assert!(bundle.all_pass());
    }
}

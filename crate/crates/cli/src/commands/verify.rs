//! `nulledit verify`: recompute a finished edit's certificates from its
//! stored matrices.
//!
//! Verification trusts nothing numerical in `diagnostics.json`: it reloads
//! the matrices and re-derives every certificate. The stored diagnostics
//! only tell it *which* claims to check (method, truncation level,
//! configuration). Three kinds of checks run per layer:
//!
//! * the certificate bundle (exact preservation, spectral truncation
//!   bounds, correlation bounds — whichever apply to the stored method);
//! * the decomposition identity `w_new = w0 + delta_w`, which holds bit
//!   for bit for untampered artifacts because the format stores exact
//!   floats;
//! * for least-squares edits, stationarity of the normal equations — the
//!   property that route promises in place of exact preservation.

use std::path::PathBuf;

use clap::Args;

use nulledit_core::erasure::{AnchorSpec, EditProblem, EditResult, Method};
use nulledit_core::linalg::Matrix;
use nulledit_core::theory::{certificates_for, PerturbationOutcome, DEFAULT_KERNEL_TOL};

use crate::error::{CliError, Result, EXIT_VERIFY_FAILED};
use crate::manifest::SCHEMA;
use crate::records::{EditRecord, DIAGNOSTICS_FILE};
use crate::{artifact, matfile};

/// Residual ceiling for the stationarity re-check of least-squares edits.
const STATIONARITY_TOL: f64 = 1e-8;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Edit directory produced by `nulledit edit`.
    pub dir: PathBuf,
}

pub fn run(args: &VerifyArgs) -> Result<i32> {
    let record_path = args.dir.join(DIAGNOSTICS_FILE);
    let record: EditRecord = serde_json::from_str(&artifact::read_text(&record_path)?)
        .map_err(|e| CliError::Manifest {
            path: record_path.clone(),
            detail: e.to_string(),
        })?;
    if record.schema != SCHEMA {
        return Err(CliError::Manifest {
            path: record_path,
            detail: format!("schema {:?} is not supported; expected {SCHEMA:?}", record.schema),
        });
    }

    let read = |name: &str| matfile::read(&args.dir.join(name));
    let c_tgt = read(&record.inputs.c_tgt)?;
    let c_pres = read(&record.inputs.c_pres)?;
    let explicit = record.inputs.c_star.as_deref().map(read).transpose()?;
    let safe = record.inputs.safe_basis.as_deref().map(read).transpose()?;
    let anchors = AnchorSpec::new(explicit, safe)?;
    let proxies = read(&record.proxies)?;
    if proxies.cols() != c_tgt.cols() || proxies.rows() != c_tgt.rows() {
        return Err(CliError::MatrixFormat {
            path: args.dir.join(&record.proxies),
            detail: format!(
                "proxies are {}x{} but the target set is {}x{}",
                proxies.rows(),
                proxies.cols(),
                c_tgt.rows(),
                c_tgt.cols()
            ),
        });
    }

    let mut all_ok = true;
    for layer in &record.layers {
        let w0 = read(&layer.w0)?;
        let delta_w = read(&layer.delta_w)?;
        let w_new = read(&layer.w_new)?;

        let problem = EditProblem::new(
            w0.clone(),
            c_tgt.clone(),
            c_pres.clone(),
            anchors.clone(),
        )?;
        let result = EditResult::from_artifacts(
            delta_w,
            w_new,
            proxies.clone(),
            layer.diagnostics.clone(),
        )?;

        let mut layer_ok = true;
        let mut check = |name: &str, passed: bool, detail: String| {
            println!(
                "layer {} {name}: {} ({detail})",
                layer.index,
                if passed { "PASS" } else { "FAIL" }
            );
            layer_ok &= passed;
        };

        // The stored decomposition must reproduce exactly: the format is
        // bit-exact and w_new was *defined* as w0 + delta_w.
        let recomposed = &w0 + result.delta_w();
        let gap = (&recomposed - result.w_new()).max_abs();
        check("decomposition", gap == 0.0, format!("max |w0 + delta_w - w_new| = {gap:.3e}"));

        let bundle = certificates_for(
            &problem,
            &result,
            record.config.rank_tolerance,
            DEFAULT_KERNEL_TOL,
        )?;
        if let Some(preservation) = &bundle.preservation {
            check(
                "preservation",
                preservation.passed,
                format!("max column drop {:.3e}", preservation.max_column_drop),
            );
        }
        if let Some(truncation) = &bundle.truncation {
            check(
                "truncation",
                truncation.passed(),
                format!(
                    "k={} of rank {}, identity residual {:.3e}",
                    truncation.k, truncation.preserved_rank, truncation.identity_relative_residual
                ),
            );
        }
        match &bundle.perturbation {
            Some(PerturbationOutcome::Certificate(cert)) => check(
                "correlation-bounds",
                cert.all_satisfied,
                format!("{} preserved columns", cert.lambdas.len()),
            ),
            Some(PerturbationOutcome::NotApplicable { reason }) => {
                println!("layer {} correlation-bounds: NOT APPLICABLE ({reason})", layer.index);
            }
            None => {}
        }

        if record.config.method == Method::Uce {
            let (residual, scale) = stationarity_gap(&w0, result.w_new(), &c_tgt, &c_pres, &proxies);
            check(
                "stationarity",
                residual <= STATIONARITY_TOL * scale,
                format!("normal-equation residual {residual:.3e}, ceiling {:.3e}", STATIONARITY_TOL * scale),
            );
        }

        all_ok &= layer_ok;
    }

    if all_ok {
        println!("all certificates hold ({} layer(s))", record.layers.len());
        Ok(0)
    } else {
        println!("verification FAILED");
        Ok(EXIT_VERIFY_FAILED)
    }
}

/// Residual of the least-squares normal equations at the stored solution:
/// `||w_new G - rhs||_F` with `G` the concept Gram sum and `rhs` built from
/// the stored anchors, plus the scale `||rhs||_F + 1` it is judged
/// against. Holds (to rounding) for the minimum-norm solution even when
/// `G` is singular.
fn stationarity_gap(
    w0: &Matrix,
    w_new: &Matrix,
    c_tgt: &Matrix,
    c_pres: &Matrix,
    proxies: &Matrix,
) -> (f64, f64) {
    let pres_gram = c_pres * &c_pres.transpose();
    let gram = &(c_tgt * &c_tgt.transpose()) + &pres_gram;
    let rhs = w0 * &(&(proxies * &c_tgt.transpose()) + &pres_gram);
    let gap = (&(w_new * &gram) - &rhs).frobenius_norm();
    (gap, rhs.frobenius_norm() + 1.0)
}

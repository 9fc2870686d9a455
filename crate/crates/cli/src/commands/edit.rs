//! `nulledit edit`: apply a manifest-described concept edit and write a
//! self-contained artifact directory.

use std::path::{Path, PathBuf};

use clap::Args;

use nulledit_core::erasure::{batch_edit, EditConfig, EditProblem, Method};
use nulledit_core::theory::{certificates_for, DEFAULT_KERNEL_TOL};

use crate::commands::resolve_rank_tolerance;
use crate::error::{Result, EXIT_PARTIAL};
use crate::manifest::{self, ManifestConfig};
use crate::records::{EditRecord, InputFiles, LayerRecord, SkipRecord, DIAGNOSTICS_FILE};
use crate::{artifact, npy};

#[derive(Args, Debug)]
pub struct EditArgs {
    /// Problem manifest (JSON).
    pub manifest: PathBuf,
    /// Directory to write artifacts into.
    #[arg(long)]
    pub out: PathBuf,
    /// Editing route: "dp" (nullspace) or "uce" (least-squares).
    /// Overrides the manifest.
    #[arg(long)]
    pub method: Option<String>,
    /// Protect only the top-k spectral directions of the preserved set
    /// (nullspace route). Overrides the manifest.
    #[arg(long)]
    pub truncation_k: Option<usize>,
    /// Relative rank tolerance. Overrides the manifest and the
    /// environment.
    #[arg(long)]
    pub rank_tolerance: Option<f64>,
    /// Relative size below which a target counts as inside the preserved
    /// span (and is skipped). Overrides the manifest.
    #[arg(long)]
    pub infeasible_threshold: Option<f64>,
    /// Project explicit anchors onto the safe span when both are present.
    #[arg(long)]
    pub project_anchors: bool,
}

/// Folds flags over the manifest's config block (flag > manifest >
/// environment > default, per knob).
fn resolve_config(args: &EditArgs, from_manifest: &ManifestConfig) -> Result<EditConfig> {
    let method = match args.method.as_deref() {
        Some(text) => text.parse::<Method>()?,
        None => from_manifest.method.unwrap_or(Method::Dp),
    };
    let defaults = EditConfig::default();
    let config = EditConfig {
        method,
        truncation_k: args.truncation_k.or(from_manifest.truncation_k),
        rank_tolerance: resolve_rank_tolerance(
            args.rank_tolerance,
            from_manifest.rank_tolerance,
        )?,
        infeasible_threshold: args
            .infeasible_threshold
            .or(from_manifest.infeasible_threshold)
            .unwrap_or(defaults.infeasible_threshold),
        project_explicit_anchors: args.project_anchors
            || from_manifest.project_explicit_anchors.unwrap_or(false),
    };
    config.validate()?;
    Ok(config)
}

pub fn run(args: &EditArgs) -> Result<i32> {
    let (document, base) = manifest::load(&args.manifest)?;
    let loaded = manifest::load_problem(&document, &base)?;
    let config = resolve_config(args, &document.config)?;

    let results = batch_edit(&loaded.weights, &loaded.concepts, &config)?;

    artifact::ensure_dir(&args.out)?;
    let out = |name: &str| args.out.join(name);

    // The problem matrices are rewritten into the artifact directory (in
    // the native format, whatever they were loaded from) so verification
    // never depends on the original manifest surviving.
    npy::write(&out("c_tgt.npy"), loaded.concepts.c_tgt())?;
    npy::write(&out("c_pres.npy"), loaded.concepts.c_pres())?;
    let mut inputs = InputFiles {
        c_tgt: "c_tgt.npy".into(),
        c_pres: "c_pres.npy".into(),
        c_star: None,
        safe_basis: None,
    };
    if let Some(explicit) = loaded.concepts.anchors().explicit_anchors() {
        npy::write(&out("c_star.npy"), explicit)?;
        inputs.c_star = Some("c_star.npy".into());
    }
    if let Some(safe) = loaded.concepts.anchors().safe_basis() {
        npy::write(&out("safe_basis.npy"), safe)?;
        inputs.safe_basis = Some("safe_basis.npy".into());
    }
    npy::write(&out("proxies.npy"), results[0].proxies())?;

    let mut layers = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (index, (w0, result)) in loaded.weights.iter().zip(&results).enumerate() {
        let names = (
            format!("w0_{index}.npy"),
            format!("delta_w_{index}.npy"),
            format!("w_new_{index}.npy"),
        );
        npy::write(&out(&names.0), w0)?;
        npy::write(&out(&names.1), result.delta_w())?;
        npy::write(&out(&names.2), result.w_new())?;

        let problem = EditProblem::from_concepts(w0.clone(), loaded.concepts.clone())?;
        let certificates =
            certificates_for(&problem, result, config.rank_tolerance, DEFAULT_KERNEL_TOL)?;

        for &target in &result.diagnostics().infeasible_targets {
            skipped.push(SkipRecord {
                layer: index,
                target,
                reason: "target lies inside the preserved span at the configured tolerance; \
                         erasing it would break preservation"
                    .into(),
            });
        }
        layers.push(LayerRecord {
            index,
            w0: names.0,
            delta_w: names.1,
            w_new: names.2,
            diagnostics: result.diagnostics().clone(),
            certificates,
        });
    }

    let record = EditRecord {
        schema: manifest::SCHEMA.into(),
        config,
        inputs,
        proxies: "proxies.npy".into(),
        layers,
        skipped,
    };
    artifact::write_json(&out(DIAGNOSTICS_FILE), &record)?;

    print_summary(&record, &args.out);
    Ok(if record.skipped.is_empty() { 0 } else { EXIT_PARTIAL })
}

fn print_summary(record: &EditRecord, out_dir: &Path) {
    for layer in &record.layers {
        let d = &layer.diagnostics;
        println!(
            "layer {}: method={} erasure_residual={:.3e} preservation_drop={:.3e} \
             update_norm={:.6e}",
            layer.index,
            d.method,
            d.max_erasure_residual(),
            d.max_preservation_drop(),
            d.update_frobenius,
        );
    }
    for skip in &record.skipped {
        println!(
            "skipped: layer {} target {} ({})",
            skip.layer, skip.target, skip.reason
        );
    }
    println!("wrote artifacts to {}", out_dir.display());
}

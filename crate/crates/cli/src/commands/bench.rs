//! `nulledit bench`: compare the editing routes on synthetic geometry and
//! write `report.json` / `report.csv`.

use std::path::PathBuf;

use clap::Args;

use nulledit_core::bench::{
    compare_methods, default_configs, generate_problem, sweep_with, SweepAxis, SyntheticSpec,
};

use crate::commands::{parse_spectrum, resolve_rank_tolerance};
use crate::error::{CliError, Result};
use crate::report::{self, BenchArtifact, BenchPoint};
use crate::artifact;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Spec file (a JSON synthetic-geometry description); inline flags
    /// override its fields one by one.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Embedding dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output dimension of the weight matrix.
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of target columns.
    #[arg(long)]
    pub targets: Option<usize>,
    /// Number of preserved columns.
    #[arg(long)]
    pub preserved: Option<usize>,
    /// Target/preserved cosine in [0, 1).
    #[arg(long)]
    pub cosine: Option<f64>,
    /// Columns of the random safe basis.
    #[arg(long)]
    pub safe_dim: Option<usize>,
    /// "flat" or "decay:RATIO".
    #[arg(long)]
    pub spectrum: Option<String>,
    /// Generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep one quantity: cosine, truncation_k, safe_dim, preserved, or
    /// targets. Requires --values.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated values for the swept quantity.
    #[arg(long)]
    pub values: Option<String>,
    /// Relative rank tolerance for both routes (overrides the
    /// environment).
    #[arg(long)]
    pub rank_tolerance: Option<f64>,
    /// Directory to write report.json and report.csv into.
    #[arg(long)]
    pub out: PathBuf,
}

fn build_spec(args: &BenchArgs) -> Result<SyntheticSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = artifact::read_text(path)?;
            serde_json::from_str(&text).map_err(|e| CliError::Manifest {
                path: path.clone(),
                detail: e.to_string(),
            })?
        }
        None => SyntheticSpec::default(),
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(p) = args.p {
        spec.p = p;
    }
    if let Some(targets) = args.targets {
        spec.targets = targets;
    }
    if let Some(preserved) = args.preserved {
        spec.preserved = preserved;
    }
    if let Some(cosine) = args.cosine {
        spec.cosine = cosine;
    }
    if let Some(safe_dim) = args.safe_dim {
        spec.safe_dim = safe_dim;
    }
    if let Some(spectrum) = &args.spectrum {
        spec.spectrum = parse_spectrum(spectrum)?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("sweep value {v:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one value".into()));
    }
    Ok(values)
}

pub fn run(args: &BenchArgs) -> Result<i32> {
    let spec = build_spec(args)?;
    let tolerance = resolve_rank_tolerance(args.rank_tolerance, None)?;
    let mut configs = default_configs();
    for config in &mut configs {
        config.rank_tolerance = tolerance;
        config.validate()?;
    }

    let artifact_doc = match (&args.sweep, &args.values) {
        (Some(axis_text), values_text) => {
            let axis: SweepAxis = axis_text.parse()?;
            let values = parse_values(values_text.as_deref().ok_or_else(|| {
                CliError::Invalid("--sweep requires --values".into())
            })?)?;
            let swept = sweep_with(&spec, &configs, axis, &values)?;
            let points = swept
                .points
                .into_iter()
                .map(|p| BenchPoint {
                    value: Some(p.value),
                    report: p.report,
                    error: p.error,
                })
                .collect();
            BenchArtifact::new(swept.metric_note, swept.base, Some(axis), points)
        }
        (None, Some(_)) => {
            return Err(CliError::Invalid("--values requires --sweep".into()));
        }
        (None, None) => {
            let problem = generate_problem(&spec)?;
            let comparison = compare_methods(&problem, &configs)?;
            let note = comparison.metric_note.clone();
            let points = vec![BenchPoint {
                value: None,
                report: Some(comparison),
                error: None,
            }];
            BenchArtifact::new(note, spec, None, points)
        }
    };

    artifact::ensure_dir(&args.out)?;
    artifact::write_json(&args.out.join("report.json"), &artifact_doc)?;
    artifact::write_atomic(
        &args.out.join("report.csv"),
        report::to_csv(&artifact_doc).as_bytes(),
    )?;

    print!("{}", report::summary(&artifact_doc));
    println!("\nwrote report.json and report.csv to {}", args.out.display());
    Ok(0)
}

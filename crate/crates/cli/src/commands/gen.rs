//! `nulledit gen`: grow a synthetic edit problem on disk.

use std::path::PathBuf;

use clap::Args;

use nulledit_core::bench::{generate_problem, SyntheticSpec};

use crate::commands::parse_spectrum;
use crate::error::Result;
use crate::manifest::{ManifestConfig, OneOrMany, ProblemManifest, SCHEMA};
use crate::{artifact, npy};

/// Spec flags defaulting to the standard synthetic geometry.
#[derive(Args, Debug)]
pub struct GenArgs {
    /// Embedding dimension.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Output dimension of the weight matrix.
    #[arg(long, default_value_t = 24)]
    pub p: usize,
    /// Number of target columns to erase.
    #[arg(long, default_value_t = 2)]
    pub targets: usize,
    /// Number of preserved columns.
    #[arg(long, default_value_t = 8)]
    pub preserved: usize,
    /// Cosine between each target and the preserved span, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub cosine: f64,
    /// Columns of the random safe basis supplying anchors.
    #[arg(long, default_value_t = 4)]
    pub safe_dim: usize,
    /// Singular-value profile of the preserved set: "flat" or "decay:RATIO".
    #[arg(long, default_value = "flat")]
    pub spectrum: String,
    /// Generator seed; part of the problem's identity.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory to write the manifest and matrix files into.
    #[arg(long)]
    pub out: PathBuf,
}

impl GenArgs {
    pub fn spec(&self) -> Result<SyntheticSpec> {
        Ok(SyntheticSpec {
            n: self.n,
            p: self.p,
            targets: self.targets,
            preserved: self.preserved,
            cosine: self.cosine,
            safe_dim: self.safe_dim,
            spectrum: parse_spectrum(&self.spectrum)?,
            seed: self.seed,
        })
    }
}

pub fn run(args: &GenArgs) -> Result<i32> {
    let spec = args.spec()?;
    let problem = generate_problem(&spec)?;

    artifact::ensure_dir(&args.out)?;
    npy::write(&args.out.join("w0.npy"), problem.w0())?;
    npy::write(&args.out.join("c_tgt.npy"), problem.c_tgt())?;
    npy::write(&args.out.join("c_pres.npy"), problem.c_pres())?;
    let safe = problem
        .anchors()
        .safe_basis()
        .expect("the generator anchors every problem through a safe basis");
    npy::write(&args.out.join("safe_basis.npy"), safe)?;

    let manifest = ProblemManifest {
        schema: SCHEMA.into(),
        w0: OneOrMany::One("w0.npy".into()),
        c_tgt: "c_tgt.npy".into(),
        c_pres: "c_pres.npy".into(),
        c_star: None,
        safe_basis: Some("safe_basis.npy".into()),
        config: ManifestConfig::default(),
        generator: Some(spec.clone()),
    };
    artifact::write_json(&args.out.join("manifest.json"), &manifest)?;

    println!(
        "generated problem: n={} p={} targets={} preserved={} cosine={} seed={}",
        spec.n, spec.p, spec.targets, spec.preserved, spec.cosine, spec.seed
    );
    println!("wrote manifest.json + 4 matrix files to {}", args.out.display());
    Ok(0)
}

//! The four subcommands and their shared plumbing.

pub mod bench;
pub mod edit;
pub mod gen;
pub mod verify;

use clap::{Parser, Subcommand};

use nulledit_core::bench::SpectrumProfile;
use nulledit_core::linalg::RankTolerance;

use crate::error::{CliError, Result};

/// Environment variable supplying a default relative rank tolerance.
/// Precedence: command-line flag, then manifest, then this variable, then
/// the built-in default.
pub const RANK_TOLERANCE_ENV: &str = "NULLEDIT_RANK_TOLERANCE";

/// Closed-form concept erasure: edit weight matrices, verify the edits'
/// certificates, benchmark the editing routes.
#[derive(Parser, Debug)]
#[command(name = "nulledit", version, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic edit problem (matrix files plus manifest).
    Gen(gen::GenArgs),
    /// Run a concept edit described by a manifest; write artifacts.
    Edit(edit::EditArgs),
    /// Recompute the certificates of a finished edit directory.
    Verify(verify::VerifyArgs),
    /// Compare the editing routes on synthetic geometry; write reports.
    Bench(bench::BenchArgs),
}

/// Dispatches to the subcommand, returning the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => gen::run(&args),
        Command::Edit(args) => edit::run(&args),
        Command::Verify(args) => verify::run(&args),
        Command::Bench(args) => bench::run(&args),
    }
}

/// Parses a spectrum flag: `flat` or `decay:RATIO`.
pub fn parse_spectrum(text: &str) -> Result<SpectrumProfile> {
    if text == "flat" {
        return Ok(SpectrumProfile::Flat);
    }
    if let Some(ratio) = text.strip_prefix("decay:") {
        let ratio: f64 = ratio.parse().map_err(|_| {
            CliError::Invalid(format!("decay ratio {ratio:?} is not a number"))
        })?;
        return Ok(SpectrumProfile::Decay { ratio });
    }
    Err(CliError::Invalid(format!(
        "unknown spectrum {text:?}; expected \"flat\" or \"decay:RATIO\""
    )))
}

/// Resolves the rank tolerance from flag, manifest, environment, default —
/// in that order.
pub fn resolve_rank_tolerance(
    flag: Option<f64>,
    manifest: Option<f64>,
) -> Result<RankTolerance> {
    if let Some(t) = flag.or(manifest) {
        return Ok(RankTolerance::Relative(t));
    }
    match std::env::var(RANK_TOLERANCE_ENV) {
        Ok(text) => text
            .trim()
            .parse::<f64>()
            .map(RankTolerance::Relative)
            .map_err(|_| {
                CliError::Invalid(format!(
                    "{RANK_TOLERANCE_ENV}={text:?} is not a number"
                ))
            }),
        Err(std::env::VarError::NotPresent) => Ok(RankTolerance::Default),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Invalid(format!(
            "{RANK_TOLERANCE_ENV} holds invalid UTF-8"
        ))),
    }
}

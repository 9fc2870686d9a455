//! The problem manifest: a JSON file tying together the matrix files and
//! configuration of one edit problem.
//!
//! Matrix paths are resolved relative to the manifest's own directory, so a
//! generated problem directory can be moved or archived wholesale. The
//! `config` block holds per-problem defaults; command-line flags override
//! it, and the `NULLEDIT_RANK_TOLERANCE` environment variable sits between
//! the manifest and the built-in default (flag > manifest > environment >
//! default).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nulledit_core::bench::SyntheticSpec;
use nulledit_core::erasure::{AnchorSpec, ConceptSet, Method};
use nulledit_core::linalg::Matrix;

use crate::error::{CliError, Result};
use crate::{artifact, matfile};

/// Schema tag carried by every JSON artifact this tool writes.
pub const SCHEMA: &str = "nulledit/1";

/// One path or a list of paths; a manifest with several weight matrices
/// applies the same concept edit to every layer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    /// The paths, in manifest order.
    pub fn paths(&self) -> Vec<&str> {
        match self {
            OneOrMany::One(p) => vec![p.as_str()],
            OneOrMany::Many(ps) => ps.iter().map(String::as_str).collect(),
        }
    }
}

/// Per-problem configuration defaults, all optional. Mirrors the edit
/// configuration, with the rank tolerance spelled as a bare relative
/// threshold.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifestConfig {
    pub method: Option<Method>,
    pub truncation_k: Option<usize>,
    pub rank_tolerance: Option<f64>,
    pub infeasible_threshold: Option<f64>,
    pub project_explicit_anchors: Option<bool>,
}

/// The manifest document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemManifest {
    pub schema: String,
    /// Weight matrix file(s), one per layer sharing the concept geometry.
    pub w0: OneOrMany,
    pub c_tgt: String,
    pub c_pres: String,
    /// Explicit anchor columns (one per target). At least one of `c_star`
    /// and `safe_basis` must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<String>,
    /// Safe-subspace basis; anchors are orthogonal projections onto it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_basis: Option<String>,
    #[serde(default)]
    pub config: ManifestConfig,
    /// When the problem came from the synthetic generator, the full
    /// recipe that grew it — enough to regenerate the files from scratch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<SyntheticSpec>,
}

impl ProblemManifest {
    /// Structural checks that do not require touching the referenced files.
    pub fn validate(&self, path: &Path) -> Result<()> {
        let fail = |detail: String| {
            Err(CliError::Manifest {
                path: path.to_path_buf(),
                detail,
            })
        };
        if self.schema != SCHEMA {
            return fail(format!(
                "schema {:?} is not supported; expected {SCHEMA:?}",
                self.schema
            ));
        }
        if self.w0.paths().is_empty() {
            return fail("w0 lists no weight matrix files".into());
        }
        if self.c_star.is_none() && self.safe_basis.is_none() {
            return fail("need c_star, safe_basis, or both to anchor erased targets".into());
        }
        Ok(())
    }
}

/// Loads and validates the manifest at `path`, returning it along with the
/// directory against which its matrix paths resolve.
pub fn load(path: &Path) -> Result<(ProblemManifest, PathBuf)> {
    let text = artifact::read_text(path)?;
    let manifest: ProblemManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
    manifest.validate(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((manifest, base))
}

/// Resolves a manifest-relative path.
pub fn resolve(base: &Path, relative: &str) -> PathBuf {
    let p = Path::new(relative);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Everything `cmd_edit` needs in memory: the weight matrices and the
/// validated concept geometry they share.
pub struct LoadedProblem {
    pub weights: Vec<Matrix>,
    pub concepts: ConceptSet,
}

/// Reads every matrix the manifest references and cross-checks dimensions
/// (the concept-set constructor performs the checks).
pub fn load_problem(manifest: &ProblemManifest, base: &Path) -> Result<LoadedProblem> {
    let weights = manifest
        .w0
        .paths()
        .iter()
        .map(|p| matfile::read(&resolve(base, p)))
        .collect::<Result<Vec<_>>>()?;
    let c_tgt = matfile::read(&resolve(base, &manifest.c_tgt))?;
    let c_pres = matfile::read(&resolve(base, &manifest.c_pres))?;
    let explicit = manifest
        .c_star
        .as_deref()
        .map(|p| matfile::read(&resolve(base, p)))
        .transpose()?;
    let safe = manifest
        .safe_basis
        .as_deref()
        .map(|p| matfile::read(&resolve(base, p)))
        .transpose()?;
    let anchors = AnchorSpec::new(explicit, safe)?;
    let concepts = ConceptSet::new(c_tgt, c_pres, anchors)?;
    Ok(LoadedProblem { weights, concepts })
}

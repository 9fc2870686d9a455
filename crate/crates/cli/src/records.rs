//! On-disk record types shared by the edit and verify commands.
//!
//! An edit directory is self-contained: it holds the problem matrices (as
//! written by the edit, in the native format), the update and edited
//! weights per layer, and `diagnostics.json` tying them together. Nothing
//! in it references the original manifest location, so the directory can
//! be archived, shipped, and re-verified anywhere.

use serde::{Deserialize, Serialize};

use nulledit_core::erasure::{DiagnosticsReport, EditConfig};
use nulledit_core::theory::CertificateBundle;

/// File names of the problem matrices copied into the edit directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputFiles {
    pub c_tgt: String,
    pub c_pres: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_basis: Option<String>,
}

/// One edited weight matrix: its artifact files, the numeric summary of
/// the edit, and the certificates evaluated right after editing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerRecord {
    pub index: usize,
    pub w0: String,
    pub delta_w: String,
    pub w_new: String,
    pub diagnostics: DiagnosticsReport,
    pub certificates: CertificateBundle,
}

/// A target the nullspace route refused to erase, and why.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkipRecord {
    pub layer: usize,
    pub target: usize,
    pub reason: String,
}

/// The `diagnostics.json` document describing a finished edit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EditRecord {
    pub schema: String,
    /// Fully resolved configuration the edit ran under (flags, manifest,
    /// and environment already folded in).
    pub config: EditConfig,
    pub inputs: InputFiles,
    /// Anchor columns actually used, one per target (file name). Shared by
    /// all layers.
    pub proxies: String,
    pub layers: Vec<LayerRecord>,
    /// Skipped (infeasible) targets across all layers; empty on full
    /// success. A non-empty list is reported through exit code 2.
    pub skipped: Vec<SkipRecord>,
}

/// Canonical artifact file name for the record document.
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

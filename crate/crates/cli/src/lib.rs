//! Command-line front end for closed-form concept erasure.
//!
//! Four subcommands cover the artifact lifecycle:
//!
//! * `gen` grows a synthetic edit problem on disk (matrix files plus a
//!   manifest);
//! * `edit` runs an edit described by a manifest and writes a
//!   self-contained artifact directory (updates, edited weights,
//!   diagnostics, certificates);
//! * `verify` recomputes every certificate of a finished edit directory
//!   from the stored matrices alone;
//! * `bench` compares the editing routes on synthetic geometry and writes
//!   plot-ready reports.
//!
//! Matrices travel as NPY files (version 1.0, little-endian 64-bit floats,
//! C order) with CSV accepted as an input fallback; every stored float is
//! written with enough digits to reload bit for bit. Exit codes: 0 success,
//! 1 hard error (with a JSON error object on standard error), 2 partial
//! success (some targets skipped as infeasible), 3 verification failure.

pub mod artifact;
pub mod commands;
pub mod csvmat;
pub mod error;
pub mod jsonfmt;
pub mod manifest;
pub mod matfile;
pub mod npy;
pub mod records;
pub mod report;

pub use error::{CliError, Result, EXIT_ERROR, EXIT_PARTIAL, EXIT_VERIFY_FAILED};

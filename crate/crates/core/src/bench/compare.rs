//! Head-to-head comparison of editing routes and parameter sweeps.
//!
//! [`compare_methods`] runs a list of configurations against one problem,
//! timing each (median of [`TIMING_REPS`] runs) and attaching the
//! certificates from the theory module. A certificate failure on the
//! nullspace route is treated as a defect, not a data point: the run aborts
//! and the offending problem is serialized into the error for replay.
//!
//! [`sweep`] repeats the comparison along one axis (correlation, truncation
//! level, dimensions), regenerating the problem at each point from the same
//! seed so only the swept quantity changes.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::{generate_problem, SyntheticSpec};
use crate::erasure::{edit, DiagnosticsReport, EditConfig, EditProblem, Method, METRIC_NOTE};
use crate::error::{Error, Result};
use crate::theory::{certificates_for, CertificateBundle, DEFAULT_KERNEL_TOL};

/// Repetitions per timing measurement; the median is reported.
pub const TIMING_REPS: usize = 5;

/// Wall-clock statistics of repeated edits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingStats {
    pub reps: usize,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

/// One configuration's results on one problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MethodReport {
    /// Short name: the method, plus the truncation level when set
    /// (`"dp"`, `"dp_k3"`, `"uce"`).
    pub label: String,
    pub config: EditConfig,
    pub diagnostics: DiagnosticsReport,
    pub certificates: CertificateBundle,
    pub timing: TimingStats,
}

/// All configurations' results on one problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// See [`METRIC_NOTE`]: stated in every report so numbers are not
    /// mistaken for downstream generation metrics.
    pub metric_note: String,
    pub methods: Vec<MethodReport>,
}

fn label_for(config: &EditConfig) -> String {
    match (config.method, config.truncation_k) {
        (Method::Dp, Some(k)) => format!("dp_k{k}"),
        (Method::Dp, None) => "dp".to_string(),
        (Method::Uce, _) => "uce".to_string(),
    }
}

/// The standard pair: the nullspace route at full protection and the
/// least-squares route, both with default knobs.
pub fn default_configs() -> Vec<EditConfig> {
    vec![
        EditConfig::default(),
        EditConfig {
            method: Method::Uce,
            ..EditConfig::default()
        },
    ]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs every configuration against `problem`.
///
/// Nullspace-route certificate failures abort with
/// [`Error::CertificateViolation`], carrying the problem as JSON for replay.
pub fn compare_methods(
    problem: &EditProblem,
    configs: &[EditConfig],
) -> Result<ComparisonReport> {
    let mut methods = Vec::with_capacity(configs.len());
    for config in configs {
        let mut times = Vec::with_capacity(TIMING_REPS);
        let mut result = None;
        for _ in 0..TIMING_REPS {
            let start = Instant::now();
            let r = edit(problem, config)?;
            times.push(start.elapsed().as_secs_f64().max(1e-9));
            result = Some(r);
        }
        let result = result.expect("TIMING_REPS >= 1");
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        let timing = TimingStats {
            reps: TIMING_REPS,
            median_s: median(&times),
            min_s: times[0],
            max_s: times[times.len() - 1],
        };

        let certificates =
            certificates_for(problem, &result, config.rank_tolerance, DEFAULT_KERNEL_TOL)?;
        if config.method == Method::Dp && !certificates.all_pass() {
            let instance_json = serde_json::to_string_pretty(problem)
                .unwrap_or_else(|e| format!("<serialization failed: {e}>"));
            return Err(Error::CertificateViolation {
                detail: format!(
                    "configuration {:?} failed its certificates: {certificates:?}",
                    label_for(config)
                ),
                instance_json,
            });
        }

        methods.push(MethodReport {
            label: label_for(config),
            config: *config,
            diagnostics: result.diagnostics().clone(),
            certificates,
            timing,
        });
    }
    Ok(ComparisonReport {
        metric_note: METRIC_NOTE.to_string(),
        methods,
    })
}

/// The quantity varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Target/preserve cosine.
    Cosine,
    /// Truncation level of the nullspace route (problem held fixed).
    TruncationK,
    /// Columns of the safe basis.
    SafeDim,
    /// Preserved-set size.
    Preserved,
    /// Number of targets.
    Targets,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(SweepAxis::Cosine),
            "truncation_k" => Ok(SweepAxis::TruncationK),
            "safe_dim" => Ok(SweepAxis::SafeDim),
            "preserved" => Ok(SweepAxis::Preserved),
            "targets" => Ok(SweepAxis::Targets),
            other => Err(Error::InvalidSpec(format!(
                "unknown sweep axis {other:?}; expected cosine, truncation_k, safe_dim, \
                 preserved, or targets"
            ))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Cosine => "cosine",
            SweepAxis::TruncationK => "truncation_k",
            SweepAxis::SafeDim => "safe_dim",
            SweepAxis::Preserved => "preserved",
            SweepAxis::Targets => "targets",
        })
    }
}

/// One sweep point: either a comparison report or the reason it could not
/// be produced (e.g. a geometry that does not exist at this value).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Option<ComparisonReport>,
    pub error: Option<String>,
}

/// A full sweep along one axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub base: SyntheticSpec,
    pub axis: SweepAxis,
    pub metric_note: String,
    pub points: Vec<SweepPoint>,
}

fn as_count(value: f64, what: &str) -> Result<usize> {
    if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidSpec(format!(
            "{what} must be a small non-negative integer, got {value}"
        )))
    }
}

fn point_inputs(
    base: &SyntheticSpec,
    template: &[EditConfig],
    axis: SweepAxis,
    value: f64,
) -> Result<(SyntheticSpec, Vec<EditConfig>)> {
    let mut spec = base.clone();
    let mut configs = template.to_vec();
    match axis {
        SweepAxis::Cosine => spec.cosine = value,
        SweepAxis::TruncationK => {
            let k = as_count(value, "truncation level")?;
            for config in configs.iter_mut().filter(|c| c.method == Method::Dp) {
                config.truncation_k = Some(k);
            }
        }
        SweepAxis::SafeDim => spec.safe_dim = as_count(value, "safe dimension")?,
        SweepAxis::Preserved => spec.preserved = as_count(value, "preserved count")?,
        SweepAxis::Targets => spec.targets = as_count(value, "target count")?,
    }
    Ok((spec, configs))
}

/// Sweeps `axis` over `values`, comparing the standard configuration pair
/// at every point.
///
/// Per-point geometry errors are recorded in the point (the sweep goes on);
/// certificate violations abort the whole sweep, as in [`compare_methods`].
pub fn sweep(base: &SyntheticSpec, axis: SweepAxis, values: &[f64]) -> Result<SweepReport> {
    sweep_with(base, &default_configs(), axis, values)
}

/// [`sweep`] with a caller-supplied configuration template instead of the
/// standard pair (e.g. to run every point under an explicit rank
/// tolerance). The truncation axis rewrites the template's nullspace-route
/// entries; the other axes leave it untouched.
pub fn sweep_with(
    base: &SyntheticSpec,
    template: &[EditConfig],
    axis: SweepAxis,
    values: &[f64],
) -> Result<SweepReport> {
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let outcome = point_inputs(base, template, axis, value)
            .and_then(|(spec, configs)| {
                generate_problem(&spec).map(|problem| (problem, configs))
            })
            .and_then(|(problem, configs)| compare_methods(&problem, &configs));
        match outcome {
            Ok(report) => points.push(SweepPoint {
                value,
                report: Some(report),
                error: None,
            }),
            Err(err @ Error::CertificateViolation { .. }) => return Err(err),
            Err(other) => points.push(SweepPoint {
                value,
                report: None,
                error: Some(other.to_string()),
            }),
        }
    }
    Ok(SweepReport {
        base: base.clone(),
        axis,
        metric_note: METRIC_NOTE.to_string(),
        points,
    })
}

//! Benchmark report artifacts: the JSON document, its flat CSV projection,
//! and the fixed-width console summary.

use serde::{Deserialize, Serialize};

use nulledit_core::bench::{ComparisonReport, SweepAxis, SyntheticSpec};

use crate::jsonfmt::sig17;
use crate::manifest::SCHEMA;

/// One benchmark point: a single comparison run, or the reason this point
/// could not be produced (the sweep records per-point failures and moves
/// on).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchPoint {
    /// Swept value at this point; absent for a single (non-sweep) run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ComparisonReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The `report.json` document written by the bench command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchArtifact {
    pub schema: String,
    /// What the numbers are (and are not) measuring; stated in every
    /// report so the norm-based surrogates are not mistaken for
    /// downstream model metrics.
    pub metric_note: String,
    /// The base synthetic geometry. For sweeps, the `axis`/`value` fields
    /// carry the per-point variation on top of this base.
    pub base: SyntheticSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<SweepAxis>,
    pub points: Vec<BenchPoint>,
}

impl BenchArtifact {
    pub fn new(
        metric_note: String,
        base: SyntheticSpec,
        axis: Option<SweepAxis>,
        points: Vec<BenchPoint>,
    ) -> Self {
        Self {
            schema: SCHEMA.into(),
            metric_note,
            base,
            axis,
            points,
        }
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Columns of the CSV projection. The spectrum/spec columns describe the
/// base geometry; the `axis`/`value` columns carry the per-point
/// variation. Timing columns come last so determinism comparisons can
/// strip them by position as well as by name.
const CSV_COLUMNS: [&str; 24] = [
    "axis",
    "value",
    "label",
    "method",
    "truncation_k",
    "seed",
    "n",
    "p",
    "targets",
    "preserved",
    "cosine",
    "safe_dim",
    "preserved_rank",
    "max_erasure_residual",
    "max_preservation_drop",
    "update_frobenius",
    "infeasible_targets",
    "degenerate_anchors",
    "gram_fallback",
    "certificates_pass",
    "error",
    "median_s",
    "min_s",
    "max_s",
];

/// Flattens the artifact into CSV: one row per (point, method), one row
/// per failed point.
pub fn to_csv(artifact: &BenchArtifact) -> String {
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');

    let axis = artifact
        .axis
        .map(|a| a.to_string())
        .unwrap_or_default();
    let base = &artifact.base;
    let spec_cells = [
        base.seed.to_string(),
        base.n.to_string(),
        base.p.to_string(),
        base.targets.to_string(),
        base.preserved.to_string(),
        sig17(base.cosine),
        base.safe_dim.to_string(),
    ];

    for point in &artifact.points {
        let value = point.value.map(sig17).unwrap_or_default();
        if let Some(report) = &point.report {
            for method in &report.methods {
                let d = &method.diagnostics;
                let row = [
                    axis.clone(),
                    value.clone(),
                    method.label.clone(),
                    method.config.method.to_string(),
                    method
                        .config
                        .truncation_k
                        .map(|k| k.to_string())
                        .unwrap_or_default(),
                    spec_cells[0].clone(),
                    spec_cells[1].clone(),
                    spec_cells[2].clone(),
                    spec_cells[3].clone(),
                    spec_cells[4].clone(),
                    spec_cells[5].clone(),
                    spec_cells[6].clone(),
                    d.preserved_rank.to_string(),
                    sig17(d.max_erasure_residual()),
                    sig17(d.max_preservation_drop()),
                    sig17(d.update_frobenius),
                    d.infeasible_targets.len().to_string(),
                    d.degenerate_anchors.len().to_string(),
                    d.gram_pseudoinverse_fallback.to_string(),
                    method.certificates.all_pass().to_string(),
                    String::new(),
                    sig17(method.timing.median_s),
                    sig17(method.timing.min_s),
                    sig17(method.timing.max_s),
                ];
                push_row(&mut out, &row);
            }
        } else {
            let mut row = vec![axis.clone(), value.clone()];
            row.extend(std::iter::repeat_n(String::new(), 3));
            row.extend(spec_cells.iter().cloned());
            row.extend(std::iter::repeat_n(String::new(), 8));
            row.push(point.error.clone().unwrap_or_default());
            row.extend(std::iter::repeat_n(String::new(), 3));
            push_row(&mut out, &row);
        }
    }
    out
}

fn push_row(out: &mut String, cells: &[String]) {
    debug_assert_eq!(cells.len(), CSV_COLUMNS.len());
    let escaped: Vec<String> = cells.iter().map(|c| csv_field(c)).collect();
    out.push_str(&escaped.join(","));
    out.push('\n');
}

fn point_name(artifact: &BenchArtifact, point: &BenchPoint) -> String {
    match (artifact.axis, point.value) {
        (Some(axis), Some(value)) => format!("{axis}={value}"),
        _ => "-".to_string(),
    }
}

/// The console summary: an erasure block and a preservation block, one
/// fixed-width row per (point, method), with failed points listed at the
/// end. Timing is deliberately absent (it lives in the report files).
pub fn summary(artifact: &BenchArtifact) -> String {
    let mut out = String::new();
    out.push_str(&format!("note: {}\n\n", artifact.metric_note));

    out.push_str("erasure (lower is stronger)\n");
    out.push_str(&format!(
        "  {:<18} {:<8} {:>14} {:>11} {:>11}\n",
        "point", "label", "max_residual", "infeasible", "degenerate"
    ));
    for point in &artifact.points {
        let Some(report) = &point.report else { continue };
        for method in &report.methods {
            let d = &method.diagnostics;
            out.push_str(&format!(
                "  {:<18} {:<8} {:>14.6e} {:>11} {:>11}\n",
                point_name(artifact, point),
                method.label,
                d.max_erasure_residual(),
                d.infeasible_targets.len(),
                d.degenerate_anchors.len(),
            ));
        }
    }

    out.push_str("\npreservation (lower is better)\n");
    out.push_str(&format!(
        "  {:<18} {:<8} {:>14} {:>5} {:>5} {:>14}\n",
        "point", "label", "max_drop", "rank", "k", "update_norm"
    ));
    for point in &artifact.points {
        let Some(report) = &point.report else { continue };
        for method in &report.methods {
            let d = &method.diagnostics;
            out.push_str(&format!(
                "  {:<18} {:<8} {:>14.6e} {:>5} {:>5} {:>14.6e}\n",
                point_name(artifact, point),
                method.label,
                d.max_preservation_drop(),
                d.preserved_rank,
                d.truncation_k
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "-".to_string()),
                d.update_frobenius,
            ));
        }
    }

    let failures: Vec<&BenchPoint> = artifact
        .points
        .iter()
        .filter(|p| p.error.is_some())
        .collect();
    if !failures.is_empty() {
        out.push_str("\nfailed points\n");
        for point in failures {
            out.push_str(&format!(
                "  {:<18} {}\n",
                point_name(artifact, point),
                point.error.as_deref().unwrap_or("")
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_fields_are_escaped_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn error_points_produce_one_row_with_the_message() {
        let artifact = BenchArtifact::new(
            "note".into(),
            SyntheticSpec::default(),
            Some(SweepAxis::Preserved),
            vec![BenchPoint {
                value: Some(64.0),
                report: None,
                error: Some("unreachable geometry, preserved fills R^n".into()),
            }],
        );
        let csv = to_csv(&artifact);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), CSV_COLUMNS.len());
        assert!(lines[1].contains("unreachable geometry"));
        let summary = summary(&artifact);
        assert!(summary.contains("failed points"));
    }
}

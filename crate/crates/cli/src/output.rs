//! Result serialization: the stable CSV schema and the JSON run manifest.

use serde::Serialize;

use mtc_detect::complexity::{estimate_for, reconcile, Table1Params};
use mtc_detect::detectors::{DetectionResult, DetectorId};
use mtc_detect::harness::{ExperimentSpec, SweepResult, SweepRow};
use mtc_detect::numerics::ComplexVector;

/// Fixed CSV header; downstream tooling keys on these column names.
pub const CSV_HEADER: &str = "detector,axis_name,axis_value,snr_db,trials,active_symbols,\
symbol_errors,nser,mf_activations_mean,mult_count_mean,skipped_trials";

/// Renders the sweep rows as CSV. Numbers use the shortest round-trippable
/// decimal form, so equal results always produce identical bytes.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.detector,
            r.axis_name,
            r.axis_value,
            r.snr_db,
            r.trials,
            r.active_symbols,
            r.symbol_errors,
            r.nser,
            r.mf_activations_mean,
            r.mult_count_mean,
            r.skipped_trials
        ));
    }
    out
}

/// Advisory closed-form-vs-measured cost comparison for one result row.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub detector: DetectorId,
    pub axis_value: f64,
    pub snr_db: f64,
    pub measured_mean: f64,
    pub formula_low: f64,
    pub formula_high: f64,
    pub ratio: f64,
    pub flagged: bool,
}

/// Builds the per-row cost comparison; detectors without a closed-form
/// entry (the genie-aided baselines) are skipped.
pub fn complexity_rows(spec: &ExperimentSpec, rows: &[SweepRow]) -> Vec<ComplexityRow> {
    let mut params = Table1Params::new(spec.n_devices, spec.spreading);
    params.k = spec.kbest_k;
    rows.iter()
        .filter(|r| r.trials > 0)
        .filter_map(|r| {
            let estimate = estimate_for(r.detector, params).ok()?;
            let synthetic = DetectionResult {
                x_hat: ComplexVector::zeros(spec.n_devices),
                mf_activations: 0,
                complex_mult_count: r.mult_count_mean.round() as u64,
                detector_id: r.detector,
            };
            let report = reconcile(&synthetic, &estimate).ok()?;
            Some(ComplexityRow {
                detector: r.detector,
                axis_value: r.axis_value,
                snr_db: r.snr_db,
                measured_mean: r.mult_count_mean,
                formula_low: report.formula_low,
                formula_high: report.formula_high,
                ratio: report.ratio,
                flagged: report.flagged,
            })
        })
        .collect()
}

/// Everything needed to reproduce and interpret a run: the resolved spec
/// (including the master seed), the results, and the cost comparison.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub preset: Option<String>,
    pub spec: ExperimentSpec,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub wall_time_secs: f64,
    pub rows: Vec<SweepRow>,
    pub complexity: Vec<ComplexityRow>,
}

pub fn build_manifest(
    command: &str,
    preset: Option<String>,
    spec: &ExperimentSpec,
    result: &SweepResult,
    started_unix_ms: u64,
    finished_unix_ms: u64,
) -> RunManifest {
    RunManifest {
        tool: "mtc-sim",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        preset,
        spec: spec.clone(),
        started_unix_ms,
        finished_unix_ms,
        wall_time_secs: result.wall_time_secs,
        rows: result.rows.clone(),
        complexity: complexity_rows(spec, &result.rows),
    }
}

//! JSON records and CSV tables.

use std::path::Path;

use rare_events::{aggregate_runs, EnsembleSummary, RunEnsemble};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::runner::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub fingerprint: String,
    pub estimator: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    /// Mean and c.o.v. across runs; absent for a single run or a zero mean.
    pub ensemble: Option<EnsembleSummary>,
    pub total_model_evaluations: u64,
    pub total_samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

pub fn fingerprint(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

pub fn ensemble(runs: &[RunRecord], fingerprint: &str) -> Option<EnsembleSummary> {
    let method = runs.first()?.report.method;
    aggregate_runs(&RunEnsemble {
        estimates: runs.iter().map(|r| r.report.p_hat).collect(),
        method,
        fingerprint: fingerprint.to_string(),
    })
    .ok()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("records serialize");
    text.push('\n');
    text
}

/// Writes to `path`, or to standard output when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub const RUN_COLUMNS: [&str; 9] = [
    "run", "seed", "method", "p_hat", "cov_hat", "n_event", "n_total", "levels", "total_evals",
];

#[derive(Debug, Serialize)]
pub struct RunRow<'a> {
    pub run: usize,
    pub seed: u64,
    pub method: &'a str,
    pub p_hat: f64,
    pub cov_hat: Option<f64>,
    pub n_event: u64,
    pub n_total: u64,
    pub levels: Option<usize>,
    pub total_evals: u64,
}

pub fn run_rows<'a>(method: &'a str, runs: &[RunRecord]) -> Vec<RunRow<'a>> {
    runs.iter()
        .map(|r| RunRow {
            run: r.run,
            seed: r.seed,
            method,
            p_hat: r.report.p_hat,
            cov_hat: r.report.cov_hat,
            n_event: r.report.n_event,
            n_total: r.report.n_total,
            levels: r.report.levels.as_ref().map(Vec::len),
            total_evals: r.total_samples,
        })
        .collect()
}

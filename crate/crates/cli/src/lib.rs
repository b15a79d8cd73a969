//! Config-driven runner for the rare-event estimators: single estimates,
//! horizon sweeps and built-in presets, written as JSON and CSV.

pub mod config;
pub mod error;
pub mod output;
pub mod preset;
pub mod runner;
pub mod sweep;

use std::time::Instant;

pub use config::{EstimatorConfig, ExperimentConfig};
pub use error::CliError;
pub use output::ResultRecord;

/// Runs every replication of the single configured estimator.
pub fn estimate(cfg: &ExperimentConfig, record_timing: bool) -> Result<ResultRecord, CliError> {
    cfg.validate()?;
    let est = cfg.single_estimator()?;
    let model = cfg.model.build().map_err(|e| CliError::Config(e.to_string()))?;
    let model = model.as_dyn();
    let spec = cfg.spec.resolve(model).map_err(|e| CliError::Config(e.to_string()))?;
    eprintln!("estimate: {} x {}", cfg.runs, est.name());
    let start = Instant::now();
    let results = runner::in_pool(cfg.parallelism, || runner::replicate(model, &spec, est, cfg.runs, cfg.seed))?;
    let runs = runner::all_ok(results)?;
    let elapsed = start.elapsed().as_secs_f64();
    let fingerprint = output::fingerprint(cfg);
    Ok(ResultRecord {
        ensemble: output::ensemble(&runs, &fingerprint),
        total_model_evaluations: runs.iter().map(|r| r.total_evaluations).sum(),
        total_samples: runs.iter().map(|r| r.total_samples).sum(),
        estimator: est.name(),
        fingerprint,
        config: cfg.clone(),
        runs,
        wall_clock_seconds: record_timing.then_some(elapsed),
    })
}

//! Estimates over a grid of horizons.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{ensemble, fingerprint};
use crate::runner::{all_ok, in_pool, replicate};

pub const SWEEP_COLUMNS: [&str; 8] = ["method", "T", "D", "p_hat", "cov_hat", "levels", "total_evals", "status"];

/// One `(T, estimator)` point. With several runs `p_hat`, `levels` and
/// `total_evals` are per-run means and `cov_hat` is the c.o.v. across runs.
/// `total_evals` counts samples `N`, including any density search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: usize,
    pub p_hat: Option<f64>,
    pub cov_hat: Option<f64>,
    pub levels: Option<f64>,
    pub total_evals: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub fingerprint: String,
    pub axis: String,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Parses `5,10,15`, requiring strictly increasing values.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("values: {s:?}: {e}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("values: must be strictly increasing".into()));
    }
    Ok(values)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

pub fn sweep_horizon(cfg: &ExperimentConfig, values: &[f64]) -> Result<SweepRecord, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("values: at least one value is required".into()));
    }
    let mut base = cfg.clone();
    base.spec.horizon_steps = None;
    let mut points = Vec::with_capacity(values.len());
    for &t in values {
        let point = ExperimentConfig {
            model: cfg.model.with_horizon(t)?,
            ..base.clone()
        };
        point.validate().map_err(|e| CliError::Config(format!("T = {t}: {e}")))?;
        points.push(point);
    }

    let mut rows = Vec::new();
    for (point, &t) in points.iter().zip(values) {
        let model = point.model.build().map_err(|e| CliError::Config(e.to_string()))?;
        let model = model.as_dyn();
        let spec = point.spec.resolve(model).map_err(|e| CliError::Config(e.to_string()))?;
        for est in point.all_estimators() {
            let results = in_pool(cfg.parallelism, || replicate(model, &spec, est, cfg.runs, cfg.seed))?;
            let mut row = SweepRow {
                method: est.name(),
                t,
                d: model.dim(),
                p_hat: None,
                cov_hat: None,
                levels: None,
                total_evals: None,
                status: "ok".into(),
            };
            match all_ok(results) {
                Ok(runs) => {
                    row.p_hat = Some(mean(runs.iter().map(|r| r.report.p_hat)));
                    row.cov_hat = if runs.len() == 1 {
                        runs[0].report.cov_hat
                    } else {
                        ensemble(&runs, "").map(|s| s.cov)
                    };
                    row.levels = runs[0]
                        .report
                        .levels
                        .is_some()
                        .then(|| mean(runs.iter().map(|r| r.report.levels.as_ref().map_or(0, Vec::len) as f64)));
                    row.total_evals = Some(mean(runs.iter().map(|r| r.total_samples as f64)));
                }
                Err(e) => {
                    row.status = match e {
                        CliError::Estimator(msg) => msg,
                        other => other.to_string(),
                    }
                }
            }
            eprintln!("sweep: T = {t} {} {}", row.method, row.status);
            rows.push(row);
        }
    }
    Ok(SweepRecord {
        fingerprint: fingerprint(cfg),
        axis: "horizon".into(),
        values: values.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_must_increase() {
        assert_eq!(parse_values("5, 10,15").unwrap(), vec![5.0, 10.0, 15.0]);
        assert!(parse_values("5,5").is_err());
        assert!(parse_values("10,5").is_err());
        assert!(parse_values("a").is_err());
    }
}

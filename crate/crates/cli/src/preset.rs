//! Built-in experiment presets.

use rare_events::estimators::IsdCase;
use rare_events::{LorenzParams, RareEventSpec};
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorConfig, ExperimentConfig, IsConfig, McsConfig, ModelConfig, SpecConfig};
use crate::error::CliError;
use crate::output::{ensemble, fingerprint};
use crate::runner::{all_ok, in_pool, replicate};

pub const TABLE1_COLUMNS: [&str; 6] = ["method", "mean", "cov", "runs", "total_evals", "status"];

/// Samples per run for MCS and IS.
pub const TABLE1_N: u64 = 10_000;
/// Search rounds for the case 2 and 3 densities.
pub const TABLE1_SEARCH_ROUNDS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetRow {
    pub method: String,
    pub mean: Option<f64>,
    pub cov: Option<f64>,
    pub runs: usize,
    /// Mean samples per run, search included.
    pub total_evals: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetRecord {
    pub fingerprint: String,
    pub config: ExperimentConfig,
    pub rows: Vec<PresetRow>,
}

/// Lorenz at `alpha = 20`, `T = 1`, `dt = 0.1` with MCS and the three
/// importance densities.
pub fn table1_config(runs: usize, seed: u64, parallelism: usize) -> ExperimentConfig {
    let is = |case| {
        EstimatorConfig::Is(IsConfig {
            case,
            n: TABLE1_N,
            n_search: rare_events::estimators::DEFAULT_N_SEARCH,
            search_rounds: TABLE1_SEARCH_ROUNDS,
        })
    };
    ExperimentConfig {
        model: ModelConfig::Lorenz(LorenzParams {
            alpha: 20.0,
            horizon: 1.0,
            dt: 0.1,
            ..LorenzParams::default()
        }),
        spec: SpecConfig {
            threshold: 1.0,
            horizon_steps: None,
            aggregation: Default::default(),
        },
        estimator: None,
        estimators: vec![
            EstimatorConfig::Mcs(McsConfig { n: TABLE1_N }),
            is(IsdCase::Case1),
            is(IsdCase::Case2),
            is(IsdCase::Case3),
        ],
        runs,
        seed,
        parallelism,
    }
}

pub fn run_preset(cfg: &ExperimentConfig) -> Result<PresetRecord, CliError> {
    cfg.validate()?;
    let model = cfg.model.build().map_err(|e| CliError::Config(e.to_string()))?;
    let model = model.as_dyn();
    let spec: RareEventSpec = cfg.spec.resolve(model).map_err(|e| CliError::Config(e.to_string()))?;
    let fp = fingerprint(cfg);
    let mut rows = Vec::new();
    for est in cfg.all_estimators() {
        eprintln!("preset: {} x {}", cfg.runs, est.name());
        let results = in_pool(cfg.parallelism, || replicate(model, &spec, est, cfg.runs, cfg.seed))?;
        let row = match all_ok(results) {
            Ok(runs) => {
                let summary = ensemble(&runs, &fp);
                let evals = runs.iter().map(|r| r.total_samples as f64).sum::<f64>() / runs.len() as f64;
                PresetRow {
                    method: est.name(),
                    mean: Some(summary.map_or(runs[0].report.p_hat, |s| s.mean)),
                    cov: summary.map(|s| s.cov),
                    runs: runs.len(),
                    total_evals: Some(evals),
                    status: "ok".into(),
                }
            }
            Err(e) => PresetRow {
                method: est.name(),
                mean: None,
                cov: None,
                runs: cfg.runs,
                total_evals: None,
                status: e.to_string(),
            },
        };
        rows.push(row);
    }
    Ok(PresetRecord {
        fingerprint: fp,
        config: cfg.clone(),
        rows,
    })
}

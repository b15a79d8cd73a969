//! Replications of one estimator, parallel across runs.

use rare_events::estimators::{build_isd_with_rounds, is_estimate, mcs_estimate, ss_mma, ss_splitting};
use rare_events::{DynamicModel, EstimateReport, RareEventSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::EstimatorConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub report: EstimateReport,
    /// Evaluations spent building an importance density.
    pub search_evaluations: u64,
    /// Model calls actually made, search included.
    pub total_evaluations: u64,
    /// Samples charged to the estimator (`N`), search included.
    pub total_samples: u64,
}

pub fn run_once(model: &dyn DynamicModel, spec: &RareEventSpec, est: &EstimatorConfig, seed: u64) -> rare_events::Result<(EstimateReport, u64)> {
    match est {
        EstimatorConfig::Mcs(c) => Ok((mcs_estimate(model, spec, c.n, seed)?, 0)),
        EstimatorConfig::Is(c) => {
            let built = build_isd_with_rounds(c.case, model, spec, c.n_search, c.search_rounds, seed)?;
            let report = is_estimate(model, spec, &built.density, c.n, seed)?;
            Ok((report, built.search_evaluations))
        }
        EstimatorConfig::SsMma(c) => Ok((ss_mma(model, spec, c, seed)?, 0)),
        EstimatorConfig::SsSplitting(c) => Ok((ss_splitting(model, spec, c, seed)?, 0)),
    }
}

/// Runs `runs` replications with seeds `seed + run`. Results are in run order.
pub fn replicate(
    model: &dyn DynamicModel,
    spec: &RareEventSpec,
    est: &EstimatorConfig,
    runs: usize,
    seed: u64,
) -> Vec<Result<RunRecord, String>> {
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = seed.wrapping_add(run as u64);
            run_once(model, spec, est, run_seed)
                .map(|(report, search)| RunRecord {
                    run,
                    seed: run_seed,
                    total_evaluations: report.model_evaluations + search,
                    total_samples: report.n_total + search,
                    report,
                    search_evaluations: search,
                })
                .map_err(|e| format!("run {run}: {e}"))
        })
        .collect()
}

/// First failure in run order, as an estimator error.
pub fn all_ok(results: Vec<Result<RunRecord, String>>) -> Result<Vec<RunRecord>, CliError> {
    results.into_iter().collect::<Result<_, _>>().map_err(CliError::Estimator)
}

pub fn in_pool<T: Send>(parallelism: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

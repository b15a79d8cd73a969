//! Estimators for small first-passage probabilities of discrete-time
//! stochastic dynamic systems.
//!
//! A [`DynamicModel`] maps a standard-Gaussian excitation `z` to the
//! performance trace `g(X(0)), ..., g(X(T))`. The rare event is
//! `max_t g(X(t)) > b`. Four estimators are provided: Monte Carlo,
//! importance sampling, and subset simulation with either modified
//! Metropolis chains or trajectory splitting.
//!
//! ```
//! use rare_events::{mcs_estimate, GaussianTailModel, RareEventSpec};
//!
//! let model = GaussianTailModel::new(4, 2.0).unwrap();
//! let spec = RareEventSpec::new(2.0, 1).unwrap();
//! let report = mcs_estimate(&model, &spec, 10_000, 1).unwrap();
//! assert!((report.p_hat - 0.02275).abs() < 0.01);
//! ```

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod models;
pub mod rng;
pub mod special;
pub mod system;

pub use analysis::{
    aggregate_runs, posterior_density, posterior_summary, predicted_mcs_cov, EnsembleSummary, PosteriorBeta,
    PosteriorSummary, RunEnsemble,
};
pub use error::{Error, Result};
pub use estimators::{
    build_isd, build_isd_case1, build_isd_case2, build_isd_case3, first_passage_index, intermediate_threshold,
    is_estimate, mcs_estimate, mma_step, relative_efficiency, split_offspring, ss_cov_model, ss_mma, ss_splitting,
    CovModelParams, ImportanceDensity, IsdCase, MixtureIsd, SsConfig, SsLevelRecord,
};
pub use models::{GaussianTailModel, LorenzModel, LorenzParams, TailLayout};
pub use system::{
    aggregate, indicator, max_performance, Aggregation, AggregationMode, DynamicModel, EstimateReport,
    ExcitationSample, Method, PerformanceTrace, RareEventSpec,
};

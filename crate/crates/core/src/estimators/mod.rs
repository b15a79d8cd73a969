//! Rare-event probability estimators.

mod cov_model;
mod importance;
mod mcs;
mod mma;
mod splitting;
mod subset;
mod threshold;

use rayon::prelude::*;

use crate::error::Result;

pub use cov_model::{relative_efficiency, ss_cov_model, CovModelParams};
pub use importance::{
    build_isd, build_isd_case1, build_isd_case1_with_budget, build_isd_case2, build_isd_case3, build_isd_with_rounds,
    is_estimate,
    BuiltIsd, GaussianBumpIsd, ImportanceDensity, IsdCase, MixtureIsd, NominalDensity, DEFAULT_N_SEARCH,
    DEFAULT_REJECTION_BUDGET,
};
pub use mcs::mcs_estimate;
pub use mma::{mma_step, mma_step_checked, MmaStep};
pub use splitting::{first_passage_index, split_offspring};
pub use subset::{ss_mma, ss_splitting, SsConfig, SsLevelRecord};
pub use threshold::intermediate_threshold;

/// Maps `f` over `0..n` in parallel and returns the results in index order.
/// On failure the error of the lowest failing index is returned, so the
/// outcome does not depend on scheduling.
pub(crate) fn par_indexed<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = (0..n).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

use crate::analysis::PosteriorBeta;
use crate::error::{Error, Result};
use crate::estimators::par_indexed;
use crate::rng::{standard_normal_sample, stream, Purpose};
use crate::system::{indicator, DynamicModel, EstimateReport, Method, RareEventSpec};

/// Standard Monte Carlo: `p_hat = N_E / N`.
pub fn mcs_estimate<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    n_total: u64,
    seed: u64,
) -> Result<EstimateReport> {
    spec.check_model(model)?;
    if n_total < 1 {
        return Err(Error::invalid("n_total", "must be at least 1"));
    }
    let dim = model.dim();
    let hits = par_indexed(n_total, |j| {
        let mut rng = stream(seed, Purpose::Sample, 0, j);
        let z = standard_normal_sample(&mut rng, dim);
        let trace = model.evaluate(&z).map_err(|e| e.at_sample(j))?;
        indicator(&trace, spec)
    })?;
    let n_event = hits.iter().filter(|&&h| h).count() as u64;
    Ok(mcs_report(Method::Mcs, n_event, n_total, n_total))
}

pub(crate) fn mcs_cov(n_event: u64, n_total: u64) -> Option<f64> {
    if n_event == 0 {
        return None;
    }
    let p = n_event as f64 / n_total as f64;
    Some(((1.0 - p) / (n_total as f64 * p)).sqrt())
}

pub(crate) fn mcs_report(method: Method, n_event: u64, n_total: u64, evaluations: u64) -> EstimateReport {
    EstimateReport {
        method,
        p_hat: n_event as f64 / n_total as f64,
        n_event,
        n_total,
        cov_hat: mcs_cov(n_event, n_total),
        posterior: PosteriorBeta::from_counts(n_event, n_total).ok(),
        weight_variance: None,
        levels: None,
        model_evaluations: evaluations,
    }
}

//! Predicted c.o.v. and efficiency of subset simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovModelParams {
    /// Chain-correlation constant.
    pub gamma: f64,
    pub r_exponent: f64,
}

impl Default for CovModelParams {
    fn default() -> Self {
        Self {
            gamma: 3.0,
            r_exponent: 2.0,
        }
    }
}

impl CovModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be nonnegative"));
        }
        if !(2.0..=3.0).contains(&self.r_exponent) {
            return Err(Error::invalid("r_exponent", "must lie in [2, 3]"));
        }
        Ok(())
    }
}

fn check_inputs(p_e: f64, p0: f64, params: &CovModelParams) -> Result<()> {
    params.validate()?;
    if !(p_e > 0.0 && p_e < 1.0) {
        return Err(Error::invalid("p_e", "must lie in (0, 1)"));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::invalid("p0", "must lie in (0, 1)"));
    }
    Ok(())
}

/// `delta^2 = (1+gamma)(1-p0) / (N p0 ln(1/p0)^r) * ln(1/p_E)^r`; returns `delta`.
pub fn ss_cov_model(p_e: f64, cfg: &SsConfig, n_total: u64, params: &CovModelParams) -> Result<f64> {
    check_inputs(p_e, cfg.p0, params)?;
    if n_total < 1 {
        return Err(Error::invalid("n_total", "must be at least 1"));
    }
    let r = params.r_exponent;
    let p0 = cfg.p0;
    let scale = (1.0 + params.gamma) * (1.0 - p0) / (n_total as f64 * p0 * (-p0.ln()).powf(r));
    Ok((scale * (-p_e.ln()).powf(r)).sqrt())
}

/// Ratio of Monte Carlo to subset simulation sample sizes at equal c.o.v.
pub fn relative_efficiency(p_e: f64, cfg: &SsConfig, params: &CovModelParams) -> Result<f64> {
    check_inputs(p_e, cfg.p0, params)?;
    let r = params.r_exponent;
    let p0 = cfg.p0;
    Ok(p0 * (-p0.ln()).powf(r) / ((1.0 + params.gamma) * (1.0 - p0) * p_e * (-p_e.ln()).powf(r)))
}

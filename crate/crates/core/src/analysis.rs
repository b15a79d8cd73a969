//! Posterior summaries, run ensembles and c.o.v. prediction.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::system::Method;

/// `Beta(N_E + 1, N - N_E + 1)` posterior of `p_E` under a uniform prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBeta {
    pub a: f64,
    pub b: f64,
}

impl PosteriorBeta {
    pub fn from_counts(n_event: u64, n_total: u64) -> Result<Self> {
        if n_event > n_total {
            return Err(Error::invalid("n_event", "cannot exceed n_total"));
        }
        Ok(Self {
            a: (n_event + 1) as f64,
            b: (n_total - n_event + 1) as f64,
        })
    }

    /// Number of trials `N = a + b - 2`.
    pub fn n_total(&self) -> f64 {
        self.a + self.b - 2.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.a >= 1.0 && self.b >= 1.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::invalid("posterior", "parameters must be finite and at least 1"));
        }
        Ok(())
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn posterior_density(p: f64, post: &PosteriorBeta) -> Result<f64> {
    post.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "must lie in [0, 1]"));
    }
    // 0 * ln(0) is taken as 0 so the boundary is handled for a = 1 or b = 1.
    let term = |exponent: f64, x: f64| if exponent == 0.0 { 0.0 } else { exponent * x.ln() };
    let ln = term(post.a - 1.0, p) + term(post.b - 1.0, 1.0 - p) - ln_beta(post.a, post.b);
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    /// MAP estimate `N_E / N`.
    pub mode: f64,
    pub cov: f64,
}

pub fn posterior_summary(post: &PosteriorBeta) -> Result<PosteriorSummary> {
    post.validate()?;
    let n = post.n_total();
    if n < 1.0 {
        return Err(Error::invalid("posterior", "mode is undefined without observations"));
    }
    let mean = post.a / (post.a + post.b);
    let mode = (post.a - 1.0) / n;
    let cov = ((1.0 - mean) / ((n + 3.0) * mean)).sqrt();
    Ok(PosteriorSummary { mean, mode, cov })
}

/// Point estimates from independent replications of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEnsemble {
    pub estimates: Vec<f64>,
    pub method: Method,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub mean: f64,
    pub cov: f64,
}

/// Sample mean and sample c.o.v. (unbiased variance).
pub fn aggregate_runs(ensemble: &RunEnsemble) -> Result<EnsembleSummary> {
    let xs = &ensemble.estimates;
    if xs.len() < 2 {
        return Err(Error::invalid("estimates", "at least two runs are required"));
    }
    if let Some(k) = xs.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("estimates", format!("estimate {k} is outside [0, 1]")));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::invalid("estimates", "mean is zero, c.o.v. is undefined"));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(EnsembleSummary {
        mean,
        cov: var.sqrt() / mean,
    })
}

/// `sqrt((1 - p) / (N p))`.
pub fn predicted_mcs_cov(p_e: f64, n: u64) -> Result<f64> {
    if !(p_e > 0.0 && p_e <= 1.0) {
        return Err(Error::invalid("p_e", "must lie in (0, 1]"));
    }
    if n < 1 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    Ok(((1.0 - p_e) / (n as f64 * p_e)).sqrt())
}

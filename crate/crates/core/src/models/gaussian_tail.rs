//! Analytic benchmark whose exceedance probability is a standard normal tail.

use serde::{Deserialize, Serialize};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::special::{normal_upper_tail, normal_upper_tail_inv};
use crate::system::{DynamicModel, ExcitationSample, PerformanceTrace};

/// Clamp on tail masses so transformed values stay finite.
const TAIL_FLOOR: f64 = 1e-300;

/// How the excitation is mapped to a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailLayout {
    /// `g = sum(z) / sqrt(D)` held over a one-step trace `[g, g]`.
    #[default]
    Sum,
    /// `g(k) = Phi^-1(F(z_1^2 + ... + z_{k+1}^2))` for `k = 0..D-1`, with `F`
    /// the chi-square CDF with `D` degrees of freedom. The trace is
    /// nondecreasing and its final value is standard normal, and the model
    /// is causal in time, so it suits trajectory splitting.
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianTailModel {
    pub dim: usize,
    /// Exceedance level; the event `max g > beta` has probability `Q(beta)`.
    pub beta: f64,
    #[serde(default)]
    pub layout: TailLayout,
}

impl GaussianTailModel {
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        Self::with_layout(dim, beta, TailLayout::Sum)
    }

    pub fn with_layout(dim: usize, beta: f64, layout: TailLayout) -> Result<Self> {
        let model = Self { dim, beta, layout };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if self.layout != TailLayout::Sum && self.dim < 2 {
            return Err(Error::invalid("dim", "step-wise layouts need at least 2 coordinates"));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        Ok(())
    }

    /// `Q(beta)`.
    pub fn exact_probability(&self) -> f64 {
        normal_upper_tail(self.beta)
    }
}

/// Normal score of a chi-square energy.
fn energy_score(energy: f64, chi: &ChiSquared) -> f64 {
    let lower = chi.cdf(energy);
    if lower < 0.5 {
        -normal_upper_tail_inv(lower.max(TAIL_FLOOR))
    } else {
        normal_upper_tail_inv(chi.sf(energy).max(TAIL_FLOOR))
    }
}

pub fn gaussian_tail_evaluate(z: &ExcitationSample, model: &GaussianTailModel) -> Result<PerformanceTrace> {
    z.expect_dim(model.dim)?;
    let values = match model.layout {
        TailLayout::Sum => {
            let g = z.as_slice().iter().sum::<f64>() / (model.dim as f64).sqrt();
            vec![g, g]
        }
        TailLayout::Energy => {
            let chi = ChiSquared::new(model.dim as f64).map_err(|e| Error::invalid("dim", e.to_string()))?;
            let mut energy = 0.0;
            z.as_slice()
                .iter()
                .map(|v| {
                    energy += v * v;
                    energy_score(energy, &chi)
                })
                .collect()
        }
    };
    PerformanceTrace::new(values, 1.0)
}

impl DynamicModel for GaussianTailModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon_steps(&self) -> usize {
        match self.layout {
            TailLayout::Sum => 1,
            TailLayout::Energy => self.dim - 1,
        }
    }

    fn evaluate(&self, z: &ExcitationSample) -> Result<PerformanceTrace> {
        gaussian_tail_evaluate(z, self)
    }

    fn causal_prefix(&self, step: usize) -> Option<usize> {
        Some(match self.layout {
            TailLayout::Sum => self.dim,
            TailLayout::Energy => (step + 1).min(self.dim),
        })
    }
}

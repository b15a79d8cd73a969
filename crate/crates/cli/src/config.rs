//! Experiment configuration read from TOML.

use std::path::Path;

use rare_events::estimators::{IsdCase, SsConfig, DEFAULT_N_SEARCH};
use rare_events::system::Aggregation;
use rare_events::{DynamicModel, GaussianTailModel, LorenzModel, LorenzParams, RareEventSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Lorenz(LorenzParams),
    GaussianTail(GaussianTailModel),
}

/// A built model. Both variants are cheap to construct.
pub enum Model {
    Lorenz(LorenzModel),
    GaussianTail(GaussianTailModel),
}

impl Model {
    pub fn as_dyn(&self) -> &dyn DynamicModel {
        match self {
            Model::Lorenz(m) => m,
            Model::GaussianTail(m) => m,
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> rare_events::Result<Model> {
        Ok(match self {
            ModelConfig::Lorenz(p) => Model::Lorenz(LorenzModel::new(p.clone())?),
            ModelConfig::GaussianTail(m) => {
                m.validate()?;
                Model::GaussianTail(m.clone())
            }
        })
    }

    /// Copy of the model with horizon `t` (seconds). Only Lorenz has a time axis.
    pub fn with_horizon(&self, t: f64) -> Result<Self, CliError> {
        match self {
            ModelConfig::Lorenz(p) => Ok(ModelConfig::Lorenz(LorenzParams {
                horizon: t,
                ..p.clone()
            })),
            ModelConfig::GaussianTail(_) => Err(CliError::Config("the horizon axis needs a lorenz model".into())),
        }
    }
}

/// Event definition. `horizon_steps` defaults to the model's horizon and is
/// checked against it when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_steps: Option<usize>,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl SpecConfig {
    pub fn resolve(&self, model: &dyn DynamicModel) -> rare_events::Result<RareEventSpec> {
        let spec = RareEventSpec {
            threshold: self.threshold,
            horizon_steps: self.horizon_steps.unwrap_or_else(|| model.horizon_steps()),
            aggregation: self.aggregation.clone(),
        };
        spec.check_model(model)?;
        Ok(spec)
    }
}

fn default_n_search() -> u64 {
    DEFAULT_N_SEARCH
}

fn default_rounds() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsConfig {
    pub case: IsdCase,
    pub n: u64,
    /// Nominal draws per search round (cases 2 and 3).
    #[serde(default = "default_n_search")]
    pub n_search: u64,
    #[serde(default = "default_rounds")]
    pub search_rounds: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsConfig {
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Mcs(McsConfig),
    Is(IsConfig),
    SsMma(SsConfig),
    SsSplitting(SsConfig),
}

impl EstimatorConfig {
    pub fn name(&self) -> String {
        match self {
            EstimatorConfig::Mcs(_) => "mcs".into(),
            EstimatorConfig::Is(c) => format!("is_{}", case_name(c.case)),
            EstimatorConfig::SsMma(_) => "ss_mma".into(),
            EstimatorConfig::SsSplitting(_) => "ss_splitting".into(),
        }
    }

    pub fn validate(&self) -> rare_events::Result<()> {
        let positive = |name: &'static str, v: u64| {
            if v == 0 {
                Err(rare_events::Error::InvalidParameter {
                    name,
                    reason: "must be at least 1".into(),
                })
            } else {
                Ok(())
            }
        };
        match self {
            EstimatorConfig::Mcs(c) => positive("n", c.n),
            EstimatorConfig::Is(c) => {
                positive("n", c.n)?;
                positive("n_search", c.n_search)?;
                positive("search_rounds", c.search_rounds as u64)
            }
            EstimatorConfig::SsMma(c) | EstimatorConfig::SsSplitting(c) => c.validate(),
        }
    }
}

pub fn case_name(case: IsdCase) -> &'static str {
    match case {
        IsdCase::Case1 => "case1",
        IsdCase::Case2 => "case2",
        IsdCase::Case3 => "case3",
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub spec: SpecConfig,
    /// A single estimator, or use `estimators` for several.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<EstimatorConfig>,
    #[serde(default = "one")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub parallelism: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn all_estimators(&self) -> Vec<&EstimatorConfig> {
        self.estimator.iter().chain(self.estimators.iter()).collect()
    }

    /// Checks every field without sampling anything.
    pub fn validate(&self) -> Result<(), CliError> {
        let field = |path: &str, e: rare_events::Error| CliError::Config(format!("{path}: {e}"));
        if self.runs == 0 {
            return Err(CliError::Config("runs: must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(CliError::Config("parallelism: must be at least 1".into()));
        }
        if self.all_estimators().is_empty() {
            return Err(CliError::Config("estimator: at least one estimator is required".into()));
        }
        let model = self.model.build().map_err(|e| field("model", e))?;
        self.spec.resolve(model.as_dyn()).map_err(|e| field("spec", e))?;
        for (i, est) in self.all_estimators().into_iter().enumerate() {
            est.validate().map_err(|e| field(&format!("estimators[{i}]"), e))?;
        }
        Ok(())
    }

    /// The single estimator required by `estimate`.
    pub fn single_estimator(&self) -> Result<&EstimatorConfig, CliError> {
        match self.all_estimators().as_slice() {
            [one] => Ok(one),
            list => Err(CliError::Config(format!(
                "estimate needs exactly one estimator, found {}",
                list.len()
            ))),
        }
    }

    /// JSON text used for the fingerprint. Field order follows the struct.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

//! Domain types shared by every estimator: excitation samples, performance
//! traces, the rare-event definition and the dynamic-model contract.
//!
//! Estimators never look at system states. A model maps a point of the
//! standard-Gaussian excitation space to the discrete performance history
//! `g(X(0)), ..., g(X(T))`, and the event is `max_t g(X(t)) > b`.

use serde::{Deserialize, Serialize};

use crate::analysis::PosteriorBeta;
use crate::error::{Error, Result};
use crate::estimators::SsLevelRecord;

/// A point `z` in the `D`-dimensional i.i.d. standard-Gaussian space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSample {
    z: Vec<f64>,
}

impl ExcitationSample {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::invalid("z", "excitation dimension must be positive"));
        }
        if let Some(k) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("z", format!("coordinate {k} is not finite")));
        }
        Ok(Self { z })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "excitation dimension must be positive");
        Self { z: vec![0.0; dim] }
    }

    /// Skips validation; callers guarantee finite, nonempty coordinates.
    pub(crate) fn from_vec_unchecked(z: Vec<f64>) -> Self {
        debug_assert!(!z.is_empty() && z.iter().all(|v| v.is_finite()));
        Self { z }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.z
    }

    pub fn norm_squared(&self) -> f64 {
        self.z.iter().map(|v| v * v).sum()
    }

    pub(crate) fn expect_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Performance values `g` at the discrete instants `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTrace {
    values: Vec<f64>,
    dt: f64,
}

impl PerformanceTrace {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Contract("performance trace is empty".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "time step must be positive"));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("value at step {k} is not finite")));
        }
        Ok(Self { values, dt })
    }

    /// Combines per-quantity traces `g_k(t)` into one trace using the
    /// series or parallel criterion at every instant.
    pub fn from_quantities(quantities: &[Vec<f64>], aggregation: &Aggregation, dt: f64) -> Result<Self> {
        let Some(first) = quantities.first() else {
            return Err(Error::Contract("no quantities to aggregate".into()));
        };
        if quantities.iter().any(|q| q.len() != first.len()) {
            return Err(Error::Contract("quantity traces differ in length".into()));
        }
        let mut row = vec![0.0; quantities.len()];
        let values = (0..first.len())
            .map(|t| {
                for (slot, q) in row.iter_mut().zip(quantities) {
                    *slot = q[t];
                }
                aggregation.apply(&row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, dt)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn horizon_steps(&self) -> usize {
        self.values.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    Series,
    Parallel,
}

/// How several performance quantities `g_k` fold into the scalar `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", content = "thresholds", rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Single,
    /// Failure when any normalized quantity exceeds one.
    Series(Vec<f64>),
    /// Failure when every normalized quantity exceeds one.
    Parallel(Vec<f64>),
}

impl Aggregation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Aggregation::Single => Ok(()),
            Aggregation::Series(a) | Aggregation::Parallel(a) => check_thresholds(a),
        }
    }

    pub fn apply(&self, g: &[f64]) -> Result<f64> {
        match self {
            Aggregation::Single => match g {
                [v] => Ok(*v),
                _ => Err(Error::DimensionMismatch {
                    expected: 1,
                    found: g.len(),
                }),
            },
            Aggregation::Series(a) => aggregate(g, a, AggregationMode::Series),
            Aggregation::Parallel(a) => aggregate(g, a, AggregationMode::Parallel),
        }
    }
}

fn check_thresholds(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::invalid("thresholds", "at least one quantity is required"));
    }
    if let Some(k) = a.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("thresholds", format!("a[{k}] must be positive")));
    }
    Ok(())
}

/// Series criterion: `max_k g_k / a_k`. Parallel criterion: `min_k g_k / a_k`.
pub fn aggregate(g: &[f64], thresholds: &[f64], mode: AggregationMode) -> Result<f64> {
    if g.len() != thresholds.len() {
        return Err(Error::DimensionMismatch {
            expected: thresholds.len(),
            found: g.len(),
        });
    }
    check_thresholds(thresholds)?;
    let ratios = g.iter().zip(thresholds).map(|(g, a)| g / a);
    Ok(match mode {
        AggregationMode::Series => ratios.fold(f64::NEG_INFINITY, f64::max),
        AggregationMode::Parallel => ratios.fold(f64::INFINITY, f64::min),
    })
}

/// Threshold `b`, horizon `T` and aggregation rule defining `E = {max_t g > b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RareEventSpec {
    pub threshold: f64,
    pub horizon_steps: usize,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl RareEventSpec {
    pub fn new(threshold: f64, horizon_steps: usize) -> Result<Self> {
        let spec = Self {
            threshold,
            horizon_steps,
            aggregation: Aggregation::Single,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() {
            return Err(Error::invalid("threshold", "must be a number"));
        }
        if self.horizon_steps < 1 {
            return Err(Error::invalid("horizon_steps", "must be at least 1"));
        }
        self.aggregation.validate()
    }

    /// Fails unless the model produces traces of this spec's horizon.
    pub fn check_model<M: DynamicModel + ?Sized>(&self, model: &M) -> Result<()> {
        self.validate()?;
        if model.horizon_steps() != self.horizon_steps {
            return Err(Error::HorizonMismatch {
                expected: self.horizon_steps,
                found: model.horizon_steps(),
            });
        }
        if model.dim() == 0 {
            return Err(Error::invalid("dim", "model dimension must be positive"));
        }
        Ok(())
    }
}

/// Flattened per-step internal states recorded during an evaluation, used to
/// resume integration from a split point.
#[derive(Debug, Clone, PartialEq)]
pub struct StateHistory {
    pub stride: usize,
    pub values: Vec<f64>,
}

impl StateHistory {
    pub fn state(&self, step: usize) -> &[f64] {
        &self.values[step * self.stride..(step + 1) * self.stride]
    }
}

/// Maps an excitation sample to its performance trace.
///
/// Implementations must be deterministic and reentrant: identical inputs give
/// bitwise-identical traces and concurrent calls do not interact.
pub trait DynamicModel: Sync {
    /// Excitation dimension `D`.
    fn dim(&self) -> usize;

    /// Number of steps `T`; traces hold `T + 1` values.
    fn horizon_steps(&self) -> usize;

    fn evaluate(&self, z: &ExcitationSample) -> Result<PerformanceTrace>;

    /// Number of leading excitation coordinates that fully determine trace
    /// values `0..=step`. `None` marks a model without causal structure,
    /// which cannot be used for trajectory splitting.
    fn causal_prefix(&self, _step: usize) -> Option<usize> {
        None
    }

    /// Evaluates while recording internal states, if the model can resume.
    fn evaluate_recording(&self, _z: &ExcitationSample) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        None
    }

    /// Recomputes only the trace suffix after `step`, reusing the states and
    /// trace of a trajectory sharing `z`'s causal prefix up to `step`.
    fn resume(
        &self,
        _z: &ExcitationSample,
        _prefix_trace: &PerformanceTrace,
        _prefix_states: &StateHistory,
        _step: usize,
    ) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        None
    }
}

impl<M: DynamicModel + ?Sized> DynamicModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn horizon_steps(&self) -> usize {
        (**self).horizon_steps()
    }
    fn evaluate(&self, z: &ExcitationSample) -> Result<PerformanceTrace> {
        (**self).evaluate(z)
    }
    fn causal_prefix(&self, step: usize) -> Option<usize> {
        (**self).causal_prefix(step)
    }
    fn evaluate_recording(&self, z: &ExcitationSample) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        (**self).evaluate_recording(z)
    }
    fn resume(
        &self,
        z: &ExcitationSample,
        prefix_trace: &PerformanceTrace,
        prefix_states: &StateHistory,
        step: usize,
    ) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        (**self).resume(z, prefix_trace, prefix_states, step)
    }
}

pub fn max_performance(trace: &PerformanceTrace) -> f64 {
    trace.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `1` iff the trace strictly exceeds the threshold at some instant.
pub fn indicator(trace: &PerformanceTrace, spec: &RareEventSpec) -> Result<bool> {
    if trace.horizon_steps() != spec.horizon_steps {
        return Err(Error::HorizonMismatch {
            expected: spec.horizon_steps,
            found: trace.horizon_steps(),
        });
    }
    Ok(max_performance(trace) > spec.threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcs,
    Is,
    SsMma,
    SsSplitting,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mcs => "mcs",
            Method::Is => "is",
            Method::SsMma => "ss_mma",
            Method::SsSplitting => "ss_splitting",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one estimator invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub p_hat: f64,
    /// Samples in `E`; for subset simulation, at the final level.
    pub n_event: u64,
    /// Sample budget `N` in the estimator's own accounting.
    pub n_total: u64,
    pub cov_hat: Option<f64>,
    pub posterior: Option<PosteriorBeta>,
    /// Sample variance of the importance weights of event samples (IS only).
    pub weight_variance: Option<f64>,
    pub levels: Option<Vec<SsLevelRecord>>,
    /// Actual calls into the model, including partial (resumed) evaluations.
    pub model_evaluations: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(values: &[f64]) -> PerformanceTrace {
        PerformanceTrace::new(values.to_vec(), 0.1).unwrap()
    }

    #[test]
    fn max_performance_of_lists() {
        assert_eq!(max_performance(&trace(&[0.2, 0.9, 0.5])), 0.9);
        assert_eq!(max_performance(&trace(&[0.0])), 0.0);
    }

    #[test]
    fn empty_trace_is_rejected() {
        assert!(matches!(PerformanceTrace::new(vec![], 0.1), Err(Error::Contract(_))));
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[2.0, 1.0], &[1.0, 2.0], AggregationMode::Series).unwrap(), 2.0);
        assert_eq!(aggregate(&[2.0, 1.0], &[1.0, 2.0], AggregationMode::Parallel).unwrap(), 0.5);
        for mode in [AggregationMode::Series, AggregationMode::Parallel] {
            assert_eq!(aggregate(&[3.0], &[3.0], mode).unwrap(), 1.0);
        }
    }

    #[test]
    fn aggregate_errors() {
        assert!(matches!(
            aggregate(&[1.0, 2.0], &[1.0], AggregationMode::Series),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            aggregate(&[1.0, 2.0], &[1.0, 0.0], AggregationMode::Parallel),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn indicator_is_strict() {
        let spec = RareEventSpec::new(1.0, 2).unwrap();
        assert!(indicator(&trace(&[0.0, 1.2, 0.1]), &spec).unwrap());
        assert!(!indicator(&trace(&[0.0, 1.0, 0.1]), &spec).unwrap());
        assert!(!indicator(&trace(&[0.0, 0.99, 0.1]), &spec).unwrap());
    }

    #[test]
    fn indicator_checks_horizon() {
        let spec = RareEventSpec::new(1.0, 3).unwrap();
        assert!(matches!(
            indicator(&trace(&[0.0, 1.2, 0.1]), &spec),
            Err(Error::HorizonMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(RareEventSpec::new(1.0, 0).is_err());
        let mut spec = RareEventSpec::new(1.0, 4).unwrap();
        spec.aggregation = Aggregation::Series(vec![1.0, -2.0]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn trace_from_quantities_applies_aggregation_pointwise() {
        let q = vec![vec![0.5, 2.0], vec![1.0, 1.0]];
        let series = PerformanceTrace::from_quantities(&q, &Aggregation::Series(vec![1.0, 2.0]), 1.0).unwrap();
        assert_eq!(series.values(), &[0.5, 2.0]);
        let parallel = PerformanceTrace::from_quantities(&q, &Aggregation::Parallel(vec![1.0, 2.0]), 1.0).unwrap();
        assert_eq!(parallel.values(), &[0.5, 0.5]);
    }

    #[test]
    fn excitation_rejects_non_finite() {
        assert!(ExcitationSample::new(vec![0.0, f64::NAN]).is_err());
        assert!(ExcitationSample::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn indicator_monotone_in_threshold(
            values in prop::collection::vec(-10.0f64..10.0, 1..20),
            b1 in -12.0f64..12.0,
            delta in 0.0f64..5.0,
        ) {
            let t = trace(&values);
            let horizon = values.len().saturating_sub(1).max(1);
            prop_assume!(values.len() >= 2);
            let lo = RareEventSpec::new(b1, horizon).unwrap();
            let hi = RareEventSpec::new(b1 + delta, horizon).unwrap();
            prop_assert!(indicator(&t, &lo).unwrap() >= indicator(&t, &hi).unwrap());
        }

        #[test]
        fn series_dominates_parallel(
            pairs in prop::collection::vec((-10.0f64..10.0, 0.01f64..10.0), 1..8)
        ) {
            let (g, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let s = aggregate(&g, &a, AggregationMode::Series).unwrap();
            let p = aggregate(&g, &a, AggregationMode::Parallel).unwrap();
            prop_assert!(s >= p);
        }
    }
}

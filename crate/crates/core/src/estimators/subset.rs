//! Subset simulation with Markov-chain or splitting conditional sampling.
//!
//! Levels follow the usual adaptive scheme: the `n p0` largest responses of
//! a level seed the next one, and each seed grows a chain of `1/p0` samples
//! (the seed included). When equal responses straddle the cut, the seed set
//! grows or shrinks to the nearest gap and chain lengths are spread as evenly
//! as possible over the seeds; per-level factors then become `m_i / n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::PosteriorBeta;
use crate::error::{Error, Result};
use crate::estimators::cov_model::{ss_cov_model, CovModelParams};
use crate::estimators::mcs::mcs_cov;
use crate::estimators::mma::propose;
use crate::estimators::splitting::{first_passage_index, split_offspring};
use crate::estimators::threshold::{level_cut, seed_count};
use crate::estimators::par_indexed;
use crate::rng::{standard_normal_sample, stream, Purpose};
use crate::system::{
    max_performance, DynamicModel, EstimateReport, ExcitationSample, Method, PerformanceTrace, RareEventSpec,
    StateHistory,
};

const ACCEPTANCE_BAND: (f64, f64) = (0.3, 0.5);
const PILOT_FRACTION: f64 = 0.1;
const SIGMA_RANGE: (f64, f64) = (0.01, 10.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsConfig {
    /// Samples per level.
    pub n: usize,
    #[serde(default = "default_p0")]
    pub p0: f64,
    /// Component-wise proposal standard deviation.
    #[serde(default = "default_sigma")]
    pub proposal_sigma: f64,
    /// Retune the proposal per level from pilot chains.
    #[serde(default)]
    pub adaptive_sigma: bool,
    #[serde(default = "default_max_levels")]
    pub max_levels: usize,
    /// Splitting only: resume offspring from the mother's recorded state.
    #[serde(default)]
    pub reuse_prefix: bool,
}

fn default_p0() -> f64 {
    0.1
}

fn default_sigma() -> f64 {
    1.0
}

fn default_max_levels() -> usize {
    25
}

impl SsConfig {
    pub fn new(n: usize, p0: f64) -> Result<Self> {
        let cfg = Self {
            n,
            p0,
            proposal_sigma: default_sigma(),
            adaptive_sigma: false,
            max_levels: default_max_levels(),
            reuse_prefix: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", "must be at least 2"));
        }
        seed_count(self.n, self.p0)?;
        let inv = 1.0 / self.p0;
        if (inv - inv.round()).abs() > 1e-9 * inv {
            return Err(Error::invalid("p0", format!("1 / p0 = {inv} is not an integer")));
        }
        if !(self.proposal_sigma > 0.0 && self.proposal_sigma.is_finite()) {
            return Err(Error::invalid("proposal_sigma", "must be positive"));
        }
        if self.max_levels < 1 {
            return Err(Error::invalid("max_levels", "must be at least 1"));
        }
        Ok(())
    }
}

/// Diagnostics for one conditional level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsLevelRecord {
    pub level_index: usize,
    /// Threshold `b_i` conditioning this level; absent for the nominal level.
    pub threshold: Option<f64>,
    pub n_samples: usize,
    /// Samples of this level in the target event.
    pub n_event: usize,
    /// Samples passed on as seeds; at the final level, equal to `n_event`.
    pub n_seeds: usize,
    /// `n_seeds / n_samples`. The product over levels is `p_hat`.
    pub conditional_probability: f64,
    /// Fraction of MMA component proposals accepted while building this level.
    pub acceptance_rate: Option<f64>,
    /// Fraction of chain steps that moved to a new state.
    pub state_acceptance_rate: Option<f64>,
    pub proposal_sigma: Option<f64>,
    /// The cut leaving this level was moved off a tie.
    pub tie_resolved: bool,
}

#[derive(Debug, Clone)]
struct Particle {
    z: ExcitationSample,
    g: f64,
    trace: Option<PerformanceTrace>,
    states: Option<StateHistory>,
}

#[derive(Debug, Default)]
struct ChainStats {
    components_accepted: u64,
    components_proposed: u64,
    moved: u64,
    steps: u64,
    evaluations: u64,
}

impl ChainStats {
    fn absorb(&mut self, other: &ChainStats) {
        self.components_accepted += other.components_accepted;
        self.components_proposed += other.components_proposed;
        self.moved += other.moved;
        self.steps += other.steps;
        self.evaluations += other.evaluations;
    }

    fn state_rate(&self) -> Option<f64> {
        (self.steps > 0).then(|| self.moved as f64 / self.steps as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Mma,
    Splitting,
}

struct Run<'a, M: ?Sized> {
    model: &'a M,
    spec: &'a RareEventSpec,
    cfg: &'a SsConfig,
    seed: u64,
    variant: Variant,
    /// Splitting keeps traces; with prefix reuse it keeps states as well.
    record: bool,
    /// Steps before this index do not depend on the excitation.
    free_from: usize,
}

impl<M: DynamicModel + ?Sized> Run<'_, M> {
    fn sample_id(&self, level: usize, position: usize) -> u64 {
        (level * self.cfg.n + position) as u64
    }

    /// Level response. Excitation-free steps are a constant floor that would
    /// put an atom in the level distribution, so they only count once they
    /// exceed the target threshold. `g > b` is unaffected.
    fn level_value(&self, trace: &PerformanceTrace) -> f64 {
        let values = trace.values();
        let split = self.free_from.min(values.len());
        let (fixed, free) = values.split_at(split);
        let floor = fixed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if free.is_empty() || floor > self.spec.threshold {
            max_performance(trace)
        } else {
            free.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    }

    /// First step past the excitation-free prefix where the trace exceeds `b`.
    fn first_passage(&self, trace: &PerformanceTrace, b: f64) -> Result<usize> {
        let split = self.free_from.min(trace.values().len());
        match trace.values()[split..].iter().position(|&g| g > b) {
            Some(k) => Ok(split + k),
            None => first_passage_index(trace, b),
        }
    }

    fn evaluate(&self, z: ExcitationSample, id: u64) -> Result<Particle> {
        let wrap = |e: Error| e.at_sample(id);
        if self.variant == Variant::Splitting && self.record {
            if let Some(res) = self.model.evaluate_recording(&z) {
                let (trace, states) = res.map_err(wrap)?;
                return Ok(Particle {
                    g: self.level_value(&trace),
                    z,
                    trace: Some(trace),
                    states: Some(states),
                });
            }
        }
        let trace = self.model.evaluate(&z).map_err(wrap)?;
        let g = self.level_value(&trace);
        let keep = self.variant == Variant::Splitting;
        Ok(Particle {
            z,
            g,
            trace: keep.then_some(trace),
            states: None,
        })
    }

    fn mma_chain(&self, start: &Particle, len: usize, level: usize, k: usize, first: usize, b: f64, sigma: f64) -> Result<(Vec<Particle>, ChainStats)> {
        let mut rng = stream(self.seed, Purpose::Chain, level as u32, k as u64);
        let mut stats = ChainStats::default();
        let mut out = Vec::with_capacity(len);
        let mut current = start.clone();
        out.push(current.clone());
        for s in 1..len {
            let (candidate, accepted) = propose(&current.z, sigma, &mut rng);
            stats.components_accepted += accepted as u64;
            stats.components_proposed += candidate.dim() as u64;
            stats.steps += 1;
            if candidate != current.z {
                stats.evaluations += 1;
                let next = self.evaluate(candidate, self.sample_id(level, first + s))?;
                if next.g > b {
                    current = next;
                    stats.moved += 1;
                }
            }
            out.push(current.clone());
        }
        Ok((out, stats))
    }

    fn split_chain(&self, mother: &Particle, len: usize, level: usize, k: usize, first: usize, b: f64) -> Result<(Vec<Particle>, ChainStats)> {
        let mut rng = stream(self.seed, Purpose::Offspring, level as u32, k as u64);
        let mut stats = ChainStats::default();
        let trace = mother.trace.as_ref().expect("splitting keeps traces");
        let t = self.first_passage(trace, b)?;
        let keep = self
            .model
            .causal_prefix(t)
            .ok_or_else(|| Error::SplittingUnsupported("model has no causal prefix map".into()))?;
        let mut out = Vec::with_capacity(len);
        out.push(mother.clone());
        for s in 1..len {
            stats.steps += 1;
            if keep >= mother.z.dim() {
                out.push(mother.clone());
                continue;
            }
            let z = split_offspring(&mother.z, keep, &mut rng)?;
            let id = self.sample_id(level, first + s);
            stats.evaluations += 1;
            let resumed = match (&mother.states, self.record) {
                (Some(states), true) => self.model.resume(&z, trace, states, t),
                _ => None,
            };
            let child = match resumed {
                Some(res) => {
                    let (trace, states) = res.map_err(|e| e.at_sample(id))?;
                    Particle {
                        g: self.level_value(&trace),
                        z,
                        trace: Some(trace),
                        states: Some(states),
                    }
                }
                None => self.evaluate(z, id)?,
            };
            stats.moved += 1;
            out.push(child);
        }
        Ok((out, stats))
    }

    fn grow(&self, seeds: &[&Particle], lens: &[usize], firsts: &[usize], level: usize, b: f64, sigma: f64, range: std::ops::Range<usize>) -> Result<Vec<(Vec<Particle>, ChainStats)>> {
        let results: Vec<Result<(Vec<Particle>, ChainStats)>> = range
            .into_par_iter()
            .map(|k| match self.variant {
                Variant::Mma => self.mma_chain(seeds[k], lens[k], level, k, firsts[k], b, sigma),
                Variant::Splitting => self.split_chain(seeds[k], lens[k], level, k, firsts[k], b),
            })
            .collect();
        results.into_iter().collect()
    }

    fn execute(&self) -> Result<EstimateReport> {
        let cfg = self.cfg;
        let n = cfg.n;
        let m = seed_count(n, cfg.p0)?;
        let b = self.spec.threshold;
        let dim = self.model.dim();

        let mut particles = par_indexed(n as u64, |j| {
            let mut rng = stream(self.seed, Purpose::Sample, 0, j);
            self.evaluate(standard_normal_sample(&mut rng, dim), j)
        })?;
        let mut evaluations = n as u64;
        let mut n_total = n as u64;
        let mut p_hat = 1.0;
        let mut sigma = cfg.proposal_sigma;
        let mut records: Vec<SsLevelRecord> = Vec::new();
        let mut level_threshold: Option<f64> = None;
        let mut level_stats: Option<(ChainStats, f64)> = None;

        for level in 0.. {
            let g: Vec<f64> = particles.iter().map(|p| p.g).collect();
            let n_event = g.iter().filter(|&&v| v > b).count();
            let mut record = SsLevelRecord {
                level_index: level,
                threshold: level_threshold,
                n_samples: n,
                n_event,
                n_seeds: n_event,
                conditional_probability: n_event as f64 / n as f64,
                acceptance_rate: None,
                state_acceptance_rate: None,
                proposal_sigma: None,
                tie_resolved: false,
            };
            if let Some((stats, used_sigma)) = level_stats.take() {
                if self.variant == Variant::Mma {
                    record.acceptance_rate = (stats.components_proposed > 0)
                        .then(|| stats.components_accepted as f64 / stats.components_proposed as f64);
                    record.proposal_sigma = Some(used_sigma);
                }
                record.state_acceptance_rate = stats.state_rate();
            }

            if n_event >= m {
                p_hat *= record.conditional_probability;
                records.push(record);
                break;
            }
            if level + 1 >= cfg.max_levels {
                records.push(record);
                return Err(Error::LevelCap {
                    max_levels: cfg.max_levels,
                    partial: records,
                });
            }

            let cut = level_cut(&g, cfg.p0, b)?;
            let seeds = cut.seeds.len();
            record.n_seeds = seeds;
            record.conditional_probability = seeds as f64 / n as f64;
            record.tie_resolved = cut.tie_resolved;
            p_hat *= record.conditional_probability;
            n_total += (n - seeds) as u64;
            records.push(record);

            let next = level + 1;
            let seed_refs: Vec<&Particle> = cut.seeds.iter().map(|&i| &particles[i]).collect();
            let lens: Vec<usize> = (0..seeds).map(|k| n / seeds + usize::from(k < n % seeds)).collect();
            let firsts: Vec<usize> = lens
                .iter()
                .scan(0, |acc, &l| {
                    let at = *acc;
                    *acc += l;
                    Some(at)
                })
                .collect();

            let adapt = self.variant == Variant::Mma && cfg.adaptive_sigma;
            let pilot = if adapt {
                ((seeds as f64 * PILOT_FRACTION).ceil() as usize).clamp(1, seeds)
            } else {
                seeds
            };
            let mut chains = self.grow(&seed_refs, &lens, &firsts, next, cut.threshold, sigma, 0..pilot)?;
            if pilot < seeds {
                let mut pilot_stats = ChainStats::default();
                chains.iter().for_each(|(_, s)| pilot_stats.absorb(s));
                if let Some(rate) = pilot_stats.state_rate() {
                    if !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&rate) {
                        let centre = 0.5 * (ACCEPTANCE_BAND.0 + ACCEPTANCE_BAND.1);
                        sigma = (sigma * (2.0 * (rate - centre)).exp()).clamp(SIGMA_RANGE.0, SIGMA_RANGE.1);
                    }
                }
                chains.extend(self.grow(&seed_refs, &lens, &firsts, next, cut.threshold, sigma, pilot..seeds)?);
            }

            let mut stats = ChainStats::default();
            let mut next_particles = Vec::with_capacity(n);
            for (chain, s) in chains {
                stats.absorb(&s);
                next_particles.extend(chain);
            }
            debug_assert_eq!(next_particles.len(), n);
            evaluations += stats.evaluations;
            particles = next_particles;
            level_threshold = Some(cut.threshold);
            level_stats = Some((stats, sigma));
        }

        let levels = records.len();
        let final_record = records.last().expect("at least one level");
        let n_event = final_record.n_event as u64;
        let (cov_hat, posterior) = if levels == 1 {
            (mcs_cov(n_event, n as u64), PosteriorBeta::from_counts(n_event, n as u64).ok())
        } else if p_hat < 1.0 {
            (ss_cov_model(p_hat, cfg, n_total, &CovModelParams::default()).ok(), None)
        } else {
            (Some(0.0), None)
        };
        Ok(EstimateReport {
            method: match self.variant {
                Variant::Mma => Method::SsMma,
                Variant::Splitting => Method::SsSplitting,
            },
            p_hat,
            n_event,
            n_total,
            cov_hat,
            posterior,
            weight_variance: None,
            levels: Some(records),
            model_evaluations: evaluations,
        })
    }
}

/// Leading trace steps that use no excitation coordinates.
fn excitation_free_steps<M: DynamicModel + ?Sized>(model: &M) -> usize {
    (0..=model.horizon_steps())
        .take_while(|&k| model.causal_prefix(k) == Some(0))
        .count()
}

fn prepare<M: DynamicModel + ?Sized>(model: &M, spec: &RareEventSpec, cfg: &SsConfig) -> Result<()> {
    spec.check_model(model)?;
    cfg.validate()
}

/// Subset simulation with modified Metropolis chains.
pub fn ss_mma<M: DynamicModel + ?Sized>(model: &M, spec: &RareEventSpec, cfg: &SsConfig, seed: u64) -> Result<EstimateReport> {
    prepare(model, spec, cfg)?;
    Run {
        model,
        spec,
        cfg,
        seed,
        variant: Variant::Mma,
        record: false,
        free_from: excitation_free_steps(model),
    }
    .execute()
}

/// Subset simulation where offspring share the mother's excitation up to its
/// first passage over the level threshold.
pub fn ss_splitting<M: DynamicModel + ?Sized>(model: &M, spec: &RareEventSpec, cfg: &SsConfig, seed: u64) -> Result<EstimateReport> {
    prepare(model, spec, cfg)?;
    if model.causal_prefix(0).is_none() {
        return Err(Error::SplittingUnsupported("model has no causal prefix map".into()));
    }
    Run {
        model,
        spec,
        cfg,
        seed,
        variant: Variant::Splitting,
        record: cfg.reuse_prefix,
        free_from: excitation_free_steps(model),
    }
    .execute()
}

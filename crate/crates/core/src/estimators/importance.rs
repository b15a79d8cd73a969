//! Importance sampling and the mixture densities built from nominal draws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::par_indexed;
use crate::rng::{standard_normal, standard_normal_sample, stream, uniform, Purpose, StreamRng};
use crate::special::standard_normal_log_density;
use crate::system::{indicator, DynamicModel, EstimateReport, ExcitationSample, Method, RareEventSpec};

pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000;
pub const DEFAULT_N_SEARCH: u64 = 1000;

const SEARCH_CHUNK: u64 = 256;

/// Sampling density `q` over the excitation space.
pub trait ImportanceDensity: Sync {
    fn dim(&self) -> usize;

    fn sample(&self, rng: &mut StreamRng) -> ExcitationSample;

    fn log_density(&self, z: &ExcitationSample) -> f64;

    /// Log of the nominal density `p`.
    fn reference_log_density(&self, z: &ExcitationSample) -> f64 {
        standard_normal_log_density(z.as_slice())
    }
}

impl<D: ImportanceDensity + ?Sized> ImportanceDensity for Box<D> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample(&self, rng: &mut StreamRng) -> ExcitationSample {
        (**self).sample(rng)
    }
    fn log_density(&self, z: &ExcitationSample) -> f64 {
        (**self).log_density(z)
    }
    fn reference_log_density(&self, z: &ExcitationSample) -> f64 {
        (**self).reference_log_density(z)
    }
}

/// `q = p`. Draws coincide with those of Monte Carlo on the same stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalDensity {
    pub dim: usize,
}

impl ImportanceDensity for NominalDensity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut StreamRng) -> ExcitationSample {
        standard_normal_sample(rng, self.dim)
    }

    fn log_density(&self, z: &ExcitationSample) -> f64 {
        standard_normal_log_density(z.as_slice())
    }
}

fn shifted(center: &[f64], sign: f64, rng: &mut StreamRng) -> ExcitationSample {
    ExcitationSample::from_vec_unchecked(center.iter().map(|c| sign * c + standard_normal(rng)).collect())
}

fn bump_log_density(z: &[f64], center: &[f64], sign: f64) -> f64 {
    let d: Vec<f64> = z.iter().zip(center).map(|(z, c)| z - sign * c).collect();
    standard_normal_log_density(&d)
}

/// Unit-variance Gaussian centered at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBumpIsd {
    pub center: Vec<f64>,
}

impl ImportanceDensity for GaussianBumpIsd {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn sample(&self, rng: &mut StreamRng) -> ExcitationSample {
        shifted(&self.center, 1.0, rng)
    }

    fn log_density(&self, z: &ExcitationSample) -> f64 {
        bump_log_density(z.as_slice(), &self.center, 1.0)
    }
}

/// Equal-weight mixture of unit-variance Gaussians at `+center` and `-center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureIsd {
    pub center: Vec<f64>,
}

impl ImportanceDensity for MixtureIsd {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn sample(&self, rng: &mut StreamRng) -> ExcitationSample {
        let sign = if uniform(rng) < 0.5 { 1.0 } else { -1.0 };
        shifted(&self.center, sign, rng)
    }

    fn log_density(&self, z: &ExcitationSample) -> f64 {
        let a = bump_log_density(z.as_slice(), &self.center, 1.0);
        let b = bump_log_density(z.as_slice(), &self.center, -1.0);
        let hi = a.max(b);
        hi + ((a - hi).exp() + (b - hi).exp()).ln() - std::f64::consts::LN_2
    }
}

/// A density together with the model evaluations spent building it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltIsd<D> {
    pub density: D,
    pub search_evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsdCase {
    /// Mixture at `±z_E`, the first nominal draw found in `E`.
    Case1,
    /// Mixture at `±z*_E`, the smallest-norm in-`E` draw of a search set.
    Case2,
    /// Single bump at `z*_E`.
    Case3,
}

fn search_draw<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    seed: u64,
    round: u32,
    j: u64,
) -> Result<Option<ExcitationSample>> {
    let mut rng = stream(seed, Purpose::IsdSearch, round, j);
    let z = standard_normal_sample(&mut rng, model.dim());
    let trace = model.evaluate(&z).map_err(|e| e.at_sample(j))?;
    Ok(indicator(&trace, spec)?.then_some(z))
}

pub fn build_isd_case1<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    seed: u64,
) -> Result<BuiltIsd<MixtureIsd>> {
    build_isd_case1_with_budget(model, spec, DEFAULT_REJECTION_BUDGET, seed)
}

/// Rejection sampling for the first nominal draw in `E`. Draws are scanned in
/// index order, evaluated in parallel chunks.
pub fn build_isd_case1_with_budget<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    budget: u64,
    seed: u64,
) -> Result<BuiltIsd<MixtureIsd>> {
    spec.check_model(model)?;
    let mut start = 0;
    while start < budget {
        let len = SEARCH_CHUNK.min(budget - start);
        let chunk = par_indexed(len, |k| search_draw(model, spec, seed, 0, start + k))?;
        if let Some((k, z)) = chunk.into_iter().enumerate().find_map(|(k, z)| z.map(|z| (k, z))) {
            return Ok(BuiltIsd {
                density: MixtureIsd { center: z.into_vec() },
                search_evaluations: start + k as u64 + 1,
            });
        }
        start += len;
    }
    Err(Error::IsdConstruction(format!(
        "no nominal draw reached the event within {budget} attempts"
    )))
}

/// Smallest-norm in-`E` draw among `n_search` nominal draws. A round without
/// any hit is replaced by a fresh one, up to `rounds` rounds in total.
fn min_norm_event_draw<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    n_search: u64,
    rounds: u32,
    seed: u64,
) -> Result<BuiltIsd<Vec<f64>>> {
    spec.check_model(model)?;
    if n_search < 1 {
        return Err(Error::invalid("n_search", "must be at least 1"));
    }
    if rounds < 1 {
        return Err(Error::invalid("search_rounds", "must be at least 1"));
    }
    for round in 0..rounds {
        let draws = par_indexed(n_search, |j| search_draw(model, spec, seed, round, j))?;
        let best = draws
            .into_iter()
            .flatten()
            .map(|z| (z.norm_squared(), z))
            .reduce(|best, next| if next.0 < best.0 { next } else { best });
        if let Some((_, z)) = best {
            return Ok(BuiltIsd {
                density: z.into_vec(),
                search_evaluations: n_search * (round as u64 + 1),
            });
        }
    }
    Err(Error::IsdConstruction(format!(
        "none of the {n_search} search draws reached the event in {rounds} round(s); increase n_search"
    )))
}

pub fn build_isd_case2<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    n_search: u64,
    seed: u64,
) -> Result<BuiltIsd<MixtureIsd>> {
    let found = min_norm_event_draw(model, spec, n_search, 1, seed)?;
    Ok(BuiltIsd {
        density: MixtureIsd { center: found.density },
        search_evaluations: found.search_evaluations,
    })
}

pub fn build_isd_case3<M: DynamicModel + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    n_search: u64,
    seed: u64,
) -> Result<BuiltIsd<GaussianBumpIsd>> {
    let found = min_norm_event_draw(model, spec, n_search, 1, seed)?;
    Ok(BuiltIsd {
        density: GaussianBumpIsd { center: found.density },
        search_evaluations: found.search_evaluations,
    })
}

pub fn build_isd<M: DynamicModel + ?Sized>(
    case: IsdCase,
    model: &M,
    spec: &RareEventSpec,
    n_search: u64,
    seed: u64,
) -> Result<BuiltIsd<Box<dyn ImportanceDensity>>> {
    build_isd_with_rounds(case, model, spec, n_search, 1, seed)
}

/// [`build_isd`] allowing up to `rounds` search rounds for cases 2 and 3.
/// Case 1 is unaffected.
pub fn build_isd_with_rounds<M: DynamicModel + ?Sized>(
    case: IsdCase,
    model: &M,
    spec: &RareEventSpec,
    n_search: u64,
    rounds: u32,
    seed: u64,
) -> Result<BuiltIsd<Box<dyn ImportanceDensity>>> {
    Ok(match case {
        IsdCase::Case1 => {
            let b = build_isd_case1(model, spec, seed)?;
            BuiltIsd {
                density: Box::new(b.density),
                search_evaluations: b.search_evaluations,
            }
        }
        IsdCase::Case2 | IsdCase::Case3 => {
            let found = min_norm_event_draw(model, spec, n_search, rounds, seed)?;
            let density: Box<dyn ImportanceDensity> = if case == IsdCase::Case2 {
                Box::new(MixtureIsd { center: found.density })
            } else {
                Box::new(GaussianBumpIsd { center: found.density })
            };
            BuiltIsd {
                density,
                search_evaluations: found.search_evaluations,
            }
        }
    })
}

fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Some(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
}

/// `p_hat = (1/N) sum I_E(z_j) p(z_j) / q(z_j)` with `z_j ~ q`.
pub fn is_estimate<M: DynamicModel + ?Sized, D: ImportanceDensity + ?Sized>(
    model: &M,
    spec: &RareEventSpec,
    isd: &D,
    n_total: u64,
    seed: u64,
) -> Result<EstimateReport> {
    spec.check_model(model)?;
    if isd.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: isd.dim(),
        });
    }
    if n_total < 1 {
        return Err(Error::invalid("n_total", "must be at least 1"));
    }
    let weights = par_indexed(n_total, |j| {
        let mut rng = stream(seed, Purpose::Sample, 0, j);
        let z = isd.sample(&mut rng);
        let trace = model.evaluate(&z).map_err(|e| e.at_sample(j))?;
        if !indicator(&trace, spec)? {
            return Ok(None);
        }
        let log_q = isd.log_density(&z);
        if log_q == f64::NEG_INFINITY || log_q.is_nan() {
            return Err(Error::SupportViolation { sample: j });
        }
        Ok(Some((isd.reference_log_density(&z) - log_q).exp()))
    })?;

    let event_weights: Vec<f64> = weights.iter().flatten().copied().collect();
    let n = n_total as f64;
    let sum: f64 = event_weights.iter().sum();
    let p_hat = sum / n;
    let cov_hat = if p_hat > 0.0 && n_total > 1 {
        let sum_sq: f64 = event_weights.iter().map(|w| (w - p_hat) * (w - p_hat)).sum();
        let zeros = (n_total - event_weights.len() as u64) as f64 * p_hat * p_hat;
        let sd = ((sum_sq + zeros) / (n - 1.0)).sqrt();
        Some(sd / (p_hat * n.sqrt()))
    } else {
        None
    };
    Ok(EstimateReport {
        method: Method::Is,
        p_hat,
        n_event: event_weights.len() as u64,
        n_total,
        cov_hat,
        posterior: None,
        weight_variance: sample_variance(&event_weights),
        levels: None,
        model_evaluations: n_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::mcs_estimate;
    use crate::models::GaussianTailModel;

    #[test]
    fn nominal_density_reproduces_mcs() {
        let model = GaussianTailModel::new(6, 1.5).unwrap();
        let spec = RareEventSpec::new(1.5, 1).unwrap();
        let is = is_estimate(&model, &spec, &NominalDensity { dim: 6 }, 3000, 42).unwrap();
        let mcs = mcs_estimate(&model, &spec, 3000, 42).unwrap();
        assert_eq!(is.p_hat, mcs.p_hat);
        assert_eq!(is.n_event, mcs.n_event);
        assert_eq!(is.weight_variance, Some(0.0));
    }

    #[test]
    fn mixture_log_density_matches_direct_formula() {
        let isd = MixtureIsd { center: vec![1.0, -2.0] };
        let z = ExcitationSample::new(vec![0.3, 0.4]).unwrap();
        let phi = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI);
        let direct = 0.5 * (phi(0.3 - 1.0, 0.4 + 2.0) + phi(0.3 + 1.0, 0.4 - 2.0));
        assert!((isd.log_density(&z) - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn case1_center_is_in_event() {
        let model = GaussianTailModel::new(2, 1.0).unwrap();
        let spec = RareEventSpec::new(1.0, 1).unwrap();
        let a = build_isd_case1(&model, &spec, 1).unwrap();
        let b = build_isd_case1(&model, &spec, 2).unwrap();
        for built in [&a, &b] {
            let z = ExcitationSample::new(built.density.center.clone()).unwrap();
            assert!(indicator(&model.evaluate(&z).unwrap(), &spec).unwrap());
        }
        assert_ne!(a.density.center, b.density.center);
    }

    #[test]
    fn case2_center_has_minimal_norm() {
        let model = GaussianTailModel::new(10, 2.0).unwrap();
        let spec = RareEventSpec::new(2.0, 1).unwrap();
        let built = build_isd_case2(&model, &spec, 1000, 5).unwrap();
        let norm: f64 = built.density.center.iter().map(|v| v * v).sum();
        for j in 0..1000 {
            if let Some(z) = search_draw(&model, &spec, 5, 0, j).unwrap() {
                assert!(norm <= z.norm_squared());
            }
        }
    }

    #[test]
    fn unreachable_event_fails_construction() {
        let model = GaussianTailModel::new(2, 0.0).unwrap();
        let spec = RareEventSpec::new(50.0, 1).unwrap();
        assert!(matches!(
            build_isd_case2(&model, &spec, 100, 0),
            Err(Error::IsdConstruction(_))
        ));
        assert!(matches!(
            build_isd_case1_with_budget(&model, &spec, 300, 0),
            Err(Error::IsdConstruction(_))
        ));
    }

    #[test]
    fn extra_rounds_rescue_an_empty_search() {
        let model = GaussianTailModel::new(2, 0.0).unwrap();
        let spec = RareEventSpec::new(2.5, 1).unwrap();
        // Find a seed whose first 20-draw round misses the event.
        let seed = (0..200)
            .find(|&s| build_isd_case2(&model, &spec, 20, s).is_err())
            .expect("some round misses");
        let built = build_isd_with_rounds(IsdCase::Case2, &model, &spec, 20, 50, seed).unwrap();
        assert!(built.search_evaluations > 20);
        assert_eq!(built.search_evaluations % 20, 0);
    }

    struct Degenerate;

    impl ImportanceDensity for Degenerate {
        fn dim(&self) -> usize {
            2
        }
        fn sample(&self, rng: &mut StreamRng) -> ExcitationSample {
            standard_normal_sample(rng, 2)
        }
        fn log_density(&self, _z: &ExcitationSample) -> f64 {
            f64::NEG_INFINITY
        }
    }

    #[test]
    fn zero_density_at_event_sample_is_an_error() {
        let model = GaussianTailModel::new(2, 0.0).unwrap();
        let spec = RareEventSpec::new(0.0, 1).unwrap();
        assert!(matches!(
            is_estimate(&model, &spec, &Degenerate, 100, 0),
            Err(Error::SupportViolation { .. })
        ));
    }
}

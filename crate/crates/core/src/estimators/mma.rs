//! Modified Metropolis kernel for standard-Gaussian excitations.

use crate::error::{Error, Result};
use crate::rng::{standard_normal, uniform, StreamRng};
use crate::system::ExcitationSample;

#[derive(Debug, Clone, PartialEq)]
pub struct MmaStep {
    pub next: ExcitationSample,
    pub accepted_components: usize,
    /// False only when a changed candidate fell outside the level.
    pub accepted_state: bool,
    /// Whether the level indicator was called.
    pub evaluated: bool,
}

/// Component-wise Metropolis proposal. Returns the candidate and the number
/// of coordinates that moved.
pub(crate) fn propose(current: &ExcitationSample, sigma: f64, rng: &mut StreamRng) -> (ExcitationSample, usize) {
    let mut accepted = 0;
    let v = current
        .as_slice()
        .iter()
        .map(|&x| {
            let nu = x + sigma * standard_normal(rng);
            let ratio = (0.5 * (x * x - nu * nu)).exp();
            if uniform(rng) < ratio {
                accepted += 1;
                nu
            } else {
                x
            }
        })
        .collect();
    (ExcitationSample::from_vec_unchecked(v), accepted)
}

/// One MMA transition. `current` must lie in the level; the indicator is
/// called at most once, and not at all when every component is rejected.
pub fn mma_step<F>(current: &ExcitationSample, mut level_indicator: F, proposal_sigma: f64, rng: &mut StreamRng) -> Result<MmaStep>
where
    F: FnMut(&ExcitationSample) -> Result<bool>,
{
    if !(proposal_sigma > 0.0 && proposal_sigma.is_finite()) {
        return Err(Error::invalid("proposal_sigma", "must be positive"));
    }
    let (candidate, accepted_components) = propose(current, proposal_sigma, rng);
    if candidate == *current {
        return Ok(MmaStep {
            next: candidate,
            accepted_components,
            accepted_state: true,
            evaluated: false,
        });
    }
    let inside = level_indicator(&candidate)?;
    Ok(MmaStep {
        next: if inside { candidate } else { current.clone() },
        accepted_components,
        accepted_state: inside,
        evaluated: true,
    })
}

/// [`mma_step`] that first verifies the precondition on `current`.
pub fn mma_step_checked<F>(current: &ExcitationSample, mut level_indicator: F, proposal_sigma: f64, rng: &mut StreamRng) -> Result<MmaStep>
where
    F: FnMut(&ExcitationSample) -> Result<bool>,
{
    if !level_indicator(current)? {
        return Err(Error::Contract("MMA seed is not in the current level".into()));
    }
    mma_step(current, level_indicator, proposal_sigma, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn in_level(z: &ExcitationSample) -> Result<bool> {
        Ok(z.as_slice()[0] > 1.0)
    }

    #[test]
    fn rejecting_every_component_keeps_the_seed_without_evaluation() {
        let current = ExcitationSample::new(vec![0.0; 3]).unwrap();
        // A huge proposal spread makes every component ratio vanish.
        let mut rng = stream(1, Purpose::Chain, 0, 0);
        let step = mma_step(&current, |_| panic!("must not evaluate"), 1e6, &mut rng).unwrap();
        assert_eq!(step.next, current);
        assert_eq!(step.accepted_components, 0);
        assert!(step.accepted_state);
        assert!(!step.evaluated);
    }

    #[test]
    fn candidate_outside_level_is_rejected() {
        let current = ExcitationSample::new(vec![1.5]).unwrap();
        let mut rng = stream(2, Purpose::Chain, 0, 0);
        let mut calls = 0;
        loop {
            let step = mma_step(&current, |_| {
                calls += 1;
                Ok(false)
            }, 1.0, &mut rng)
            .unwrap();
            assert_eq!(step.next, current);
            if step.evaluated {
                assert!(!step.accepted_state);
                break;
            }
        }
        assert_eq!(calls, 1);
    }

    #[test]
    fn checked_step_rejects_seed_outside_level() {
        let current = ExcitationSample::new(vec![0.5]).unwrap();
        let mut rng = stream(3, Purpose::Chain, 0, 0);
        assert!(matches!(
            mma_step_checked(&current, in_level, 1.0, &mut rng),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn chain_stays_in_level() {
        let mut z = ExcitationSample::new(vec![1.2]).unwrap();
        let mut rng = stream(4, Purpose::Chain, 0, 0);
        for _ in 0..1000 {
            z = mma_step(&z, in_level, 1.0, &mut rng).unwrap().next;
            assert!(z.as_slice()[0] > 1.0);
        }
    }
}

//! Trajectory splitting primitives.

use crate::error::{Error, Result};
use crate::rng::{standard_normal, StreamRng};
use crate::system::{ExcitationSample, PerformanceTrace};

/// First step at which the trace strictly exceeds `b`.
pub fn first_passage_index(trace: &PerformanceTrace, b: f64) -> Result<usize> {
    trace
        .values()
        .iter()
        .position(|&g| g > b)
        .ok_or_else(|| Error::Contract(format!("trace never exceeds {b}")))
}

/// Keeps the first `t_split` coordinates of the mother and redraws the rest.
pub fn split_offspring(mother_z: &ExcitationSample, t_split: usize, rng: &mut StreamRng) -> Result<ExcitationSample> {
    let dim = mother_z.dim();
    if t_split >= dim {
        return Err(Error::invalid(
            "t_split",
            format!("split index {t_split} must be below the dimension {dim}"),
        ));
    }
    let mut z = Vec::with_capacity(dim);
    z.extend_from_slice(&mother_z.as_slice()[..t_split]);
    z.extend((t_split..dim).map(|_| standard_normal(rng)));
    Ok(ExcitationSample::from_vec_unchecked(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LorenzModel, LorenzParams};
    use crate::rng::{standard_normal_sample, stream, Purpose};
    use crate::system::{max_performance, DynamicModel};

    fn trace(v: &[f64]) -> PerformanceTrace {
        PerformanceTrace::new(v.to_vec(), 0.1).unwrap()
    }

    #[test]
    fn first_passage_examples() {
        assert_eq!(first_passage_index(&trace(&[0.5, 1.2, 0.3]), 1.0).unwrap(), 1);
        assert_eq!(first_passage_index(&trace(&[2.0, 0.1]), 1.0).unwrap(), 0);
        assert!(matches!(
            first_passage_index(&trace(&[0.5, 1.0]), 1.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn last_split_changes_one_coordinate() {
        let mut rng = stream(1, Purpose::Offspring, 0, 0);
        let mother = standard_normal_sample(&mut rng, 8);
        let child = split_offspring(&mother, 7, &mut rng).unwrap();
        let diff = mother.as_slice().iter().zip(child.as_slice()).filter(|(a, b)| a != b).count();
        assert_eq!(diff, 1);
        assert!(split_offspring(&mother, 8, &mut rng).is_err());
    }

    #[test]
    fn offspring_passes_no_later_than_mother() {
        let model = LorenzModel::new(LorenzParams {
            horizon: 10.0,
            ..LorenzParams::default()
        })
        .unwrap();
        let mut rng = stream(2, Purpose::Sample, 0, 0);
        let mut checked = 0;
        while checked < 20 {
            let mother = standard_normal_sample(&mut rng, 100);
            let mtrace = model.evaluate(&mother).unwrap();
            let low = mtrace.values().iter().copied().fold(f64::INFINITY, f64::min);
            let b = 0.5 * (low + max_performance(&mtrace));
            let t = first_passage_index(&mtrace, b).unwrap();
            let keep = model.causal_prefix(t).unwrap();
            if keep >= 100 {
                continue;
            }
            let child = split_offspring(&mother, keep, &mut rng).unwrap();
            let ctrace = model.evaluate(&child).unwrap();
            assert!(first_passage_index(&ctrace, b).unwrap() <= t);
            checked += 1;
        }
    }
}

//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream addressed by
//! `(master seed, purpose, level, index)`. The seed and purpose select a
//! ChaCha8 key; level and index select the 64-bit ChaCha stream id. A sample
//! or Markov chain therefore sees the same numbers no matter which worker
//! evaluates it or in which order, so results do not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::system::ExcitationSample;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Level-0 draws for MCS, IS and subset simulation.
    Sample = 1,
    /// Nominal draws used to build importance densities.
    IsdSearch = 2,
    /// Markov chains at subset simulation levels.
    Chain = 3,
    /// Offspring suffixes for trajectory splitting.
    Offspring = 4,
}

const INDEX_BITS: u32 = 44;

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn key(seed: u64, purpose: Purpose) -> [u8; 32] {
    let mut out = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(purpose as u64).rotate_left(17);
    for chunk in out.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    out
}

/// Opens the stream for `(seed, purpose, level, index)`.
pub fn stream(seed: u64, purpose: Purpose, level: u32, index: u64) -> StreamRng {
    assert!(index < (1 << INDEX_BITS), "stream index {index} out of range");
    assert!(level < (1 << (64 - INDEX_BITS)), "stream level {level} out of range");
    let mut rng = ChaCha8Rng::from_seed(key(seed, purpose));
    rng.set_stream(((level as u64) << INDEX_BITS) | index);
    rng
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Draws `dim` i.i.d. standard normal coordinates, in order.
pub fn standard_normal_sample<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ExcitationSample {
    ExcitationSample::from_vec_unchecked((0..dim).map(|_| standard_normal(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_address_same_stream() {
        let mut a = stream(7, Purpose::Chain, 3, 11);
        let mut b = stream(7, Purpose::Chain, 3, 11);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn every_coordinate_of_the_address_matters() {
        let first = |mut r: StreamRng| r.next_u64();
        let base = first(stream(7, Purpose::Chain, 3, 11));
        assert_ne!(base, first(stream(8, Purpose::Chain, 3, 11)));
        assert_ne!(base, first(stream(7, Purpose::Offspring, 3, 11)));
        assert_ne!(base, first(stream(7, Purpose::Chain, 4, 11)));
        assert_ne!(base, first(stream(7, Purpose::Chain, 3, 12)));
    }

    #[test]
    fn normal_draws_have_unit_moments() {
        let mut rng = stream(1, Purpose::Sample, 0, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }
}

//! Standard normal helpers.

use statrs::function::erf::{erfc, erfc_inv};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Upper tail `Q(x) = P(Z > x)` for standard normal `Z`.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_upper_tail`] on `(0, 1)`.
pub fn normal_upper_tail_inv(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Log density of the `D`-dimensional standard normal.
pub fn standard_normal_log_density(z: &[f64]) -> f64 {
    let sq: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * sq - z.len() as f64 * LN_SQRT_2PI
}

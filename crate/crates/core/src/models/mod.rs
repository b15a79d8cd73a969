//! Concrete dynamic models.

mod gaussian_tail;
mod lorenz;

pub use gaussian_tail::{gaussian_tail_evaluate, GaussianTailModel, TailLayout};
pub use lorenz::{
    brownian_excitation, lorenz_rhs, simulate_lorenz, EllipsoidResponse, ForcingHold, LorenzModel,
    LorenzParams, DIVERGENCE_LIMIT,
};

//! Levy process descriptors, samplers and the small-ball kernel family.

mod energy_form;
mod exponent;
mod kappa;
mod kernel;
mod model;
pub mod sampler;

pub use energy_form::{cauchy_weighted_energy, energy_form, CAUCHY_TOLERANCE};
pub use exponent::{CharExponent, CustomPhi, LaplaceExponent};
pub use kappa::{
    kappa_monte_carlo, kappa_stable_1d, standard_ball_probability, McEstimate, KAPPA_TOLERANCE,
};
pub use kernel::{KernelFamily, EXACT_MC_SAMPLES};
pub use model::LevyModel;

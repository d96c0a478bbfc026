use serde::{Deserialize, Serialize};

use super::exponent::LaplaceExponent;
use super::kappa::{kappa_monte_carlo, kappa_stable_1d};
use super::model::LevyModel;
use crate::error::{Error, Result};
use crate::rng::mix;

/// Sample count used when an `Exact` kernel has to fall back to Monte Carlo.
pub const EXACT_MC_SAMPLES: usize = 20_000;

/// Kernel families `K_scale(r)`.
///
/// The scale is a radius `eps` for every kind except `SubordinatorExp`, where
/// it is the Laplace variable `lambda = 1/eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelFamily {
    /// The small-ball function `kappa_eps(r)` of the model.
    Exact { model: LevyModel },
    /// `(eps / r^(1/alpha) ∧ 1)^d`.
    StableSandwich { alpha: f64, d: usize },
    /// `(eps / r)^s ∧ 1`.
    FalconerHowroyd { s: f64 },
    /// `exp(-r Phi(lambda))`.
    SubordinatorExp { phi: LaplaceExponent },
}

impl KernelFamily {
    pub fn fh(s: f64) -> Self {
        KernelFamily::FalconerHowroyd { s }
    }

    pub fn subordinator(phi: LaplaceExponent) -> Self {
        KernelFamily::SubordinatorExp { phi }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelFamily::Exact { model } => model.validate(),
            KernelFamily::StableSandwich { alpha, d } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(Error::invalid("alpha", format!("{alpha} not in (0, 2]")));
                }
                if *d == 0 {
                    return Err(Error::invalid("d", "dimension must be positive"));
                }
                Ok(())
            }
            KernelFamily::FalconerHowroyd { s } => {
                if !(*s > 0.0 && s.is_finite()) {
                    return Err(Error::invalid("s", format!("{s} must be positive")));
                }
                Ok(())
            }
            KernelFamily::SubordinatorExp { phi } => phi.validate(),
        }
    }

    /// Short label, e.g. `fh:1.5` or `subexp:stable:0.5`.
    pub fn tag(&self) -> String {
        match self {
            KernelFamily::Exact { model } => format!("exact:{}", model.tag()),
            KernelFamily::StableSandwich { alpha, d } => format!("sandwich:{alpha},{d}"),
            KernelFamily::FalconerHowroyd { s } => format!("fh:{s}"),
            KernelFamily::SubordinatorExp { phi } => format!("subexp:{}", phi.tag()),
        }
    }

    /// `true` when `K_scale(r)` is known to be nonincreasing in `r`.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, KernelFamily::Exact { .. })
    }

    /// `true` when every kernel matrix of this family is positive semidefinite
    /// for structural reasons.
    pub fn is_psd_by_family(&self) -> bool {
        matches!(self, KernelFamily::SubordinatorExp { .. })
    }

    pub fn eval(&self, scale: f64, r: f64) -> Result<f64> {
        if !(scale > 0.0) {
            return Err(Error::invalid("scale", format!("{scale} must be positive")));
        }
        let r = r.abs();
        if r == 0.0 {
            return Ok(1.0);
        }
        let v = match self {
            KernelFamily::FalconerHowroyd { s } => (scale / r).powf(*s).min(1.0),
            KernelFamily::StableSandwich { alpha, d } => {
                (scale / r.powf(1.0 / alpha)).min(1.0).powi(*d as i32)
            }
            KernelFamily::SubordinatorExp { phi } => (-r * phi.eval(scale)).exp(),
            KernelFamily::Exact { model } => match model {
                LevyModel::IsotropicStable {
                    alpha,
                    scale: c,
                    d: 1,
                } => kappa_stable_1d(*alpha, *c, scale, r)?,
                _ => {
                    let seed = mix(&[scale.to_bits(), r.to_bits()]);
                    kappa_monte_carlo(model, scale, r, EXACT_MC_SAMPLES, seed)?.estimate
                }
            },
        };
        Ok(v.clamp(0.0, 1.0))
    }
}

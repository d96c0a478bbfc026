use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exponent::{CharExponent, LaplaceExponent};
use super::sampler;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// Levy process descriptor.
///
/// Serialized as a flat record tagged by `kind`, e.g.
/// `{"kind": "isotropic_stable", "alpha": 0.8, "scale": 1, "d": 1}` or
/// `{"kind": "subordinator", "phi": {"family": "stable", "params": {"beta": 0.5}}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyModel {
    /// `Psi(z) = scale * |z|^alpha`.
    IsotropicStable {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one_usize")]
        d: usize,
    },
    Subordinator { phi: LaplaceExponent },
    /// Brownian motion (variance `2s` per coordinate at time `s`) run at the
    /// clock of a subordinator: `Psi(z) = Phi(|z|^2)`.
    SubordinateBrownian {
        phi: LaplaceExponent,
        #[serde(default = "one_usize")]
        d: usize,
    },
}

impl LevyModel {
    pub fn stable(alpha: f64) -> Self {
        LevyModel::IsotropicStable {
            alpha,
            scale: 1.0,
            d: 1,
        }
    }

    pub fn brownian() -> Self {
        Self::stable(2.0)
    }

    pub fn subordinator(phi: LaplaceExponent) -> Self {
        LevyModel::Subordinator { phi }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LevyModel::IsotropicStable { alpha, scale, d } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(Error::invalid("alpha", format!("{alpha} not in (0, 2]")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid("scale", format!("{scale} must be positive")));
                }
                if *d == 0 {
                    return Err(Error::invalid("d", "dimension must be positive"));
                }
            }
            LevyModel::Subordinator { phi } => phi.validate()?,
            LevyModel::SubordinateBrownian { phi, d } => {
                phi.validate()?;
                if *d == 0 {
                    return Err(Error::invalid("d", "dimension must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            LevyModel::IsotropicStable { d, .. } | LevyModel::SubordinateBrownian { d, .. } => *d,
            LevyModel::Subordinator { .. } => 1,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            LevyModel::IsotropicStable { alpha, scale, d } => {
                if *scale == 1.0 && *d == 1 {
                    format!("stable:{alpha}")
                } else {
                    format!("stable:{alpha},{scale},{d}")
                }
            }
            LevyModel::Subordinator { phi } => format!("subordinator:{}", phi.tag()),
            LevyModel::SubordinateBrownian { phi, d } => format!("subbm:{d}:{}", phi.tag()),
        }
    }

    /// Parses `stable:alpha[,scale[,d]]`, `bm`, `subordinator:<phi>`, `subbm:<d>:<phi>`.
    pub fn parse(s: &str) -> Result<Self> {
        let model = if s == "bm" || s == "brownian" {
            Self::brownian()
        } else if let Some(rest) = s.strip_prefix("stable:") {
            let nums: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid("model", format!("`{s}`: {e}")))?;
            match nums.as_slice() {
                [alpha] => Self::stable(*alpha),
                [alpha, scale] => LevyModel::IsotropicStable {
                    alpha: *alpha,
                    scale: *scale,
                    d: 1,
                },
                [alpha, scale, d] if d.fract() == 0.0 && *d >= 1.0 => LevyModel::IsotropicStable {
                    alpha: *alpha,
                    scale: *scale,
                    d: *d as usize,
                },
                _ => return Err(Error::invalid("model", format!("bad stable model `{s}`"))),
            }
        } else if let Some(rest) = s.strip_prefix("subordinator:") {
            LevyModel::Subordinator {
                phi: LaplaceExponent::parse(rest)?,
            }
        } else if let Some(rest) = s.strip_prefix("subbm:") {
            let (d, phi) = rest
                .split_once(':')
                .ok_or_else(|| Error::invalid("model", format!("bad subordinate model `{s}`")))?;
            let d: usize = d
                .parse()
                .map_err(|e| Error::invalid("model", format!("`{s}`: {e}")))?;
            LevyModel::SubordinateBrownian {
                phi: LaplaceExponent::parse(phi)?,
                d,
            }
        } else {
            return Err(Error::invalid("model", format!("unrecognized model `{s}`")));
        };
        model.validate()?;
        Ok(model)
    }

    pub fn char_exponent(&self) -> Result<CharExponent> {
        match self {
            LevyModel::IsotropicStable { alpha, scale, d } => Ok(CharExponent::IsotropicStable {
                alpha: *alpha,
                scale: *scale,
                dim: *d,
            }),
            LevyModel::Subordinator { phi } => {
                if phi.char_exponent(1.0).is_none() {
                    return Err(Error::NoCharExponent(self.tag()));
                }
                Ok(CharExponent::Subordinator(phi.clone()))
            }
            LevyModel::SubordinateBrownian { phi, d } => Ok(CharExponent::SubordinateBrownian {
                phi: phi.clone(),
                dim: *d,
            }),
        }
    }

    /// Identifier of the exact increment sampler, if the model has one.
    pub fn sampler_recipe(&self) -> Option<&'static str> {
        fn subordinator_recipe(phi: &LaplaceExponent) -> Option<&'static str> {
            match phi {
                LaplaceExponent::Stable { beta, .. } if *beta == 1.0 => Some("drift"),
                LaplaceExponent::Stable { .. } => Some("kanter-positive-stable"),
                LaplaceExponent::Gamma { .. } => Some("gamma-variates"),
                LaplaceExponent::CompoundPoissonDrift { .. } => Some("compound-poisson"),
                LaplaceExponent::Tabulated { .. } | LaplaceExponent::Custom(_) => None,
            }
        }
        match self {
            LevyModel::IsotropicStable { d: 1, .. } => Some("chambers-mallows-stuck"),
            LevyModel::IsotropicStable { .. } => Some("gaussian-subordination"),
            LevyModel::Subordinator { phi } => subordinator_recipe(phi),
            LevyModel::SubordinateBrownian { phi, .. } => {
                subordinator_recipe(phi).map(|_| "subordinated-gaussian")
            }
        }
    }

    /// Self-similarity index when the model is strictly stable: `alpha` for
    /// stable processes, `beta` for stable subordinators and `2 beta` for
    /// Brownian motion run at a `beta`-stable clock.
    pub fn index(&self) -> Option<f64> {
        match self {
            LevyModel::IsotropicStable { alpha, .. } => Some(*alpha),
            LevyModel::Subordinator { phi } => phi.stable_index(),
            LevyModel::SubordinateBrownian { phi, .. } => phi.stable_index().map(|b| 2.0 * b),
        }
    }

    pub fn is_subordinator(&self) -> bool {
        matches!(self, LevyModel::Subordinator { .. })
    }

    /// Draws `X(t + dt) - X(t)` into `out` (length `dim()`).
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.dim());
        if dt <= 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        match self {
            LevyModel::IsotropicStable { alpha, scale, d } => {
                if *d == 1 {
                    out[0] = (scale * dt).powf(1.0 / alpha) * sampler::symmetric_stable(*alpha, rng);
                } else {
                    let clock = if *alpha == 2.0 {
                        scale * dt
                    } else {
                        (scale * dt).powf(2.0 / alpha) * sampler::positive_stable(alpha / 2.0, rng)
                    };
                    gaussian_at(clock, rng, out);
                }
            }
            LevyModel::Subordinator { phi } => {
                out[0] = subordinator_increment(phi, dt, rng).ok_or_else(|| Error::NoSampler(self.tag()))?;
            }
            LevyModel::SubordinateBrownian { phi, .. } => {
                let clock =
                    subordinator_increment(phi, dt, rng).ok_or_else(|| Error::NoSampler(self.tag()))?;
                gaussian_at(clock, rng, out);
            }
        }
        Ok(())
    }
}

fn gaussian_at<R: Rng + ?Sized>(clock: f64, rng: &mut R, out: &mut [f64]) {
    let sd = (2.0 * clock).sqrt();
    for v in out.iter_mut() {
        *v = sd * sampler::standard_normal(rng);
    }
}

fn subordinator_increment<R: Rng + ?Sized>(phi: &LaplaceExponent, dt: f64, rng: &mut R) -> Option<f64> {
    Some(match phi {
        LaplaceExponent::Stable { beta, scale } => {
            if *beta == 1.0 {
                scale * dt
            } else {
                (scale * dt).powf(1.0 / beta) * sampler::positive_stable(*beta, rng)
            }
        }
        LaplaceExponent::Gamma { a, b } => sampler::gamma(a * dt, *b, rng),
        LaplaceExponent::CompoundPoissonDrift {
            rate,
            jump_mean,
            drift,
        } => {
            let jumps = sampler::poisson(rate * dt, rng);
            (0..jumps).map(|_| sampler::exponential(*jump_mean, rng)).sum::<f64>() + drift * dt
        }
        LaplaceExponent::Tabulated { .. } | LaplaceExponent::Custom(_) => return None,
    })
}

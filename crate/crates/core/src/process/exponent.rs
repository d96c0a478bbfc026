//! Characteristic and Laplace exponents.
//!
//! Conventions: `E exp(i z.X(t)) = exp(-t Psi(z))` and, for subordinators,
//! `E exp(-lambda S(t)) = exp(-t Phi(lambda))`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A user-supplied Laplace exponent. Not serializable.
#[derive(Clone)]
pub struct CustomPhi {
    pub label: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomPhi {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomPhi({})", self.label)
    }
}

impl PartialEq for CustomPhi {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

fn one() -> f64 {
    1.0
}

/// Laplace exponent of a subordinator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum LaplaceExponent {
    /// `scale * lambda^beta`, `beta` in `(0, 1]`; `beta = 1` is a pure drift.
    Stable {
        beta: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `a * ln(1 + lambda / b)`.
    Gamma { a: f64, b: f64 },
    /// Poisson jumps at `rate` with exponential sizes of mean `jump_mean`, plus a drift:
    /// `rate * lambda m / (1 + lambda m) + drift * lambda`.
    CompoundPoissonDrift {
        rate: f64,
        jump_mean: f64,
        drift: f64,
    },
    /// Piecewise linear through `(0, 0)` and the nodes, power-law beyond the last node.
    Tabulated { lambdas: Vec<f64>, values: Vec<f64> },
    #[serde(skip)]
    Custom(CustomPhi),
}

impl LaplaceExponent {
    pub fn stable(beta: f64) -> Self {
        LaplaceExponent::Stable { beta, scale: 1.0 }
    }

    pub fn drift(rate: f64) -> Self {
        LaplaceExponent::Stable {
            beta: 1.0,
            scale: rate,
        }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LaplaceExponent::Custom(CustomPhi::new(label, f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LaplaceExponent::Stable { beta, scale } => {
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return Err(Error::invalid("beta", format!("{beta} not in (0, 1]")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid("scale", format!("{scale} must be positive")));
                }
            }
            LaplaceExponent::Gamma { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(Error::invalid("a,b", "gamma parameters must be positive"));
                }
            }
            LaplaceExponent::CompoundPoissonDrift {
                rate,
                jump_mean,
                drift,
            } => {
                if !(*rate >= 0.0 && *jump_mean > 0.0 && *drift >= 0.0) || *rate + *drift == 0.0 {
                    return Err(Error::invalid(
                        "rate,jump_mean,drift",
                        "need rate >= 0, jump_mean > 0, drift >= 0, not all trivial",
                    ));
                }
            }
            LaplaceExponent::Tabulated { lambdas, values } => {
                if lambdas.is_empty() || lambdas.len() != values.len() {
                    return Err(Error::invalid("lambdas", "need matching non-empty tables"));
                }
                let mut prev = (0.0, 0.0);
                let mut prev_slope = f64::INFINITY;
                for (&l, &v) in lambdas.iter().zip(values) {
                    if !(l > prev.0) || v < prev.1 {
                        return Err(Error::invalid(
                            "lambdas",
                            "nodes must be strictly increasing in lambda and nondecreasing in value",
                        ));
                    }
                    let slope = (v - prev.1) / (l - prev.0);
                    if slope > prev_slope * (1.0 + 1e-12) {
                        return Err(Error::invalid("values", "table is not concave"));
                    }
                    prev_slope = slope;
                    prev = (l, v);
                }
                if values[values.len() - 1] <= 0.0 {
                    return Err(Error::invalid("values", "table is identically zero"));
                }
            }
            LaplaceExponent::Custom(_) => {}
        }
        Ok(())
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        match self {
            LaplaceExponent::Stable { beta, scale } => scale * lambda.powf(*beta),
            LaplaceExponent::Gamma { a, b } => a * (lambda / b).ln_1p(),
            LaplaceExponent::CompoundPoissonDrift {
                rate,
                jump_mean,
                drift,
            } => {
                let lm = lambda * jump_mean;
                rate * lm / (1.0 + lm) + drift * lambda
            }
            LaplaceExponent::Tabulated { lambdas, values } => tabulated(lambdas, values, lambda),
            LaplaceExponent::Custom(c) => (c.f)(lambda),
        }
    }

    /// `Psi(xi) = Phi(-i xi)`, when an analytic continuation is available.
    pub fn char_exponent(&self, xi: f64) -> Option<Complex64> {
        if xi == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let w = Complex64::new(0.0, -xi);
        match self {
            LaplaceExponent::Stable { beta, scale } => {
                if *beta == 1.0 {
                    Some(w * scale)
                } else {
                    // Principal branch: arg(-i xi) = -sgn(xi) pi/2.
                    let modulus = scale * xi.abs().powf(*beta);
                    let phase = -xi.signum() * beta * std::f64::consts::FRAC_PI_2;
                    Some(Complex64::from_polar(modulus, phase))
                }
            }
            LaplaceExponent::Gamma { a, b } => Some((Complex64::new(1.0, 0.0) + w / b).ln() * a),
            LaplaceExponent::CompoundPoissonDrift {
                rate,
                jump_mean,
                drift,
            } => {
                let wm = w * jump_mean;
                Some(wm / (Complex64::new(1.0, 0.0) + wm) * rate + w * drift)
            }
            LaplaceExponent::Tabulated { .. } | LaplaceExponent::Custom(_) => None,
        }
    }

    /// Stability index when the family is a stable subordinator.
    pub fn stable_index(&self) -> Option<f64> {
        match self {
            LaplaceExponent::Stable { beta, .. } => Some(*beta),
            _ => None,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            LaplaceExponent::Stable { beta, scale } if *beta == 1.0 => format!("drift:{scale}"),
            LaplaceExponent::Stable { beta, scale } if *scale == 1.0 => format!("stable:{beta}"),
            LaplaceExponent::Stable { beta, scale } => format!("stable:{beta},{scale}"),
            LaplaceExponent::Gamma { a, b } => format!("gamma:{a},{b}"),
            LaplaceExponent::CompoundPoissonDrift {
                rate,
                jump_mean,
                drift,
            } => format!("cpd:{rate},{jump_mean},{drift}"),
            LaplaceExponent::Tabulated { lambdas, .. } => format!("tabulated:{}", lambdas.len()),
            LaplaceExponent::Custom(c) => format!("custom:{}", c.label),
        }
    }

    /// Parses the short forms `stable:b[,c]`, `drift:c`, `gamma:a,b`,
    /// `cpd:rate,mean,drift`.
    pub fn parse(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid("phi", format!("`{s}`: {e}")))?
        };
        let phi = match (family, nums.as_slice()) {
            ("stable", [beta]) => LaplaceExponent::stable(*beta),
            ("stable", [beta, scale]) => LaplaceExponent::Stable {
                beta: *beta,
                scale: *scale,
            },
            ("drift", []) => LaplaceExponent::drift(1.0),
            ("drift", [c]) => LaplaceExponent::drift(*c),
            ("gamma", [a, b]) => LaplaceExponent::Gamma { a: *a, b: *b },
            ("cpd", [rate, jump_mean, drift]) => LaplaceExponent::CompoundPoissonDrift {
                rate: *rate,
                jump_mean: *jump_mean,
                drift: *drift,
            },
            _ => return Err(Error::invalid("phi", format!("unrecognized Laplace exponent `{s}`"))),
        };
        phi.validate()?;
        Ok(phi)
    }
}

fn tabulated(lambdas: &[f64], values: &[f64], lambda: f64) -> f64 {
    let last = lambdas.len() - 1;
    if lambda >= lambdas[last] {
        let (l0, v0) = if last == 0 {
            (0.0, 0.0)
        } else {
            (lambdas[last - 1], values[last - 1])
        };
        let slope = (values[last] - v0) / (lambdas[last] - l0);
        let p = (slope * lambdas[last] / values[last]).clamp(0.0, 1.0);
        return values[last] * (lambda / lambdas[last]).powf(p);
    }
    let k = lambdas.partition_point(|&l| l <= lambda);
    let (l0, v0) = if k == 0 {
        (0.0, 0.0)
    } else {
        (lambdas[k - 1], values[k - 1])
    };
    v0 + (values[k] - v0) * (lambda - l0) / (lambdas[k] - l0)
}

type ExponentFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Characteristic exponent `Psi` of a Levy process on `R^d`.
#[derive(Clone)]
pub enum CharExponent {
    /// `scale * |z|^alpha` with the Euclidean norm.
    IsotropicStable { alpha: f64, scale: f64, dim: usize },
    Subordinator(LaplaceExponent),
    /// Brownian motion with `E exp(i z.B(s)) = exp(-s|z|^2)` run at subordinator time:
    /// `Psi(z) = Phi(|z|^2)`.
    SubordinateBrownian { phi: LaplaceExponent, dim: usize },
    Custom {
        label: String,
        dim: usize,
        symmetric: bool,
        f: ExponentFn,
    },
}

impl fmt::Debug for CharExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharExponent({})", self.label())
    }
}

impl CharExponent {
    pub fn custom(
        label: impl Into<String>,
        dim: usize,
        symmetric: bool,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        CharExponent::Custom {
            label: label.into(),
            dim,
            symmetric,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CharExponent::IsotropicStable { dim, .. }
            | CharExponent::SubordinateBrownian { dim, .. }
            | CharExponent::Custom { dim, .. } => *dim,
            CharExponent::Subordinator(_) => 1,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            CharExponent::IsotropicStable { .. } | CharExponent::SubordinateBrownian { .. } => true,
            CharExponent::Subordinator(_) => false,
            CharExponent::Custom { symmetric, .. } => *symmetric,
        }
    }

    pub fn label(&self) -> String {
        match self {
            CharExponent::IsotropicStable { alpha, scale, dim } => {
                format!("isotropic_stable(alpha={alpha},c={scale},d={dim})")
            }
            CharExponent::Subordinator(phi) => format!("subordinator({})", phi.tag()),
            CharExponent::SubordinateBrownian { phi, dim } => {
                format!("subordinate_brownian({},d={dim})", phi.tag())
            }
            CharExponent::Custom { label, .. } => label.clone(),
        }
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.dim());
        match self {
            CharExponent::IsotropicStable { alpha, scale, .. } => {
                let norm2: f64 = z.iter().map(|v| v * v).sum();
                Complex64::new(scale * norm2.powf(alpha / 2.0), 0.0)
            }
            CharExponent::Subordinator(phi) => phi
                .char_exponent(z[0])
                .expect("subordinator exponent checked at construction"),
            CharExponent::SubordinateBrownian { phi, .. } => {
                let norm2: f64 = z.iter().map(|v| v * v).sum();
                Complex64::new(phi.eval(norm2), 0.0)
            }
            CharExponent::Custom { f, .. } => f(z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<LaplaceExponent> {
        vec![
            LaplaceExponent::stable(0.3),
            LaplaceExponent::stable(0.5),
            LaplaceExponent::Stable { beta: 0.8, scale: 2.5 },
            LaplaceExponent::drift(1.0),
            LaplaceExponent::Gamma { a: 1.0, b: 1.0 },
            LaplaceExponent::Gamma { a: 2.0, b: 0.5 },
            LaplaceExponent::CompoundPoissonDrift {
                rate: 3.0,
                jump_mean: 0.5,
                drift: 0.1,
            },
            LaplaceExponent::CompoundPoissonDrift {
                rate: 2.0,
                jump_mean: 1.0,
                drift: 0.0,
            },
            LaplaceExponent::Tabulated {
                lambdas: vec![1.0, 4.0, 16.0],
                values: vec![1.0, 2.0, 3.0],
            },
        ]
    }

    #[test]
    fn phi_vanishes_at_zero_and_is_monotone_concave() {
        for phi in families() {
            phi.validate().unwrap();
            assert_eq!(phi.eval(0.0), 0.0);
            let h = 0.01;
            let grid: Vec<f64> = (0..2000).map(|k| k as f64 * h).collect();
            let vals: Vec<f64> = grid.iter().map(|&l| phi.eval(l)).collect();
            for w in vals.windows(3) {
                assert!(w[1] >= w[0] - 1e-12, "{} not monotone", phi.tag());
                assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9, "{} not concave", phi.tag());
            }
        }
    }

    #[test]
    fn char_exponent_has_nonnegative_real_part() {
        for phi in families() {
            let Some(_) = phi.char_exponent(1.0) else { continue };
            for k in -200..=200 {
                let xi = k as f64 * 0.37;
                let psi = phi.char_exponent(xi).unwrap();
                assert!(psi.re >= -1e-12, "{} at {xi}: {psi}", phi.tag());
                // Psi(-xi) is the conjugate of Psi(xi).
                let m = phi.char_exponent(-xi).unwrap();
                assert!((m - psi.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn stable_psi_is_symmetric_and_real() {
        let psi = CharExponent::IsotropicStable {
            alpha: 1.3,
            scale: 2.0,
            dim: 2,
        };
        let a = psi.eval(&[0.3, -1.2]);
        let b = psi.eval(&[-0.3, 1.2]);
        assert_eq!(a, b);
        assert_eq!(a.im, 0.0);
        assert_eq!(psi.eval(&[0.0, 0.0]).re, 0.0);
    }

    #[test]
    fn parse_short_forms() {
        assert_eq!(LaplaceExponent::parse("stable:0.5").unwrap(), LaplaceExponent::stable(0.5));
        assert_eq!(LaplaceExponent::parse("drift").unwrap(), LaplaceExponent::drift(1.0));
        assert_eq!(
            LaplaceExponent::parse("gamma:1,2").unwrap(),
            LaplaceExponent::Gamma { a: 1.0, b: 2.0 }
        );
        assert!(LaplaceExponent::parse("stable:1.5").is_err());
        assert!(LaplaceExponent::parse("weird:1").is_err());
    }

    #[test]
    fn serializes_as_family_and_params() {
        let json = serde_json::to_value(LaplaceExponent::stable(0.5)).unwrap();
        assert_eq!(json["family"], "stable");
        assert_eq!(json["params"]["beta"], 0.5);
        let back: LaplaceExponent = serde_json::from_value(json).unwrap();
        assert_eq!(back, LaplaceExponent::stable(0.5));
    }

    #[test]
    fn tabulated_rejects_convex_tables() {
        let phi = LaplaceExponent::Tabulated {
            lambdas: vec![1.0, 2.0],
            values: vec![1.0, 3.0],
        };
        assert!(phi.validate().is_err());
    }
}

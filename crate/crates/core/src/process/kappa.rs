//! The small-ball function `kappa_eps(t) = P{X(t) in B(0, eps)}` (open
//! l-infinity ball).

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::LevyModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::rng::stream;

/// Error target of the small-ball quadrature.
pub const KAPPA_TOLERANCE: f64 = 1e-8;
/// The Fourier integrand is cut where `exp(-z^alpha)` drops below this.
pub const FOURIER_CUTOFF: f64 = 1e-16;
/// Above this many half-periods of `sin(xz)` the Fourier route hands over to
/// the non-oscillatory integral.
const FOURIER_HALF_PERIODS: f64 = 4000.0;
/// Hard ceiling on half-periods, used near `alpha = 1` where the
/// non-oscillatory integral is ill-conditioned.
const FOURIER_HALF_PERIODS_MAX: f64 = 100_000.0;

/// `P{|X(t)| <= eps}` for the symmetric stable process on the line with
/// `Psi(z) = c|z|^alpha`.
pub fn kappa_stable_1d(alpha: f64, c: f64, eps: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0, 2]")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("c", format!("{c} must be positive")));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", format!("{eps} must be positive")));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("{t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    // X(t) has the law of (ct)^(1/alpha) X(1).
    let x = eps / (c * t).powf(1.0 / alpha);
    standard_ball_probability(alpha, x)
}

/// `P{|Y| <= x}` for `E exp(iuY) = exp(-|u|^alpha)`.
pub fn standard_ball_probability(alpha: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let z_max = (-FOURIER_CUTOFF.ln()).powf(1.0 / alpha);
    let half_periods = x * z_max / PI;
    let near_cauchy = (alpha - 1.0).abs() < 0.1;
    let p = if half_periods <= FOURIER_HALF_PERIODS
        || (near_cauchy && half_periods <= FOURIER_HALF_PERIODS_MAX)
    {
        fourier_inversion(alpha, x, z_max)?
    } else if !near_cauchy {
        zolotarev(alpha, x)?
    } else {
        return Err(Error::NonConvergedQuadrature {
            estimate: f64::NAN,
            error: f64::INFINITY,
            target: KAPPA_TOLERANCE,
        });
    };
    Ok(p.clamp(0.0, 1.0))
}

/// `(2/pi) int_0^zmax sin(xz)/z exp(-z^alpha) dz`, one half-period of the
/// sine at a time.
pub fn fourier_inversion(alpha: f64, x: f64, z_max: f64) -> Result<f64> {
    let integrand = |z: f64| {
        let damp = (-z.powf(alpha)).exp();
        if z * x < 1e-8 {
            x * damp
        } else {
            (x * z).sin() / z * damp
        }
    };
    let step = PI / x;
    let chunks = (z_max / step).ceil().max(1.0) as usize;
    let per_chunk = (KAPPA_TOLERANCE / (4.0 * chunks as f64)).max(1e-15);
    let opts = QuadOptions {
        abs_tol: per_chunk,
        rel_tol: 0.0,
        max_subdivisions: 200,
    };
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..chunks {
        let a = k as f64 * step;
        let b = ((k + 1) as f64 * step).min(z_max);
        let r = integrate(integrand, a, b, opts)?;
        total += r.value;
        err += r.error;
    }
    let value = 2.0 / PI * total;
    let error = 2.0 / PI * err;
    if error > KAPPA_TOLERANCE {
        return Err(Error::NonConvergedQuadrature {
            estimate: value,
            error,
            target: KAPPA_TOLERANCE,
        });
    }
    Ok(value)
}

/// Non-oscillatory integral representation of the symmetric stable
/// distribution function (Zolotarev), valid for `alpha != 1`.
pub fn zolotarev(alpha: f64, x: f64) -> Result<f64> {
    debug_assert!(alpha != 1.0);
    let p = alpha / (alpha - 1.0);
    let lnx = x.ln();
    let integrand = |theta: f64| {
        if theta <= 0.0 || theta >= FRAC_PI_2 {
            return 0.0;
        }
        let ln_g = p * (lnx + theta.cos().ln() - (alpha * theta).sin().ln())
            + ((alpha - 1.0) * theta).cos().ln()
            - theta.cos().ln();
        (-ln_g.exp()).exp()
    };
    let r = integrate(
        integrand,
        0.0,
        FRAC_PI_2,
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        },
    )?;
    if r.error > KAPPA_TOLERANCE {
        return Err(Error::NonConvergedQuadrature {
            estimate: r.value,
            error: r.error,
            target: KAPPA_TOLERANCE,
        });
    }
    let tail = r.value / PI;
    // alpha < 1: F(x) = 1/2 + I/pi; alpha > 1: F(x) = 1 - I/pi; P = 2F - 1.
    Ok(if alpha < 1.0 { 2.0 * tail } else { 1.0 - 2.0 * tail })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub samples: usize,
}

const MC_BATCH: usize = 8192;

/// Empirical fraction of `n` draws of `X(t)` in the open ball `B(0, eps)`,
/// with a 95% normal-approximation half width.
pub fn kappa_monte_carlo(model: &LevyModel, eps: f64, t: f64, n: usize, seed: u64) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::invalid("n", format!("{n} < 1000 samples")));
    }
    if !(eps > 0.0) || !(t >= 0.0) {
        return Err(Error::invalid("eps,t", "need eps > 0 and t >= 0"));
    }
    if model.sampler_recipe().is_none() {
        return Err(Error::NoSampler(model.tag()));
    }
    if t == 0.0 {
        return Ok(McEstimate {
            estimate: 1.0,
            half_width: 0.0,
            samples: n,
        });
    }
    let d = model.dim();
    let batches = n.div_ceil(MC_BATCH);
    let hits: usize = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<usize> {
            let mut rng = stream(seed, b as u64);
            let mut x = vec![0.0; d];
            let len = MC_BATCH.min(n - b * MC_BATCH);
            let mut hits = 0;
            for _ in 0..len {
                model.sample_increment(t, &mut rng, &mut x)?;
                if x.iter().all(|v| v.abs() < eps) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let p = hits as f64 / n as f64;
    Ok(McEstimate {
        estimate: p,
        half_width: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // erf via its Maclaurin series; adequate for |x| <= 3 in tests.
    fn erf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn time_zero_is_one() {
        assert_eq!(kappa_stable_1d(2.0, 1.0, 0.3, 0.0).unwrap(), 1.0);
        assert_eq!(kappa_stable_1d(0.5, 1.0, 1e-9, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_and_cauchy_closed_forms() {
        let g = kappa_stable_1d(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((g - erf(0.5)).abs() < 1e-8, "{g}");
        assert!((g - 0.5205).abs() < 1e-4);
        let c = kappa_stable_1d(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((c - 0.5).abs() < 1e-8, "{c}");
        // Cauchy at large x goes through the long Fourier route.
        let x = 500.0;
        let c = standard_ball_probability(1.0, x).unwrap();
        assert!((c - 2.0 / PI * x.atan()).abs() < 1e-7);
    }

    #[test]
    fn fourier_and_zolotarev_agree() {
        for &alpha in &[0.4, 0.7, 1.3, 1.8, 2.0] {
            for &x in &[0.05, 0.5, 2.0, 8.0] {
                let z_max = (-FOURIER_CUTOFF.ln()).powf(1.0 / alpha);
                let f = fourier_inversion(alpha, x, z_max).unwrap();
                let z = zolotarev(alpha, x).unwrap();
                assert!((f - z).abs() < 2e-8, "alpha {alpha} x {x}: {f} vs {z}");
            }
        }
    }

    #[test]
    fn extreme_ratio_uses_the_non_oscillatory_route() {
        let p = kappa_stable_1d(0.5, 1.0, 1.0, 1e-6).unwrap();
        assert!(p > 0.99 && p <= 1.0);
        let q = kappa_stable_1d(1.7, 1.0, 1e-3, 1e3).unwrap();
        assert!(q > 0.0 && q < 1e-3);
    }

    #[test]
    fn monotone_in_radius_and_continuous_in_time() {
        for &alpha in &[0.6, 1.0, 1.5, 2.0] {
            let mut prev = 0.0;
            for k in 1..40 {
                let eps = 0.05 * k as f64;
                let v = kappa_stable_1d(alpha, 1.0, eps, 0.7).unwrap();
                assert!(v >= prev - 1e-10);
                prev = v;
            }
            let h = 1e-4;
            for k in 1..20 {
                let t = 0.05 * k as f64;
                let a = kappa_stable_1d(alpha, 1.0, 0.2, t).unwrap();
                let b = kappa_stable_1d(alpha, 1.0, 0.2, t + h).unwrap();
                assert!((a - b).abs() < 1e-2, "alpha {alpha} t {t}");
            }
        }
    }

    #[test]
    fn monte_carlo_at_time_zero() {
        let m = LevyModel::stable(1.2);
        let r = kappa_monte_carlo(&m, 0.5, 0.0, 10_000, 1).unwrap();
        assert_eq!((r.estimate, r.half_width), (1.0, 0.0));
    }

    #[test]
    fn monte_carlo_rejects_small_samples_and_samplerless_models() {
        let m = LevyModel::stable(1.2);
        assert!(kappa_monte_carlo(&m, 0.5, 1.0, 999, 1).is_err());
        let tab = LevyModel::subordinator(crate::process::LaplaceExponent::Tabulated {
            lambdas: vec![1.0],
            values: vec![1.0],
        });
        assert!(matches!(
            kappa_monte_carlo(&tab, 0.5, 1.0, 5000, 1),
            Err(Error::NoSampler(_))
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let m = LevyModel::stable(0.9);
        let a = kappa_monte_carlo(&m, 0.5, 1.0, 20_000, 42).unwrap();
        let b = kappa_monte_carlo(&m, 0.5, 1.0, 20_000, 42).unwrap();
        assert_eq!(a, b);
    }
}

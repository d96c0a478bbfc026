//! Exact variates for stable and related laws.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Symmetric stable variate with `E exp(iuX) = exp(-|u|^alpha)`, by the
/// Chambers-Mallows-Stuck transform.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (open_unit(rng) - 0.5) * PI;
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    if alpha == 2.0 {
        // sin(2v)/sqrt(cos v) * sqrt(w/cos v) = 2 sin(v) sqrt(w)
        return 2.0 * v.sin() * w.sqrt();
    }
    (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable variate with `E exp(-lambda S) = exp(-lambda^beta)`,
/// `beta` in `(0, 1)`, by Kanter's representation.
pub fn positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    debug_assert!(beta > 0.0 && beta < 1.0);
    let v = open_unit(rng) * PI;
    let w: f64 = Exp1.sample(rng);
    (beta * v).sin() / v.sin().powf(1.0 / beta)
        * (((1.0 - beta) * v).sin() / w).powf((1.0 - beta) / beta)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    if shape <= 0.0 {
        return 0.0;
    }
    Gamma::new(shape, 1.0 / rate)
        .expect("validated gamma parameters")
        .sample(rng)
}

pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

pub fn exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    mean * e
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn cms_alpha_two_has_variance_two() {
        let mut rng = stream(3, 0);
        let n = 200_000;
        let s: f64 = (0..n).map(|_| symmetric_stable(2.0, &mut rng).powi(2)).sum();
        assert!((s / n as f64 - 2.0).abs() < 0.03);
    }

    #[test]
    fn cms_characteristic_function() {
        // E cos(uX) = exp(-|u|^alpha)
        for &alpha in &[0.5, 0.8, 1.0, 1.5] {
            let mut rng = stream(11, 0);
            let n = 200_000;
            let u = 0.7;
            let m: f64 = (0..n)
                .map(|_| (u * symmetric_stable(alpha, &mut rng)).cos())
                .sum::<f64>()
                / n as f64;
            let expected = (-u.powf(alpha)).exp();
            assert!((m - expected).abs() < 0.006, "alpha {alpha}: {m} vs {expected}");
        }
    }

    #[test]
    fn kanter_laplace_transform() {
        for &beta in &[0.3, 0.5, 0.8] {
            let mut rng = stream(5, 1);
            let n = 200_000;
            let lambda = 1.3;
            let m: f64 = (0..n)
                .map(|_| (-lambda * positive_stable(beta, &mut rng)).exp())
                .sum::<f64>()
                / n as f64;
            let expected = (-lambda.powf(beta)).exp();
            assert!((m - expected).abs() < 0.004, "beta {beta}: {m} vs {expected}");
        }
    }
}

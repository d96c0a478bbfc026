use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{LadderEstimate, ScaleAxis, SlopeMode, ValueAxis};
use crate::process::LaplaceExponent;
use crate::quadrature::{integrate, QuadOptions};

/// Default upper end of the theta-index grid.
pub const THETA_LAMBDA_MAX: f64 = 1e40;
/// Grid points per decade of lambda for the theta index.
pub const THETA_POINTS_PER_DECADE: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Upper,
    Lower,
}

/// Envelope slope of `ln Phi` against `ln lambda` over a ladder spanning at
/// least eight decades.
pub fn phi_index(phi: &LaplaceExponent, lambdas: &[f64], which: IndexKind) -> Result<f64> {
    phi.validate()?;
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 8.0 - 1e-9 {
        return Err(Error::InvalidLadder(format!(
            "lambda ladder [{lo:e}, {hi:e}] spans fewer than 8 decades"
        )));
    }
    let values: Vec<f64> = lambdas.iter().map(|&l| phi.eval(l)).collect();
    let mode = match which {
        IndexKind::Upper => SlopeMode::Upper,
        IndexKind::Lower => SlopeMode::Lower,
    };
    Ok(LadderEstimate::fit(lambdas.to_vec(), values, ScaleAxis::Log, ValueAxis::Log, mode)?.slope)
}

/// `lambda_k = 10^(k / per_decade)` for `k = 1, ..` up to `lambda_max`.
pub fn theta_grid(lambda_max: f64) -> Vec<f64> {
    let top = (lambda_max.log10() * THETA_POINTS_PER_DECADE as f64).floor() as i32;
    (1..=top)
        .map(|k| 10f64.powf(k as f64 / THETA_POINTS_PER_DECADE as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub theta: f64,
    pub s: f64,
    pub lambda_max: f64,
    /// `int_1^lambda dx / Phi(x^(1/s))` on the grid.
    pub ladder: LadderEstimate,
}

/// Theta index `liminf ln(int_1^lambda dx/Phi(x^(1/s))) / ln lambda`, read as
/// the lower-envelope slope of the cumulative integral on a half-decade grid
/// up to `lambda_max`, clamped to `[0, 1]`.
pub fn theta_index(phi: &LaplaceExponent, s: f64, lambda_max: f64, quad_tol: f64) -> Result<ThetaReport> {
    if !(s >= 0.5 && s.is_finite()) {
        return Err(Error::invalid("s", format!("{s} < 1/2 is outside the theta-index range")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::invalid("quad_tol", "must be positive"));
    }
    phi.validate()?;
    let grid = theta_grid(lambda_max);
    if grid.len() < 6 {
        return Err(Error::invalid("lambda_max", format!("{lambda_max:e} is too small")));
    }
    // In u = ln x the integrand is e^u / Phi(e^(u/s)).
    let integrand = |u: f64| {
        let p = phi.eval((u / s).exp());
        if p > 0.0 {
            u.exp() / p
        } else {
            f64::INFINITY
        }
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: quad_tol,
        max_subdivisions: 500,
    };
    let mut cumulative = Vec::with_capacity(grid.len());
    let mut total = 0.0;
    let mut a = 0.0;
    for &l in &grid {
        let b = l.ln();
        total += integrate(integrand, a, b, opts)?.value;
        if !total.is_finite() {
            return Err(Error::invalid("phi", "1/Phi is not integrable near 1"));
        }
        cumulative.push(total);
        a = b;
    }
    let ladder = LadderEstimate::fit(grid, cumulative, ScaleAxis::Log, ValueAxis::Log, SlopeMode::Lower)?;
    Ok(ThetaReport {
        theta: ladder.slope.clamp(0.0, 1.0),
        s,
        lambda_max,
        ladder,
    })
}

/// Predicted Falconer-Howroyd profile of the range `S([0,1])`: `s (1 - theta)`.
pub fn fh_subordinator_predicted(phi: &LaplaceExponent, s: f64, lambda_max: f64, quad_tol: f64) -> Result<f64> {
    let t = theta_index(phi, s, lambda_max, quad_tol)?;
    Ok(s * (1.0 - t.theta))
}

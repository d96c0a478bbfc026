use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::exponent::CharExponent;
use crate::energy::SimplexWeights;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Target error of `cauchy_weighted_energy`.
pub const CAUCHY_TOLERANCE: f64 = 1e-6;
const IMAG_RESIDUE: f64 = 1e-10;

/// `E(z) = sum_ij w_i w_j exp(-|t_i - t_j| Psi(sgn(t_i - t_j) z))`.
///
/// The double sum is carried in complex arithmetic and its real part is taken
/// at the end; the imaginary part cancels in conjugate pairs.
pub fn energy_form(times: &[f64], weights: &SimplexWeights, psi: &CharExponent, z: &[f64]) -> f64 {
    assert_eq!(times.len(), weights.len(), "times and weights differ in length");
    assert_eq!(z.len(), psi.dim(), "z has the wrong dimension");
    let w = weights.as_slice();
    let plus = psi.eval(z);
    let minus_z: Vec<f64> = z.iter().map(|v| -v).collect();
    let minus = psi.eval(&minus_z);
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, (&ti, &wi)) in times.iter().zip(w).enumerate() {
        if wi == 0.0 {
            continue;
        }
        let mut row = Complex64::new(wi, 0.0);
        for (j, (&tj, &wj)) in times.iter().zip(w).enumerate() {
            if i == j || wj == 0.0 {
                continue;
            }
            let dt = ti - tj;
            let psi_s = if dt >= 0.0 { plus } else { minus };
            row += wj * (-dt.abs() * psi_s).exp();
        }
        sum += wi * row;
    }
    assert!(
        sum.im.abs() < IMAG_RESIDUE,
        "energy form has imaginary residue {}",
        sum.im
    );
    sum.re.clamp(0.0, 1.0)
}

/// `int f_C(z) E(z/eps) dz` for the product Cauchy density on `R^d`, each
/// coordinate compactified by `z_j = tan(u_j)`.
pub fn cauchy_weighted_energy(
    times: &[f64],
    weights: &SimplexWeights,
    psi: &CharExponent,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", format!("{eps} must be positive")));
    }
    let d = psi.dim();
    let ctx = Nested {
        times,
        weights,
        psi,
        eps,
        d,
        tol: CAUCHY_TOLERANCE / (4.0 * d as f64),
        failure: RefCell::new(None),
    };
    // E is even in z and the product density is invariant under z -> -z, so
    // the first coordinate runs over the half line.
    let value = 2.0 * ctx.integrate_from(&[]);
    match ctx.failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

struct Nested<'a> {
    times: &'a [f64],
    weights: &'a SimplexWeights,
    psi: &'a CharExponent,
    eps: f64,
    d: usize,
    tol: f64,
    failure: RefCell<Option<Error>>,
}

impl Nested<'_> {
    fn integrate_from(&self, prefix: &[f64]) -> f64 {
        let lower = if prefix.is_empty() { 0.0 } else { -FRAC_PI_2 };
        let integrand = |u: f64| {
            if self.failure.borrow().is_some() {
                return 0.0;
            }
            let mut z = prefix.to_vec();
            z.push(u.tan() / self.eps);
            let inner = if z.len() == self.d {
                energy_form(self.times, self.weights, self.psi, &z)
            } else {
                self.integrate_from(&z)
            };
            inner / PI
        };
        let opts = QuadOptions {
            abs_tol: self.tol,
            rel_tol: 0.0,
            max_subdivisions: 4000,
        };
        match integrate(integrand, lower, FRAC_PI_2, opts) {
            Ok(r) => r.value,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }
}

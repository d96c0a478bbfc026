use serde::{Deserialize, Serialize};

use super::matrix::KernelMatrix;
use super::weights::SimplexWeights;

/// Support threshold for the equality part of the conditions.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub holds: bool,
    pub z: f64,
    /// `min_i (Kw)_i - Z`; must be at least `-tol`.
    pub min_potential_excess: f64,
    /// `max |(Kw)_i - Z|` over the support; must be at most `tol`.
    pub max_support_deviation: f64,
    pub violations: Vec<usize>,
}

/// First-order optimality on the simplex: the potential `Kw` is at least the
/// energy everywhere and equal to it on the support of `w`.
pub fn kkt_certificate(k: &KernelMatrix, w: &SimplexWeights, tol: f64) -> KktReport {
    let w = w.as_slice();
    assert_eq!(w.len(), k.n(), "weights do not match the kernel");
    let g = k.mul(w);
    let z: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
    let mut min_excess = f64::INFINITY;
    let mut max_dev: f64 = 0.0;
    let mut violations = Vec::new();
    for (i, (&gi, &wi)) in g.iter().zip(w).enumerate() {
        min_excess = min_excess.min(gi - z);
        let mut bad = gi < z - tol;
        if wi > SUPPORT_THRESHOLD {
            max_dev = max_dev.max((gi - z).abs());
            bad |= (gi - z).abs() > tol;
        }
        if bad {
            violations.push(i);
        }
    }
    KktReport {
        holds: violations.is_empty(),
        z,
        min_potential_excess: min_excess,
        max_support_deviation: max_dev,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_at_the_centre() {
        let k = KernelMatrix::from_rows(vec![vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        assert!(kkt_certificate(&k, &SimplexWeights::uniform(2), 1e-12).holds);
    }

    #[test]
    fn identity_at_a_vertex_fails() {
        let k = KernelMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = kkt_certificate(&k, &SimplexWeights::vertex(2, 0), 1e-6);
        assert!(!r.holds);
        assert_eq!(r.violations, vec![1]);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{KernelMatrix, PsdStatus};
use crate::error::{Error, Result};

pub const BRUTEFORCE_MAX_N: usize = 8;
/// Cap on enumerated lattice prefixes.
pub const BRUTEFORCE_BUDGET: f64 = 5e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeMinimum {
    pub value: f64,
    pub weights: Vec<f64>,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive minimum of `w'Kw` over the lattice `{w : w_i in step * Z, sum w = 1}`.
///
/// All but the last two coordinates are enumerated; along the remaining edge
/// the energy is a quadratic in one integer variable and is minimized in
/// closed form, so the result is the exact lattice minimum. Subtrees are
/// skipped only when a rigorous lower bound exceeds the best value found.
pub fn min_energy_bruteforce(k: &KernelMatrix, resolution: f64) -> Result<LatticeMinimum> {
    let n = k.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::TooLarge {
            reason: format!("n = {n} exceeds {BRUTEFORCE_MAX_N}"),
        });
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::invalid("resolution", format!("{resolution} not in (0, 1]")));
    }
    let m = (1.0 / resolution).round() as usize;
    if n == 1 {
        return Ok(LatticeMinimum {
            value: k.get(0, 0),
            weights: vec![1.0],
        });
    }
    let prefixes = if n > 2 {
        binomial((m + n - 2) as u64, (n - 2) as u64)
    } else {
        1.0
    };
    if prefixes > BRUTEFORCE_BUDGET {
        return Err(Error::TooLarge {
            reason: format!("{prefixes:.3e} lattice prefixes exceed the budget {BRUTEFORCE_BUDGET:.0e}"),
        });
    }
    let floors = suffix_floors(k);
    // a coarse sublattice gives a starting value that is attained on the fine lattice
    let seed = if n > 3 && m.is_multiple_of(10) && m > 20 {
        let coarse = Search { k, n, m: m / 10, floors: &floors, seed: f64::INFINITY };
        let mut b = (f64::INFINITY, vec![0; n]);
        coarse.recurse(0, &mut vec![0; n], m / 10, &vec![0.0; n], 0.0, &mut b);
        b.0 * (1.0 + 1e-12)
    } else {
        f64::INFINITY
    };
    let search = Search { k, n, m, floors: &floors, seed };
    let best = if n == 2 {
        let mut counts = vec![0usize; n];
        let mut best = (f64::INFINITY, counts.clone());
        search.close(&mut counts, m, 0.0, 0.0, 0.0, &mut best);
        best
    } else {
        (0..=m)
            .into_par_iter()
            .map(|c0| {
                let mut counts = vec![0usize; n];
                counts[0] = c0;
                let x = c0 as f64 / m as f64;
                let ku: Vec<f64> = (0..n).map(|i| x * k.get(i, 0)).collect();
                let q = x * x * k.get(0, 0);
                let mut best = (f64::INFINITY, vec![0; n]);
                if search.pruned(f64::INFINITY, 1, m - c0, &ku, q) {
                    return best;
                }
                search.recurse(1, &mut counts, m - c0, &ku, q, &mut best);
                best
            })
            .reduce(
                || (f64::INFINITY, vec![]),
                |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            )
    };
    Ok(LatticeMinimum {
        value: best.0,
        weights: best.1.iter().map(|&c| c as f64 / m as f64).collect(),
    })
}

/// `floors[l]` is a lower bound for `v'Kv` over the unit simplex on the
/// coordinates `l..n`. For a PSD kernel any feasible `v` gives one by weak
/// duality, `v'Kv - (2 v'Kv - 2 min (Kv))`; otherwise entries are nonnegative.
fn suffix_floors(k: &KernelMatrix) -> Vec<f64> {
    let n = k.n();
    (0..n)
        .map(|l| {
            let idx: Vec<usize> = (l..n).collect();
            let min_entry = idx
                .iter()
                .flat_map(|&i| idx.iter().map(move |&j| k.get(i, j)))
                .fold(f64::INFINITY, f64::min);
            if k.psd != PsdStatus::Psd {
                return min_entry;
            }
            // multiplicative weights on the sub-block
            let mut v = vec![1.0 / idx.len() as f64; idx.len()];
            let kv = |v: &[f64]| -> Vec<f64> {
                idx.iter().map(|&i| idx.iter().zip(v).map(|(&j, x)| k.get(i, j) * x).sum()).collect()
            };
            for _ in 0..400 {
                let g = kv(&v);
                let mut s = 0.0;
                for (x, gi) in v.iter_mut().zip(&g) {
                    *x *= (-4.0 * gi).exp();
                    s += *x;
                }
                v.iter_mut().for_each(|x| *x /= s);
            }
            let g = kv(&v);
            let z: f64 = v.iter().zip(&g).map(|(a, b)| a * b).sum();
            let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
            // 2 gmin - z; the margin covers the PSD test tolerance
            (2.0 * gmin - z - 1e-9).max(min_entry)
        })
        .collect()
}

struct Search<'a> {
    k: &'a KernelMatrix,
    n: usize,
    m: usize,
    floors: &'a [f64],
    seed: f64,
}

impl Search<'_> {
    /// Lower bound check for a prefix `u` with `left` units still to place on
    /// coordinates `level..n`.
    fn pruned(&self, best: f64, level: usize, left: usize, ku: &[f64], q: f64) -> bool {
        let r = left as f64 / self.m as f64;
        let cross = ku[level..].iter().copied().fold(f64::INFINITY, f64::min);
        q + 2.0 * r * cross + r * r * self.floors[level] > best.min(self.seed)
    }

    /// `ku` is `K u` and `q` is `u'Ku` for the prefix `u` fixed so far.
    fn recurse(&self, level: usize, counts: &mut [usize], left: usize, ku: &[f64], q: f64, best: &mut (f64, Vec<usize>)) {
        if level == self.n - 2 {
            self.close(counts, left, ku[level], ku[level + 1], q, best);
            return;
        }
        let inv = 1.0 / self.m as f64;
        let kll = self.k.get(level, level);
        if level == self.n - 3 {
            // last enumerated coordinate: only the two closing entries of K u are needed
            let (a, b) = (level + 1, level + 2);
            let (kal, kbl) = (self.k.get(a, level), self.k.get(b, level));
            for c in 0..=left {
                let x = c as f64 * inv;
                counts[level] = c;
                let q2 = q + 2.0 * x * ku[level] + x * x * kll;
                self.close(counts, left - c, ku[a] + x * kal, ku[b] + x * kbl, q2, best);
            }
            counts[level] = 0;
            return;
        }
        let mut next = ku.to_vec();
        for c in 0..=left {
            let x = c as f64 * inv;
            counts[level] = c;
            for (i, v) in next.iter_mut().enumerate().skip(level + 1) {
                *v = ku[i] + x * self.k.get(i, level);
            }
            // (u + x e_l)' K (u + x e_l)
            let q2 = q + 2.0 * x * ku[level] + x * x * kll;
            if self.pruned(best.0, level + 1, left - c, &next, q2) {
                continue;
            }
            self.recurse(level + 1, counts, left - c, &next, q2, best);
        }
        counts[level] = 0;
    }

    /// Minimizes over splits of `left` units between the last two coordinates.
    fn close(&self, counts: &mut [usize], left: usize, ku_a: f64, ku_b: f64, q: f64, best: &mut (f64, Vec<usize>)) {
        let (a, b) = (self.n - 2, self.n - 1);
        let m = self.m as f64;
        let total = left as f64 / m;
        // w_a = x, w_b = total - x:
        // f(x) = q + 2x ku_a + 2(total-x) ku_b + x^2 K_aa + 2x(total-x) K_ab + (total-x)^2 K_bb
        let (kaa, kab, kbb) = (self.k.get(a, a), self.k.get(a, b), self.k.get(b, b));
        let f = |c: usize| {
            let x = c as f64 / m;
            let y = total - x;
            q + 2.0 * x * ku_a + 2.0 * y * ku_b + x * x * kaa + 2.0 * x * y * kab + y * y * kbb
        };
        let curv = kaa - 2.0 * kab + kbb;
        let mut candidates = [0, left, left, left];
        if curv > 0.0 {
            let lin = 2.0 * (ku_a - ku_b) + 2.0 * total * (kab - kbb);
            let vertex = (-lin / (2.0 * curv) * m).clamp(0.0, left as f64);
            candidates[2] = vertex.floor() as usize;
            candidates[3] = (vertex.ceil() as usize).min(left);
        }
        for c in candidates {
            let v = f(c);
            if v < best.0 {
                counts[a] = c;
                counts[b] = left - c;
                best.0 = v;
                best.1.copy_from_slice(counts);
            }
        }
        counts[a] = 0;
        counts[b] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(k: &KernelMatrix, m: usize) -> f64 {
        // Full enumeration of all compositions for tiny cases.
        fn rec(k: &KernelMatrix, m: usize, i: usize, left: usize, w: &mut Vec<f64>, best: &mut f64) {
            if i == k.n() - 1 {
                w[i] = left as f64 / m as f64;
                *best = best.min(k.quadratic(w));
                return;
            }
            for c in 0..=left {
                w[i] = c as f64 / m as f64;
                rec(k, m, i + 1, left - c, w, best);
            }
        }
        let mut w = vec![0.0; k.n()];
        let mut best = f64::INFINITY;
        rec(k, m, 0, m, &mut w, &mut best);
        best
    }

    #[test]
    fn small_closed_forms() {
        let k = KernelMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let r = min_energy_bruteforce(&k, 1.0 / 200.0).unwrap();
        assert!((r.value - 0.75).abs() < 1e-15);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        let id = KernelMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((min_energy_bruteforce(&id, 0.005).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_full_enumeration_on_indefinite_kernels() {
        let k = KernelMatrix::from_rows(vec![
            vec![1.0, 1.0, 0.2, 0.7],
            vec![1.0, 1.0, 0.9, 0.1],
            vec![0.2, 0.9, 1.0, 0.4],
            vec![0.7, 0.1, 0.4, 1.0],
        ])
        .unwrap();
        let v = min_energy_bruteforce(&k, 1.0 / 30.0).unwrap().value;
        assert!((v - naive(&k, 30)).abs() < 1e-14);
    }

    fn unpruned(k: &KernelMatrix, m: usize) -> f64 {
        let n = k.n();
        let floors = vec![f64::NEG_INFINITY; n];
        let search = Search { k, n, m, floors: &floors, seed: f64::INFINITY };
        let mut best = (f64::INFINITY, vec![0; n]);
        search.recurse(0, &mut vec![0; n], m, &vec![0.0; n], 0.0, &mut best);
        best.0
    }

    #[test]
    fn pruning_is_exact() {
        use rand::Rng;
        let mut rng = crate::rng::stream(5, 0);
        for trial in 0..40 {
            let n = 3 + trial % 4;
            let rows: Vec<Vec<f64>> = if trial % 2 == 0 {
                // Gram matrix of nonnegative unit vectors
                let v: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
                        let s = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                        x.into_iter().map(|a| a / s).collect()
                    })
                    .collect();
                (0..n)
                    .map(|i| (0..n).map(|j| if i == j { 1.0 } else { v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>().min(1.0) }).collect())
                    .collect()
            } else {
                let mut r = vec![vec![1.0; n]; n];
                for i in 1..n {
                    for j in 0..i {
                        let x = rng.random::<f64>();
                        r[i][j] = x;
                        r[j][i] = x;
                    }
                }
                r
            };
            let k = KernelMatrix::from_rows(rows).unwrap();
            let v = min_energy_bruteforce(&k, 1.0 / 40.0).unwrap().value;
            assert!((v - unpruned(&k, 40)).abs() < 1e-14, "trial {trial}");
        }
    }

    #[test]
    fn too_large() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| (0..9).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let k = KernelMatrix::from_rows(rows).unwrap();
        assert!(matches!(min_energy_bruteforce(&k, 0.005), Err(Error::TooLarge { .. })));
    }
}

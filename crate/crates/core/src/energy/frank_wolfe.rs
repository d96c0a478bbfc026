use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::matrix::{dot, KernelMatrix, PsdStatus};
use super::weights::SimplexWeights;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions {
    /// Relative duality-gap target.
    pub tol: f64,
    pub max_iter: usize,
    /// Random restarts on top of the uniform start; used only when the
    /// kernel is not known to be positive semidefinite.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions {
            tol: 1e-6,
            max_iter: 200_000,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Minimum energy over the simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub scale: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(skip)]
    pub weights: Vec<f64>,
    #[serde(rename = "gap")]
    pub duality_gap: f64,
    #[serde(rename = "iters")]
    pub iterations: usize,
    #[serde(skip)]
    pub restarts: usize,
    pub flagged_nonconvex: bool,
}

impl EnergyResult {
    pub fn simplex_weights(&self) -> Result<SimplexWeights> {
        SimplexWeights::new(self.weights.clone())
    }
}

struct Run {
    w: Vec<f64>,
    z: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

const REFRESH_EVERY: usize = 1000;

/// Pairwise Frank-Wolfe with exact line search from the start `w`.
fn pairwise_fw(k: &KernelMatrix, mut w: Vec<f64>, tol: f64, max_iter: usize) -> Run {
    let n = k.n();
    let mut g = k.mul(&w);
    let mut f = dot(&w, &g);
    let mut it = 0;
    loop {
        if it % REFRESH_EVERY == 0 && it > 0 {
            g = k.mul(&w);
            f = dot(&w, &g);
        }
        // Lowest index wins ties in both oracles.
        let mut s = 0;
        for i in 1..n {
            if g[i] < g[s] {
                s = i;
            }
        }
        let mut v = usize::MAX;
        for i in 0..n {
            if w[i] > 0.0 && (v == usize::MAX || g[i] > g[v]) {
                v = i;
            }
        }
        let fw_gap = 2.0 * (f - g[s]);
        let away_gap = 2.0 * (g[v] - f);
        if fw_gap.max(away_gap) <= tol * f || it >= max_iter {
            let converged = fw_gap.max(away_gap) <= tol * f;
            // Final clean-up: exact potentials for the reported values.
            let g = k.mul(&w);
            let z = dot(&w, &g);
            let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
            return Run {
                w,
                z,
                gap: (2.0 * (z - gmin)).max(0.0),
                iterations: it,
                converged,
            };
        }
        it += 1;
        // Pairwise step: shift mass from the away vertex v to the FW vertex s
        // along d = e_s - e_v.
        let slope = g[s] - g[v];
        let curv = k.get(s, s) - 2.0 * k.get(s, v) + k.get(v, v);
        let gamma_max = w[v];
        let gamma = step(slope, curv, gamma_max);
        if !(gamma > 0.0) {
            continue;
        }
        let (rs, rv) = (k.row(s), k.row(v));
        for i in 0..n {
            g[i] += gamma * (rs[i] - rv[i]);
        }
        w[s] += gamma;
        w[v] -= gamma;
        if gamma >= gamma_max || w[v] < 1e-300 {
            w[v] = 0.0;
        }
        f = dot(&w, &g);
    }
}

/// Exact minimizer over `[0, gamma_max]` of `2 gamma slope + gamma^2 curv`.
fn step(slope: f64, curv: f64, gamma_max: f64) -> f64 {
    if slope >= 0.0 {
        return 0.0;
    }
    if curv > 0.0 {
        (-slope / curv).min(gamma_max)
    } else {
        gamma_max
    }
}

fn dirichlet_start(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, index);
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// `min_w w'Kw` over the probability simplex.
///
/// On a positive semidefinite kernel a single run from the uniform start is
/// certified by its duality gap. Otherwise the uniform start and
/// `opts.restarts` seeded random starts are run, the lowest stationary value
/// is kept and the result is flagged.
pub fn min_energy(k: &KernelMatrix, opts: &EnergyOptions) -> Result<EnergyResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let n = k.n();
    let flagged = k.psd != PsdStatus::Psd;
    let starts = if flagged { 1 + opts.restarts } else { 1 };
    let mut best: Option<Run> = None;
    let mut best_any: Option<Run> = None;
    for r in 0..starts {
        let w0 = if r == 0 {
            vec![1.0 / n as f64; n]
        } else {
            dirichlet_start(n, opts.seed, r as u64)
        };
        let run = pairwise_fw(k, w0, opts.tol, opts.max_iter);
        let slot = if run.converged { &mut best } else { &mut best_any };
        if slot.as_ref().is_none_or(|b| run.z < b.z) {
            *slot = Some(run);
        }
    }
    let finish = |run: Run| {
        let s: f64 = run.w.iter().sum();
        let weights: Vec<f64> = run.w.iter().map(|x| x / s).collect();
        let z = k.quadratic(&weights);
        EnergyResult {
            scale: k.scale,
            z,
            weights,
            duality_gap: run.gap,
            iterations: run.iterations,
            restarts: starts,
            flagged_nonconvex: flagged,
        }
    };
    match best {
        Some(run) => Ok(finish(run)),
        None => {
            let run = best_any.expect("at least one start");
            let (iterations, gap) = (run.iterations, run.gap);
            Err(Error::MaxIterExceeded {
                iterations,
                gap,
                best: Box::new(finish(run)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(k: f64) -> KernelMatrix {
        KernelMatrix::from_rows(vec![vec![1.0, k], vec![k, 1.0]]).unwrap()
    }

    #[test]
    fn two_point_closed_form() {
        for k in [0.0, 0.25, 0.5, 0.9] {
            let r = min_energy(&two(k), &EnergyOptions::default()).unwrap();
            assert!((r.z - (1.0 + k) / 2.0).abs() < 1e-10);
            assert!((r.weights[0] - 0.5).abs() < 1e-10);
            assert!(!r.flagged_nonconvex);
        }
    }

    #[test]
    fn identity_gives_uniform() {
        let id = KernelMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let r = min_energy(&id, &EnergyOptions::default()).unwrap();
        assert!((r.z - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones_kernel() {
        let k = two(1.0);
        let r = min_energy(&k, &EnergyOptions::default()).unwrap();
        assert_eq!(r.z, 1.0);
        assert_eq!(r.duality_gap, 0.0);
    }

    #[test]
    fn max_iter_carries_best_iterate() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| (0..30).map(|j| (-((i as f64 - j as f64).abs()) * 0.05).exp()).collect())
            .collect();
        let k = KernelMatrix::from_rows(rows).unwrap();
        let opts = EnergyOptions {
            max_iter: 2,
            tol: 1e-12,
            ..Default::default()
        };
        match min_energy(&k, &opts) {
            Err(Error::MaxIterExceeded { best, .. }) => assert!(best.z > 0.0 && best.z <= 1.0),
            other => panic!("expected MaxIterExceeded, got {other:?}"),
        }
    }

    #[test]
    fn summary_json_keys() {
        let r = min_energy(&two(0.5), &EnergyOptions::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["Z", "flagged_nonconvex", "gap", "iters", "scale"]);
    }
}

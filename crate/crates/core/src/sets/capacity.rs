use std::collections::HashMap;

use rayon::prelude::*;

use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::ladder::{check_geometric_decreasing, LadderEstimate, ScaleAxis, SlopeMode, ValueAxis};

/// Relative slack in the separation test `|x - y| >= r`, so that grid points
/// spaced exactly `r` apart count as separated despite rounding.
pub const SEPARATION_SLACK: f64 = 1e-9;

fn separated(dist: f64, r: f64) -> bool {
    dist >= r * (1.0 - SEPARATION_SLACK)
}

/// Kolmogorov capacity: the largest number of points at mutual distance at
/// least `r`.
///
/// Exact on the line (left-to-right greedy). In higher dimension this is the
/// size of a greedy maximal `r`-separated subset, which is a lower bound for
/// the capacity and an `r`-net of the cloud.
pub fn kolmogorov_capacity(cloud: &PointCloud, r: f64) -> usize {
    assert!(r > 0.0, "radius must be positive");
    if cloud.is_empty() {
        return 0;
    }
    if cloud.dim() == 1 {
        let mut v = cloud.coords().to_vec();
        v.sort_by(f64::total_cmp);
        capacity_sorted(&v, r)
    } else {
        greedy_separated(cloud, r).len()
    }
}

/// Exact capacity of a sorted list of reals.
pub fn capacity_sorted(sorted: &[f64], r: f64) -> usize {
    let Some(&first) = sorted.first() else {
        return 0;
    };
    let mut last = first;
    let mut count = 1;
    for &x in &sorted[1..] {
        if separated(x - last, r) {
            last = x;
            count += 1;
        }
    }
    count
}

fn cell_of(p: &[f64], r: f64) -> Vec<i64> {
    p.iter().map(|v| (v / r).floor() as i64).collect()
}

/// Indices of a greedy maximal `r`-separated subset (sup metric), in input
/// order.
pub fn greedy_separated(cloud: &PointCloud, r: f64) -> Vec<usize> {
    let d = cloud.dim();
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut chosen = Vec::new();
    let neighbours = 3usize.pow(d as u32);
    let mut key = vec![0i64; d];
    for (i, p) in cloud.iter().enumerate() {
        let cell = cell_of(p, r);
        let mut ok = true;
        'scan: for code in 0..neighbours {
            let mut c = code;
            for k in 0..d {
                key[k] = cell[k] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(list) = grid.get(&key) {
                for &j in list {
                    let q = cloud.point(j);
                    let dist = p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if !separated(dist, r) {
                        ok = false;
                        break 'scan;
                    }
                }
            }
        }
        if ok {
            grid.entry(cell).or_default().push(i);
            chosen.push(i);
        }
    }
    chosen
}

/// Upper Minkowski dimension estimate: slope of `ln K(r)` against `ln(1/r)`.
///
/// A ladder on which the capacity never changes is degenerate unless the
/// capacity is one throughout (a single point at these scales), which has
/// slope zero.
pub fn minkowski_dim_estimate(cloud: &PointCloud, radii: &[f64], mode: SlopeMode) -> Result<LadderEstimate> {
    check_geometric_decreasing(radii, 5)?;
    let counts: Vec<f64> = radii
        .par_iter()
        .map(|&r| kolmogorov_capacity(cloud, r) as f64)
        .collect();
    if counts.iter().all(|&c| c == counts[0]) && counts[0] != 1.0 {
        return Err(Error::DegenerateLadder(format!(
            "capacity is {} at every radius of the ladder",
            counts[0]
        )));
    }
    LadderEstimate::fit(radii.to_vec(), counts, ScaleAxis::LogInverse, ValueAxis::Log, mode)
}

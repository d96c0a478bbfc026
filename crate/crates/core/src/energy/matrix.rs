use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::KernelFamily;
use crate::sets::DeltaNet;

/// Largest net accepted by [`build_kernel`].
pub const DENSE_CAP: usize = 5000;
/// Largest matrix on which positive semidefiniteness is checked numerically.
pub const PSD_CHECK_CAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdStatus {
    /// Positive semidefinite by a structural argument or a numerical check.
    Psd,
    NotPsd,
    Unknown,
}

/// Dense symmetric kernel matrix `k_ij = K_scale(|t_i - t_j|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
    pub scale: f64,
    pub family: String,
    pub psd: PsdStatus,
}

impl KernelMatrix {
    /// Wraps a symmetric matrix with entries in `[0, 1]` and unit diagonal.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("kernel", "empty matrix"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::invalid("kernel", "matrix is not square"));
            }
            data.extend_from_slice(row);
        }
        let mut k = KernelMatrix {
            n,
            data,
            scale: 1.0,
            family: "custom".into(),
            psd: PsdStatus::Unknown,
        };
        k.check()?;
        k.psd = numeric_psd_status(&k);
        Ok(k)
    }

    fn check(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 1.0 {
                return Err(Error::invalid("kernel", format!("diagonal entry {i} is not 1")));
            }
            for j in 0..self.n {
                let v = self.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid("kernel", format!("entry ({i},{j}) = {v} outside [0, 1]")));
                }
                if v != self.get(j, i) {
                    return Err(Error::invalid("kernel", "matrix is not symmetric"));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), w)).collect()
    }

    pub fn quadratic(&self, w: &[f64]) -> f64 {
        dot(w, &self.mul(w))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Kernel matrix of `family` at `scale` over the points of `net`.
pub fn build_kernel(family: &KernelFamily, scale: f64, net: &DeltaNet) -> Result<KernelMatrix> {
    build_kernel_on(family, scale, &net.points)
}

pub fn build_kernel_on(family: &KernelFamily, scale: f64, points: &[f64]) -> Result<KernelMatrix> {
    let n = points.len();
    if n > DENSE_CAP {
        return Err(Error::NetTooLarge { n, cap: DENSE_CAP });
    }
    if n == 0 {
        return Err(Error::invalid("net", "empty net"));
    }
    family.validate()?;
    if !(scale > 0.0) {
        return Err(Error::invalid("scale", format!("{scale} must be positive")));
    }
    // Exact kernels are costly per evaluation; evaluate each distinct
    // distance once.
    let cache: Option<HashMap<u64, f64>> = if matches!(family, KernelFamily::Exact { .. }) {
        let mut dists: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (points[i] - points[j]).abs()))
            .collect();
        dists.sort_by(f64::total_cmp);
        dists.dedup();
        let vals = dists
            .par_iter()
            .map(|&r| family.eval(scale, r))
            .collect::<Result<Vec<_>>>()?;
        Some(dists.iter().map(|d| d.to_bits()).zip(vals).collect())
    } else {
        None
    };
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let r = (points[i] - points[j]).abs();
                    match &cache {
                        Some(c) => Ok(c[&r.to_bits()]),
                        None => family.eval(scale, r),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        data[i * n + i] = 1.0;
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    let mut k = KernelMatrix {
        n,
        data,
        scale,
        family: family.tag(),
        psd: PsdStatus::Unknown,
    };
    k.psd = if family.is_psd_by_family() {
        PsdStatus::Psd
    } else {
        numeric_psd_status(&k)
    };
    Ok(k)
}

fn numeric_psd_status(k: &KernelMatrix) -> PsdStatus {
    if k.n > PSD_CHECK_CAP {
        PsdStatus::Unknown
    } else if pivoted_cholesky_psd(k, 1e-10) {
        PsdStatus::Psd
    } else {
        PsdStatus::NotPsd
    }
}

/// Positive semidefiniteness by Cholesky factorization with diagonal
/// pivoting. Pivots below `tol` end the factorization; the remaining Schur
/// complement must then vanish to within `tol`.
pub fn pivoted_cholesky_psd(k: &KernelMatrix, tol: f64) -> bool {
    let n = k.n;
    let mut a = k.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (p, &dmax) = perm[step..]
            .iter()
            .map(|&i| &a[i * n + i])
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(p, d)| (p + step, d))
            .unwrap();
        if dmax <= tol {
            let rest = &perm[step..];
            for &i in rest {
                if a[i * n + i] < -tol {
                    return false;
                }
                for &j in rest {
                    if i != j && a[i * n + j].abs() > tol.sqrt() {
                        return false;
                    }
                }
            }
            return true;
        }
        perm.swap(step, p);
        let piv = perm[step];
        let root = dmax.sqrt();
        let col: Vec<f64> = perm[step + 1..].iter().map(|&i| a[i * n + piv] / root).collect();
        for (x, &i) in perm[step + 1..].iter().enumerate() {
            for (y, &j) in perm[step + 1..].iter().enumerate() {
                a[i * n + j] -= col[x] * col[y];
            }
        }
    }
    true
}

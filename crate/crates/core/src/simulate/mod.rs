//! Levy path simulation on nets and box-counting of the images.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{check_geometric_decreasing, LadderEstimate, SlopeMode};
use crate::process::LevyModel;
use crate::profiles::ProfileReport;
use crate::rng::stream;
use crate::sets::{minkowski_dim_estimate, CompactSet, DeltaNet, PointCloud};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    /// `X(t_k)` for each net time, one row per time.
    pub values: PointCloud,
    pub model: String,
    pub seed: u64,
}

/// Samples `X` at the net times by exact independent increments, starting
/// from `X(0) = 0`.
pub fn sample_path(model: &LevyModel, net: &DeltaNet, seed: u64) -> Result<PathSample> {
    let mut rng = stream(seed, 0);
    sample_path_with(model, net, &mut rng, seed)
}

fn sample_path_with<R: Rng + ?Sized>(model: &LevyModel, net: &DeltaNet, rng: &mut R, seed: u64) -> Result<PathSample> {
    model.validate()?;
    if model.sampler_recipe().is_none() {
        return Err(Error::NoSampler(model.tag()));
    }
    if net.points.windows(2).any(|w| w[1] < w[0]) || net.points.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::invalid("net", "net times must be sorted and nonnegative"));
    }
    let d = model.dim();
    let mut coords = Vec::with_capacity(net.len() * d);
    let mut x = vec![0.0; d];
    let mut inc = vec![0.0; d];
    let mut last = 0.0;
    for &t in &net.points {
        model.sample_increment(t - last, rng, &mut inc)?;
        for (a, b) in x.iter_mut().zip(&inc) {
            *a += b;
        }
        coords.extend_from_slice(&x);
        last = t;
    }
    Ok(PathSample {
        times: net.points.clone(),
        values: PointCloud::new(d, coords)?,
        model: model.tag(),
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageOptions {
    pub mode: SlopeMode,
    /// Target number of net points per path; the mesh is the smaller of
    /// `diam / points` and `r_min^index`.
    pub points: usize,
    /// Hard cap on net points.
    pub point_cap: usize,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions {
            mode: SlopeMode::Upper,
            points: 1 << 20,
            point_cap: 1 << 22,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageExperiment {
    pub model: String,
    pub set: String,
    pub n_paths: usize,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub mode: SlopeMode,
    pub mesh: f64,
    pub net_size: usize,
    pub estimates: Vec<f64>,
    /// `K(r)` per path, aligned with `radii`.
    pub capacities: Vec<Vec<f64>>,
    pub median: f64,
    pub iqr: f64,
}

impl ImageExperiment {
    /// Columns `path_index, slope, K(r_1), ...`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["path_index".to_string(), "slope".to_string()];
        header.extend(self.radii.iter().map(|r| format!("K({r:?})")));
        wr.write_record(&header)?;
        for (i, (slope, ks)) in self.estimates.iter().zip(&self.capacities).enumerate() {
            let mut row = vec![i.to_string(), format!("{slope:?}")];
            row.extend(ks.iter().map(|k| format!("{k}")));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Net mesh for an image experiment.
pub fn image_mesh(model: &LevyModel, set: &CompactSet, radii: &[f64], opts: &ImageOptions) -> f64 {
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let diam = set.diameter().max(f64::MIN_POSITIVE);
    let by_count = diam / opts.points.max(1) as f64;
    match model.index() {
        Some(a) => by_count.min(r_min.powf(a)),
        None => by_count,
    }
}

/// Minkowski dimension of the images `X(F)` of `n_paths` independent paths,
/// each sampled on a net of `set` and box-counted over `radii`. Path `i`
/// draws from RNG stream `i` of `seed`.
pub fn image_dim_experiment(
    model: &LevyModel,
    set: &CompactSet,
    n_paths: usize,
    radii: &[f64],
    seed: u64,
    opts: &ImageOptions,
) -> Result<ImageExperiment> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "need at least one path"));
    }
    check_geometric_decreasing(radii, 5)?;
    model.validate()?;
    set.validate()?;
    if model.sampler_recipe().is_none() {
        return Err(Error::NoSampler(model.tag()));
    }
    let mesh = image_mesh(model, set, radii, opts);
    let net = set.discretize_with_cap(mesh, opts.point_cap)?;
    let per_path: Vec<LadderEstimate> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let path = sample_path_with(model, &net, &mut rng, seed)?;
            minkowski_dim_estimate(&path.values, radii, opts.mode)
        })
        .collect::<Result<_>>()?;
    let estimates: Vec<f64> = per_path.iter().map(|e| e.slope).collect();
    if estimates.iter().any(|e| !e.is_finite()) {
        return Err(Error::DegenerateLadder("non-finite path estimate".into()));
    }
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(ImageExperiment {
        model: model.tag(),
        set: set.id(),
        n_paths,
        radii: radii.to_vec(),
        seed,
        mode: opts.mode,
        mesh,
        net_size: net.len(),
        capacities: per_path.into_iter().map(|e| e.values).collect(),
        estimates,
        median: quantile(&sorted, 0.5),
        iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub set: String,
    pub model: String,
    pub theory: f64,
    pub empirical: f64,
    pub difference: f64,
    pub band: f64,
    pub pass: bool,
}

/// Compares a profile estimate with the median image dimension.
pub fn theory_vs_empirical(
    model: &LevyModel,
    set: &CompactSet,
    profile: &ProfileReport,
    experiment: &ImageExperiment,
    band: f64,
) -> Result<Comparison> {
    let id = set.id();
    if profile.set != id || experiment.set != id {
        return Err(Error::MismatchedInputs(format!(
            "set `{id}` vs profile `{}` and experiment `{}`",
            profile.set, experiment.set
        )));
    }
    if experiment.model != model.tag() {
        return Err(Error::MismatchedInputs(format!(
            "model `{}` vs experiment `{}`",
            model.tag(),
            experiment.model
        )));
    }
    let difference = (profile.estimate - experiment.median).abs();
    Ok(Comparison {
        set: id,
        model: model.tag(),
        theory: profile.estimate,
        empirical: experiment.median,
        difference,
        band,
        pass: difference <= band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::geometric;
    use crate::process::LaplaceExponent;

    #[test]
    fn degenerate_net_gives_zero_path() {
        let net = CompactSet::point(0.0).discretize(0.1).unwrap();
        let p = sample_path(&LevyModel::stable(1.3), &net, 5).unwrap();
        assert_eq!(p.values.coords(), &[0.0]);
    }

    #[test]
    fn subordinator_paths_are_nondecreasing() {
        let net = CompactSet::unit_interval().discretize(1e-3).unwrap();
        for phi in [LaplaceExponent::stable(0.5), LaplaceExponent::Gamma { a: 2.0, b: 1.0 }] {
            let m = LevyModel::subordinator(phi);
            for seed in 0..5 {
                let p = sample_path(&m, &net, seed).unwrap();
                assert!(p.values.coords().windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
    }

    #[test]
    fn singleton_image_has_dimension_zero() {
        let e = image_dim_experiment(
            &LevyModel::brownian(),
            &CompactSet::point(0.5),
            3,
            &geometric(0.1, 0.5, 5),
            1,
            &ImageOptions::default(),
        )
        .unwrap();
        assert_eq!(e.median, 0.0);
        assert_eq!(e.net_size, 1);
    }

    #[test]
    fn experiment_is_deterministic_and_csv_shaped() {
        let opts = ImageOptions {
            points: 1 << 12,
            ..Default::default()
        };
        let radii = geometric(0.25, 0.5, 5);
        let run = || image_dim_experiment(&LevyModel::brownian(), &CompactSet::unit_interval(), 4, &radii, 9, &opts).unwrap();
        let a = run();
        assert_eq!(a, run());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_index,slope,K(0.25),K(0.125)"));
        assert_eq!(text.lines().count(), 5);
    }
}

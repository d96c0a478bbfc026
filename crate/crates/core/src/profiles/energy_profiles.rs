use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ProfileReport;
use crate::energy::{build_kernel, min_energy, EnergyOptions, DENSE_CAP};
use crate::error::{Error, Result};
use crate::ladder::{LadderEstimate, ScaleAxis, SlopeMode, ValueAxis};
use crate::process::{KernelFamily, LaplaceExponent};
use crate::sets::CompactSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Net mesh as a fraction of the kernel's length scale: `delta = f * eps`,
    /// or `delta = f / Phi(lambda)` for subordinator kernels.
    pub mesh_factor: f64,
    pub mode: SlopeMode,
    pub energy: EnergyOptions,
    /// Upper end of the sanity window for estimates.
    pub window: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            mesh_factor: 0.1,
            mode: SlopeMode::Upper,
            energy: EnergyOptions::default(),
            window: 2.0,
        }
    }
}

fn check_ladder(scales: &[f64], decreasing: bool) -> Result<()> {
    if scales.len() < 3 {
        return Err(Error::InvalidLadder(format!("{} scales, need at least 3", scales.len())));
    }
    let ok = scales
        .windows(2)
        .all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] });
    if !ok || scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        let dir = if decreasing { "decreasing" } else { "increasing" };
        return Err(Error::InvalidLadder(format!("scales must be positive and strictly {dir}")));
    }
    Ok(())
}

struct Point {
    mesh: f64,
    n: usize,
    energy: crate::energy::EnergyResult,
}

fn energy_ladder(
    set: &CompactSet,
    family: &KernelFamily,
    scales: &[f64],
    mesh: impl Fn(f64) -> f64 + Sync,
    opts: &ProfileOptions,
) -> Result<Vec<Point>> {
    set.validate()?;
    family.validate()?;
    scales
        .par_iter()
        .enumerate()
        .map(|(k, &scale)| {
            let delta = mesh(scale);
            let net = set.discretize_with_cap(delta, DENSE_CAP)?;
            let kernel = build_kernel(family, scale, &net)?;
            let mut eopts = opts.energy;
            eopts.seed = crate::rng::mix(&[opts.energy.seed, k as u64]);
            let energy = min_energy(&kernel, &eopts)?;
            Ok(Point {
                mesh: delta,
                n: net.len(),
                energy,
            })
        })
        .collect()
}

fn s_or_phi(family: &KernelFamily) -> String {
    match family {
        KernelFamily::FalconerHowroyd { s } => s.to_string(),
        KernelFamily::StableSandwich { alpha, d } => (*d as f64 / alpha).to_string(),
        KernelFamily::SubordinatorExp { phi } => phi.tag(),
        KernelFamily::Exact { model } => model.tag(),
    }
}

/// Box-dimension profile: slope of `-ln Z(eps)` against `ln(1/eps)` over a
/// decreasing ladder of radii. All three slope modes are kept in the ladder
/// record; `opts.mode` picks the reported estimate.
pub fn box_profile(set: &CompactSet, family: &KernelFamily, eps: &[f64], opts: &ProfileOptions) -> Result<ProfileReport> {
    if matches!(family, KernelFamily::SubordinatorExp { .. }) {
        return Err(Error::invalid("family", "subordinator kernels take a lambda ladder"));
    }
    check_ladder(eps, true)?;
    let pts = energy_ladder(set, family, eps, |e| opts.mesh_factor * e, opts)?;
    finish(set, family, eps, pts, ScaleAxis::LogInverse, opts)
}

fn finish(
    set: &CompactSet,
    family: &KernelFamily,
    scales: &[f64],
    pts: Vec<Point>,
    axis: ScaleAxis,
    opts: &ProfileOptions,
) -> Result<ProfileReport> {
    let values: Vec<f64> = pts.iter().map(|p| p.energy.z).collect();
    let ladder = LadderEstimate::fit(scales.to_vec(), values, axis, ValueAxis::NegLog, opts.mode)?;
    let estimate = ladder.slope;
    Ok(ProfileReport {
        set: set.id(),
        family: family.tag(),
        s_or_phi: s_or_phi(family),
        estimate,
        mode: opts.mode,
        meshes: pts.iter().map(|p| p.mesh).collect(),
        net_sizes: pts.iter().map(|p| p.n).collect(),
        energies: pts.into_iter().map(|p| p.energy).collect(),
        certificate: Some(set.certificate()),
        within_window: (-1e-9..=opts.window).contains(&estimate),
        ladder,
    })
}

/// Falconer-Howroyd profile with kernel `(eps/r)^s ∧ 1`.
pub fn fh_profile(set: &CompactSet, s: f64, eps: &[f64], opts: &ProfileOptions) -> Result<ProfileReport> {
    box_profile(set, &KernelFamily::fh(s), eps, opts)
}

/// Profile of the isotropic stable kernel in `R^d`, through its reduction to
/// `alpha` times the Falconer-Howroyd profile at `s = d/alpha`.
pub fn stable_profile(set: &CompactSet, alpha: f64, d: usize, eps: &[f64], opts: &ProfileOptions) -> Result<ProfileReport> {
    if !(alpha > 0.0 && alpha <= 2.0) || d == 0 {
        return Err(Error::invalid("alpha", format!("need alpha in (0, 2] and d >= 1, got {alpha}, {d}")));
    }
    let mut r = fh_profile(set, d as f64 / alpha, eps, opts)?;
    r.estimate *= alpha;
    r.family = format!("stable:{alpha},{d}");
    r.within_window = (-1e-9..=opts.window * d as f64).contains(&r.estimate);
    Ok(r)
}

/// Subordinator criterion: slope of `-ln Z(lambda)` against `ln lambda` for
/// the kernel `exp(-|t-s| Phi(lambda))` over an increasing ladder, with mesh
/// `mesh_factor / Phi(lambda)`.
pub fn subordinator_box_dim(
    phi: &LaplaceExponent,
    set: &CompactSet,
    lambdas: &[f64],
    opts: &ProfileOptions,
) -> Result<ProfileReport> {
    check_ladder(lambdas, false)?;
    phi.validate()?;
    let family = KernelFamily::subordinator(phi.clone());
    let pts = energy_ladder(set, &family, lambdas, |l| opts.mesh_factor / phi.eval(l).max(1e-300), opts)?;
    finish(set, &family, lambdas, pts, ScaleAxis::Log, opts)
}

/// Solves `Phi(lambda) = target` by bisection on `ln lambda`.
pub fn invert_phi(phi: &LaplaceExponent, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::invalid("target", "must be positive"));
    }
    let (mut lo, mut hi) = (-700.0f64, 700.0f64);
    if phi.eval(hi.exp()) < target {
        return Err(Error::invalid("target", format!("Phi never reaches {target}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi.eval(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

/// Increasing lambda ladder on which `Phi` runs geometrically from
/// `phi_start` to `phi_end`.
pub fn lambda_ladder_for_phi(phi: &LaplaceExponent, phi_start: f64, phi_end: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(phi_end > phi_start) {
        return Err(Error::InvalidLadder("need count >= 2 and phi_end > phi_start".into()));
    }
    let ratio = (phi_end / phi_start).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|k| invert_phi(phi, phi_start * ratio.powi(k as i32)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::geometric;

    fn fast() -> ProfileOptions {
        ProfileOptions {
            energy: EnergyOptions {
                restarts: 1,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn singleton_and_two_points_have_profile_zero() {
        let eps = geometric(0.1, 0.5, 5);
        let r = fh_profile(&CompactSet::point(0.5), 0.7, &eps, &fast()).unwrap();
        assert_eq!(r.estimate, 0.0);
        let two = CompactSet::FinitePoints { points: vec![0.0, 1.0] };
        let r = fh_profile(&two, 2.0, &eps, &fast()).unwrap();
        // Z = (1 + eps^2)/2 tends to 1/2.
        assert!(r.estimate.abs() < 0.01);
        for (e, eps) in r.energies.iter().zip(&eps) {
            assert!((e.z - (1.0 + eps * eps) / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ladder_direction_is_checked() {
        let up = geometric(0.01, 2.0, 5);
        assert!(fh_profile(&CompactSet::unit_interval(), 1.0, &up, &fast()).is_err());
        let phi = LaplaceExponent::stable(0.5);
        let down = geometric(100.0, 0.5, 5);
        assert!(subordinator_box_dim(&phi, &CompactSet::unit_interval(), &down, &fast()).is_err());
    }

    #[test]
    fn invert_phi_round_trip() {
        let phi = LaplaceExponent::stable(0.3);
        let l = invert_phi(&phi, 50.0).unwrap();
        assert!((phi.eval(l) / 50.0 - 1.0).abs() < 1e-12);
        let ladder = lambda_ladder_for_phi(&phi, 10.0, 100.0, 3).unwrap();
        assert!((phi.eval(ladder[1]) - 10f64.powf(1.5)).abs() < 1e-9);
    }

    #[test]
    fn csv_rows() {
        let eps = geometric(0.1, 0.5, 4);
        let r = fh_profile(&CompactSet::point(0.0), 1.0, &eps, &fast()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "set,family,s_or_phi,scale,Z_or_value");
        assert_eq!(lines[1], "points:0,fh:1,1,0.1,1.0");
        assert_eq!(lines.len(), 5);
    }
}

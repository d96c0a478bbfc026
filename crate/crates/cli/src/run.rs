use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fracdim::energy::{build_kernel, kkt_certificate, min_energy, min_energy_bruteforce, EnergyOptions};
use fracdim::process::{KernelFamily, LaplaceExponent, LevyModel};
use fracdim::profiles::{
    box_profile, fh_profile, fh_subordinator_predicted, stable_profile, subordinator_box_dim, theta_index,
    ProfileOptions, ProfileReport, THETA_LAMBDA_MAX,
};
use fracdim::sets::CompactSet;
use fracdim::simulate::{image_dim_experiment, ImageOptions};
use fracdim::verify::{run_suite, Suite, DEFAULT_SEED};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Descriptor, RunConfig};
use crate::error::CliError;

/// What a command produced, before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<Vec<u8>>,
    /// One human-readable line.
    pub summary: String,
    /// Wall-clock details kept out of the report.
    pub timings: Value,
    pub failed: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn set_of(cfg: &RunConfig) -> Result<CompactSet, CliError> {
    let d = cfg.set.as_ref().ok_or_else(|| CliError::missing("set"))?;
    let set: CompactSet = d.resolve("set", CompactSet::parse)?;
    set.validate().map_err(|e| CliError::field("set", e.to_string()))?;
    Ok(set)
}

fn set_or_unit(cfg: &RunConfig) -> Result<CompactSet, CliError> {
    match cfg.set {
        Some(_) => set_of(cfg),
        None => Ok(CompactSet::unit_interval()),
    }
}

fn model_of(cfg: &RunConfig) -> Result<LevyModel, CliError> {
    let d = cfg.model.as_ref().ok_or_else(|| CliError::missing("model"))?;
    let m: LevyModel = d.resolve("model", LevyModel::parse)?;
    m.validate().map_err(|e| CliError::field("model", e.to_string()))?;
    Ok(m)
}

fn phi_of(cfg: &RunConfig) -> Result<LaplaceExponent, CliError> {
    let d: &Descriptor = cfg.phi.as_ref().ok_or_else(|| CliError::missing("phi"))?;
    let p: LaplaceExponent = d.resolve("phi", LaplaceExponent::parse)?;
    p.validate().map_err(|e| CliError::field("phi", e.to_string()))?;
    Ok(p)
}

fn s_of(cfg: &RunConfig) -> Result<f64, CliError> {
    let s = cfg.s.ok_or_else(|| CliError::missing("s"))?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(CliError::field("s", format!("{s} must be positive")));
    }
    Ok(s)
}

fn ladder_of(cfg: &RunConfig, increasing: bool) -> Result<Vec<f64>, CliError> {
    let l = cfg.ladder.ok_or_else(|| CliError::missing("ladder"))?;
    l.validate(increasing)?;
    Ok(l.values())
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
    let x = v.unwrap_or(default);
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::field(name, format!("{x} must be positive")));
    }
    Ok(x)
}

fn energy_options(cfg: &RunConfig) -> Result<EnergyOptions, CliError> {
    let d = EnergyOptions::default();
    Ok(EnergyOptions {
        tol: positive("tol", cfg.tol, d.tol)?,
        max_iter: cfg.max_iter.unwrap_or(d.max_iter),
        restarts: cfg.restarts.unwrap_or(d.restarts),
        seed: cfg.seed.unwrap_or(d.seed),
    })
}

fn profile_options(cfg: &RunConfig) -> Result<ProfileOptions, CliError> {
    let d = ProfileOptions::default();
    Ok(ProfileOptions {
        mesh_factor: positive("mesh_factor", cfg.mesh_factor, d.mesh_factor)?,
        mode: cfg.mode.unwrap_or(d.mode),
        energy: energy_options(cfg)?,
        ..d
    })
}

/// Kernel family named by `family`, taking its parameters from the config.
fn family_of(cfg: &RunConfig) -> Result<KernelFamily, CliError> {
    let name = cfg.family.as_deref().unwrap_or("fh");
    let fam = match name {
        "fh" => KernelFamily::fh(s_of(cfg)?),
        "stable" | "sandwich" => match model_of(cfg)? {
            LevyModel::IsotropicStable { alpha, d, .. } => KernelFamily::StableSandwich { alpha, d },
            _ => return Err(CliError::field("model", "the stable family needs an isotropic stable model")),
        },
        "exact" => KernelFamily::Exact { model: model_of(cfg)? },
        "subexp" => KernelFamily::subordinator(phi_of(cfg)?),
        other => return Err(CliError::field("family", format!("unknown family `{other}`"))),
    };
    fam.validate().map_err(|e| CliError::field("family", e.to_string()))?;
    Ok(fam)
}

fn profile_outcome(r: ProfileReport) -> Result<Outcome, CliError> {
    let mut csv = Vec::new();
    r.write_csv(&mut csv)?;
    Ok(Outcome {
        summary: format!("{} {} {}: estimate {:.4}", r.set, r.family, r.s_or_phi, r.estimate),
        report: to_value(&r),
        csv: Some(csv),
        timings: Value::Null,
        failed: false,
    })
}

fn profile(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let set = set_of(cfg)?;
    let opts = profile_options(cfg)?;
    let family = family_of(cfg)?;
    // the subordinator family is indexed by lambda, which grows along the ladder
    let increasing = matches!(family, KernelFamily::SubordinatorExp { .. });
    let scales = ladder_of(cfg, increasing)?;
    let r = match &family {
        KernelFamily::FalconerHowroyd { s } => fh_profile(&set, *s, &scales, &opts)?,
        KernelFamily::StableSandwich { alpha, d } => stable_profile(&set, *alpha, *d, &scales, &opts)?,
        KernelFamily::SubordinatorExp { phi } => subordinator_box_dim(phi, &set, &scales, &opts)?,
        KernelFamily::Exact { .. } => box_profile(&set, &family, &scales, &opts)?,
    };
    profile_outcome(r)
}

fn subordinator(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let phi = phi_of(cfg)?;
    let set = set_or_unit(cfg)?;
    let lambdas = ladder_of(cfg, true)?;
    profile_outcome(subordinator_box_dim(&phi, &set, &lambdas, &profile_options(cfg)?)?)
}

fn theta(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let phi = phi_of(cfg)?;
    let s = s_of(cfg)?;
    let lambda_max = positive("lambda_max", cfg.lambda_max, THETA_LAMBDA_MAX)?;
    let quad_tol = positive("quad_tol", cfg.quad_tol, 1e-8)?;
    let t = theta_index(&phi, s, lambda_max, quad_tol)?;
    let prediction = fh_subordinator_predicted(&phi, s, lambda_max, quad_tol)?;
    Ok(Outcome {
        summary: format!("theta = {:.4}, predicted profile = {:.4}", t.theta, prediction),
        report: json!({ "phi": phi.tag(), "theta": to_value(&t), "prediction": prediction }),
        csv: None,
        timings: Value::Null,
        failed: false,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = model_of(cfg)?;
    let set = set_or_unit(cfg)?;
    let radii = ladder_of(cfg, false)?;
    let seed = cfg.seed.ok_or_else(|| CliError::missing("seed"))?;
    let paths = cfg.paths.unwrap_or(32);
    if paths == 0 {
        return Err(CliError::field("paths", "must be positive"));
    }
    let d = ImageOptions::default();
    let opts = ImageOptions {
        mode: cfg.mode.unwrap_or(d.mode),
        points: cfg.points.unwrap_or(d.points),
        ..d
    };
    let e = image_dim_experiment(&model, &set, paths, &radii, seed, &opts)?;
    let mut csv = Vec::new();
    e.write_csv(&mut csv)?;
    Ok(Outcome {
        summary: format!("{} image of {}: median {:.4}, iqr {:.4}", e.model, e.set, e.median, e.iqr),
        report: to_value(&e),
        csv: Some(csv),
        timings: Value::Null,
        failed: false,
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let suite = cfg.suite.unwrap_or(Suite::Full);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let (report, timings) = run_suite(suite, seed);
    let lines: Vec<String> = report
        .criteria
        .iter()
        .map(|c| format!("criterion {:>2} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.name))
        .collect();
    Ok(Outcome {
        summary: lines.join("\n"),
        failed: !report.pass,
        report: to_value(&report),
        csv: None,
        timings: timings.into_iter().map(|(id, t)| (id.to_string(), json!(t))).collect(),
    })
}

fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let set = set_of(cfg)?;
    let family = family_of(cfg)?;
    let scale = cfg.scale.ok_or_else(|| CliError::missing("scale"))?;
    let mesh = positive("mesh", cfg.mesh, scale)?;
    let resolution = positive("resolution", cfg.resolution, 1.0 / 200.0)?;
    let net = set.discretize(mesh)?;
    let k = build_kernel(&family, scale, &net)?;
    let fw = min_energy(&k, &energy_options(cfg)?)?;
    let bf = min_energy_bruteforce(&k, resolution)?;
    let w = fw.simplex_weights()?;
    let kkt = kkt_certificate(&k, &w, 1e-5);
    let diff = fw.z - bf.value;
    Ok(Outcome {
        summary: format!("min_energy {:.6}, lattice {:.6}, difference {:.2e}", fw.z, bf.value, diff),
        report: json!({
            "set": set.id(),
            "family": family.tag(),
            "scale": scale,
            "points": net.points,
            "psd": to_value(&k.psd),
            "min_energy": to_value(&fw),
            "weights": w.as_slice(),
            "lattice": to_value(&bf),
            "resolution": resolution,
            "difference": diff,
            "kkt": to_value(&kkt),
        }),
        csv: None,
        timings: Value::Null,
        failed: false,
    })
}

/// Runs the configured command without writing anything.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command.ok_or_else(|| CliError::missing("command"))? {
        Command::Profile => profile(cfg),
        Command::Subordinator => subordinator(cfg),
        Command::Theta => theta(cfg),
        Command::Simulate => simulate(cfg),
        Command::Verify => verify(cfg),
        Command::Oracle => oracle(cfg),
    }
}

/// Report body as written: pretty JSON with sorted keys.
pub fn render(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("value serializes") + "\n"
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs and writes the report, CSV and sidecar. The summary goes to stderr
/// and the report to stdout when no output path is set.
pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let started = unix_now();
    let clock = Instant::now();
    let outcome = run(cfg)?;
    let body = render(&outcome.report);
    eprintln!("{}", outcome.summary);
    match &cfg.out {
        Some(out) => {
            write(out, body.as_bytes())?;
            let meta = json!({
                "command": cfg.command.map(Command::name),
                "started_unix": started,
                "finished_unix": unix_now(),
                "elapsed_seconds": clock.elapsed().as_secs_f64(),
                "threads": rayon::current_num_threads(),
                "version": env!("CARGO_PKG_VERSION"),
                "timings": outcome.timings,
                "config": serde_json::to_value(cfg).expect("config serializes"),
            });
            write(&sidecar_path(out), render(&meta).as_bytes())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if let Some(path) = &cfg.csv {
        match &outcome.csv {
            Some(bytes) => write(path, bytes)?,
            None => return Err(CliError::field("csv", "this command produces no CSV")),
        }
    }
    if outcome.failed {
        return Err(CliError::VerifyFailed);
    }
    Ok(())
}

/// Sizes the global pool from `FRACDIM_THREADS` when set.
pub fn init_threads(var: Option<String>) -> Result<(), CliError> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::field("FRACDIM_THREADS", format!("`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::field("FRACDIM_THREADS", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LadderSpec;

    fn cfg(command: Command) -> RunConfig {
        RunConfig {
            command: Some(command),
            ..Default::default()
        }
    }

    #[test]
    fn missing_fields_are_validation_errors() {
        let e = run(&cfg(Command::Theta)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("phi"));
        let e = run(&RunConfig {
            model: Some(Descriptor::Short("bm".into())),
            ladder: Some(LadderSpec { start: 0.1, ratio: 0.5, count: 4 }),
            ..cfg(Command::Simulate)
        })
        .unwrap_err();
        assert!(e.to_string().contains("seed"));
    }

    #[test]
    fn bad_values_name_the_field() {
        let e = run(&RunConfig {
            phi: Some(Descriptor::Short("stable:1.7".into())),
            s: Some(0.7),
            ..cfg(Command::Theta)
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("beta") || e.to_string().contains("phi"), "{e}");
        let e = run(&RunConfig {
            set: Some(Descriptor::Short("cantor3".into())),
            s: Some(1.0),
            ladder: Some(LadderSpec { start: 0.1, ratio: 2.0, count: 8 }),
            ..cfg(Command::Profile)
        })
        .unwrap_err();
        assert!(e.to_string().contains("ladder"));
    }

    #[test]
    fn theta_example() {
        let o = run(&RunConfig {
            phi: Some(Descriptor::Short("stable:0.5".into())),
            s: Some(0.7),
            ..cfg(Command::Theta)
        })
        .unwrap();
        let theta = o.report["theta"]["theta"].as_f64().unwrap();
        assert!((theta - 2.0 / 7.0).abs() < 1e-3);
        assert!((o.report["prediction"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn oracle_on_three_points() {
        let o = run(&RunConfig {
            set: Some(Descriptor::Short("points:0,0.5,1".into())),
            s: Some(1.0),
            scale: Some(0.5),
            mesh: Some(0.01),
            ..cfg(Command::Oracle)
        })
        .unwrap();
        assert!(o.report["difference"].as_f64().unwrap().abs() <= 1e-3);
    }

    #[test]
    fn record_descriptors_resolve() {
        let o = run(&RunConfig {
            phi: Some(Descriptor::Record(serde_json::json!({"family": "stable", "params": {"beta": 0.5}}))),
            s: Some(0.7),
            ..cfg(Command::Theta)
        })
        .unwrap();
        assert_eq!(o.report["phi"], "stable:0.5");
    }

    #[test]
    fn rendered_keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(render(&v), "{\n  \"a\": {\n    \"c\": 3,\n    \"d\": 2\n  },\n  \"b\": 1\n}\n");
    }

    #[test]
    fn sidecar_next_to_report() {
        assert_eq!(sidecar_path(Path::new("out/r.json")), PathBuf::from("out/r.meta.json"));
    }
}

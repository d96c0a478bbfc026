//! Run configuration: a flat JSON record whose fields mirror the command-line
//! flags one to one.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fracdim::ladder::{geometric, SlopeMode};
use fracdim::verify::Suite;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Profile,
    Subordinator,
    Theta,
    Simulate,
    Verify,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Subordinator => "subordinator",
            Command::Theta => "theta",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Oracle => "oracle",
        }
    }
}

/// A set, model or exponent given either as a short string (`cantor3`,
/// `stable:0.8`) or as a full JSON record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Descriptor {
    Short(String),
    Record(serde_json::Value),
}

impl Descriptor {
    pub fn parse_flag(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with('{') {
            serde_json::from_str(s).map(Descriptor::Record).map_err(|e| e.to_string())
        } else {
            Ok(Descriptor::Short(s.to_string()))
        }
    }

    pub fn resolve<T: DeserializeOwned>(
        &self,
        field: &'static str,
        short: impl FnOnce(&str) -> fracdim::Result<T>,
    ) -> Result<T, CliError> {
        match self {
            Descriptor::Short(s) => short(s).map_err(|e| CliError::field(field, e.to_string())),
            Descriptor::Record(v) => {
                serde_json::from_value(v.clone()).map_err(|e| CliError::field(field, e.to_string()))
            }
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Short(s) => f.write_str(s),
            Descriptor::Record(v) => write!(f, "{v}"),
        }
    }
}

/// Geometric ladder `start * ratio^k`, `k < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl LadderSpec {
    pub fn parse_flag(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [start, ratio, count] = parts.as_slice() else {
            return Err(format!("expected start,ratio,count, got `{s}`"));
        };
        Ok(LadderSpec {
            start: start.parse().map_err(|e| format!("start: {e}"))?,
            ratio: ratio.parse().map_err(|e| format!("ratio: {e}"))?,
            count: count.parse().map_err(|e| format!("count: {e}"))?,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        geometric(self.start, self.ratio, self.count)
    }

    /// Checks the ladder; `increasing` selects lambda-ladders (ratio > 1).
    pub fn validate(&self, increasing: bool) -> Result<(), CliError> {
        if self.count < 3 {
            return Err(CliError::field("ladder", format!("count {} < 3", self.count)));
        }
        if !(self.start > 0.0 && self.start.is_finite()) {
            return Err(CliError::field("ladder", format!("start {} must be positive", self.start)));
        }
        let ok = if increasing {
            self.ratio > 1.0 && self.ratio.is_finite()
        } else {
            self.ratio > 0.0 && self.ratio < 1.0
        };
        if !ok {
            let want = if increasing { "> 1" } else { "in (0, 1)" };
            return Err(CliError::field("ladder", format!("ratio {} must be {want}", self.ratio)));
        }
        Ok(())
    }
}

impl fmt::Display for LadderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.start, self.ratio, self.count)
    }
}

fn parse_mode(s: &str) -> Result<SlopeMode, String> {
    SlopeMode::parse(s).map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).map_err(|e| e.to_string())
}

fn mode_name(m: SlopeMode) -> &'static str {
    match m {
        SlopeMode::LeastSquares => "least_squares",
        SlopeMode::Upper => "upper",
        SlopeMode::Lower => "lower",
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Fast => "fast",
        Suite::Full => "full",
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Command to run
    #[arg(value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,

    /// Compact set: cantor3, cantor:r, unit, interval:a,b, points:..., or a JSON record
    #[arg(long, value_parser = Descriptor::parse_flag)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Descriptor>,

    /// Levy model: bm, stable:alpha[,scale[,d]], subordinator:<phi>, subbm:d:<phi>, or a JSON record
    #[arg(long, value_parser = Descriptor::parse_flag)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Descriptor>,

    /// Laplace exponent: stable:beta, drift:c, gamma:a,b, cpd:rate,mean,drift, or a JSON record
    #[arg(long, value_parser = Descriptor::parse_flag)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Descriptor>,

    /// Kernel family for profile and oracle: fh, stable, exact, subexp
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,

    /// Profile exponent s
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,

    /// Scale ladder start,ratio,count (radii, or lambdas for subordinator)
    #[arg(long, value_parser = LadderSpec::parse_flag)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSpec>,

    /// Slope reading: upper, lower, least_squares
    #[arg(long, value_parser = parse_mode)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SlopeMode>,

    /// Relative duality-gap target for energy minimization
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,

    /// Random restarts for kernels not known to be PSD
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,

    /// Net mesh as a fraction of the scale
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_factor: Option<f64>,

    /// Quadrature tolerance for theta
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,

    /// Upper end of the theta grid
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,

    /// Kernel scale for oracle
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,

    /// Net mesh for oracle
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,

    /// Lattice step for the brute-force oracle
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Number of simulated paths
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,

    /// Target net points per path
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,

    /// Verification suite: fast or full
    #[arg(long, value_parser = parse_suite)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,

    /// JSON report path (stdout when absent)
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// CSV ladder path
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

macro_rules! fields {
    ($m:ident) => {
        $m!(set, model, phi, family, s, ladder, mode, tol, max_iter, restarts, mesh_factor, quad_tol,
            lambda_max, scale, mesh, resolution, seed, paths, points, suite, out, csv)
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::field("config", format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
    }

    /// Fields set in `flags` win over those in `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        macro_rules! merge {
            ($($f:ident),*) => {
                RunConfig {
                    command: flags.command.or(self.command),
                    $($f: flags.$f.or(self.$f),)*
                }
            };
        }
        fields!(merge)
    }

    /// The flag form of this config.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(c) = self.command {
            out.push(c.name().to_string());
        }
        macro_rules! push {
            ($($f:ident),*) => {
                $(
                    if let Some(v) = &self.$f {
                        out.push(format!("--{}", stringify!($f).replace('_', "-")));
                        out.push(Flag::flag(v));
                    }
                )*
            };
        }
        fields!(push);
        out
    }
}

trait Flag {
    fn flag(&self) -> String;
}

macro_rules! display_flag {
    ($($t:ty),*) => { $(impl Flag for $t { fn flag(&self) -> String { self.to_string() } })* };
}
display_flag!(Descriptor, String, f64, usize, u64, LadderSpec);

impl Flag for SlopeMode {
    fn flag(&self) -> String {
        mode_name(*self).to_string()
    }
}

impl Flag for Suite {
    fn flag(&self) -> String {
        suite_name(*self).to_string()
    }
}

impl Flag for PathBuf {
    fn flag(&self) -> String {
        self.display().to_string()
    }
}

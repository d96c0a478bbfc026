use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyResult;
use crate::error::Result;
use crate::ladder::{LadderEstimate, SlopeMode};
use crate::sets::SelfCoverCertificate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub set: String,
    pub family: String,
    /// Profile parameter `s`, or the Laplace exponent tag.
    pub s_or_phi: String,
    pub estimate: f64,
    pub mode: SlopeMode,
    pub ladder: LadderEstimate,
    /// Net mesh used at each scale.
    pub meshes: Vec<f64>,
    /// Net size at each scale.
    pub net_sizes: Vec<usize>,
    /// Per-scale minimization summaries, empty for closed-form profiles.
    pub energies: Vec<EnergyResult>,
    pub certificate: Option<SelfCoverCertificate>,
    /// Whether the estimate lies inside the sanity window.
    pub within_window: bool,
}

impl ProfileReport {
    /// One row per ladder point: `set, family, s_or_phi, scale, Z_or_value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["set", "family", "s_or_phi", "scale", "Z_or_value"])?;
        for (s, v) in self.ladder.scales.iter().zip(&self.ladder.values) {
            wr.write_record([
                self.set.as_str(),
                self.family.as_str(),
                self.s_or_phi.as_str(),
                &format!("{s:?}"),
                &format!("{v:?}"),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

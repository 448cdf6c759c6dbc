//! Local charts of constants of motion and the smooth partition of unity
//! that glues them together.

mod involutive;
mod lipschitz;
mod partition;
mod transport;

use serde::{Deserialize, Serialize};

pub use involutive::{build_involutive_set, involution_profile, InvolutionProfile, InvolutiveSet, DEFAULT_BRACKET_TOL};
pub use lipschitz::{lipschitz_check, LipschitzReport, DEFAULT_LIPSCHITZ_CAP};
pub use partition::{build_partition, localize, smooth_step, Atlas, BumpFunction, SCALE_RATIO_LIMIT};
pub use transport::{
    probe_transport_residual, transport_constant, transport_point, trusted_nodes, Hypersurface, ProbeReport, TransportOptions, Transported,
    TRANSVERSALITY_TOL,
};

use crate::phasespace::{AxisBox, PhaseFunction};

/// One chart: its box, frontier width, constants `[H, O_1, ...]` and
/// optional conjugate angles.
#[derive(Debug, Clone)]
pub struct Chart {
    pub id: usize,
    pub region: AxisBox,
    pub frontier_width: f64,
    pub constants: Vec<PhaseFunction>,
    pub angles: Option<Vec<PhaseFunction>>,
}

impl Chart {
    /// Values of all constants at `x` (exact forms where known, else interpolated).
    pub fn constants_at(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.constants.iter().map(|c| c.value_at(x).map(|z| z.re)).collect()
    }
}

/// Serializable description of an atlas: chart boxes plus references to the
/// files holding each chart's constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasFile {
    pub charts: Vec<ChartEntry>,
    pub epsilon: f64,
    pub hbar: f64,
    pub action_scale: f64,
    #[serde(default)]
    pub periods: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub id: usize,
    #[serde(rename = "box")]
    pub region: AxisBox,
    pub epsilon: f64,
    /// Paths (relative to the atlas file) of CSV files with the constants.
    #[serde(default)]
    pub constants: Vec<String>,
}

impl AtlasFile {
    pub fn to_atlas(&self) -> crate::Result<Atlas> {
        let boxes: Vec<AxisBox> = self.charts.iter().map(|c| c.region.clone()).collect();
        for b in &boxes {
            AxisBox::new(b.lo.clone(), b.hi.clone())?;
        }
        build_partition(&boxes, self.epsilon, &self.periods, self.hbar, self.action_scale)
    }
}

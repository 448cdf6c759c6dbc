use super::classify::ConstantKind;
use super::density::{classical_density, ClassicalDensity};
use super::volume::{config_volume, LevelSpec};
use crate::charts::Chart;
use crate::error::{invalid, Error, Result};
use crate::phasespace::{PhaseFunction, PhaseGrid};

/// A candidate constant together with its classification.
#[derive(Debug, Clone)]
pub struct ClassifiedFunction {
    pub function: PhaseFunction,
    pub kind: ConstantKind,
}

/// Equilibrium built from the globally conserved functions only, on one chart
/// covering `grid`. The first function is the energy; with no further
/// functions the result is the microcanonical density.
///
/// `levels` holds `(level values, weight)` pairs. Locally conserved functions
/// are refused.
pub fn traced_equilibrium(functions: &[ClassifiedFunction], levels: &[(Vec<f64>, f64)], eta: f64, grid: PhaseGrid, samples: usize, seed: u64) -> Result<ClassicalDensity> {
    if functions.is_empty() {
        return Err(invalid("the energy must be supplied"));
    }
    if let Some(i) = functions.iter().position(|f| f.kind == ConstantKind::Local) {
        return Err(Error::LocalFunction(i));
    }
    let chart = Chart {
        id: 0,
        region: grid.bounds(),
        frontier_width: 0.0,
        constants: functions.iter().map(|f| f.function.clone()).collect(),
        angles: None,
    };
    let mut specs = Vec::with_capacity(levels.len());
    let mut volumes = Vec::with_capacity(levels.len());
    for (k, (l, w)) in levels.iter().enumerate() {
        volumes.push(config_volume(&chart, None, l, eta, samples, seed.wrapping_add(k as u64))?);
        specs.push(LevelSpec { chart: 0, levels: l.clone(), weight: *w });
    }
    classical_density(&[chart], None, &specs, &volumes, grid)
}

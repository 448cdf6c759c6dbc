use serde::{Deserialize, Serialize};

use super::transport::{max_over, resample, transport_constant, trusted_nodes, Hypersurface, TransportOptions};
use crate::error::{Error, Result};
use crate::phasespace::{poisson_bracket, PhaseFunction, PhaseGrid};

/// Default tolerance on pairwise brackets, calibrated for 257 nodes per axis.
pub const DEFAULT_BRACKET_TOL: f64 = 1e-6;

/// Constants of motion `H, O_1, ..., O_N` on a region grid.
#[derive(Debug, Clone)]
pub struct InvolutiveSet {
    pub constants: Vec<PhaseFunction>,
    /// Nodes where some constant could not be transported.
    pub flagged: Vec<usize>,
    /// `residuals[i][j] = max |{C_i, C_j}|` over trusted nodes.
    pub residuals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolutionProfile {
    /// Max residual on nodes within one grid spacing of the hypersurface.
    pub near_surface: f64,
    /// Max residual over all trusted nodes.
    pub interior: f64,
}

/// Builds `{H, O_1, ...}` by transporting one seed per extra constant and
/// checks that all pairwise brackets stay below `bracket_tol`.
pub fn build_involutive_set(h: &PhaseFunction, seeds: &[Hypersurface], region: &PhaseGrid, bracket_tol: f64, opts: &TransportOptions) -> Result<InvolutiveSet> {
    let mut constants = vec![resample(h, region)?];
    let mut valid = vec![true; region.len()];
    for s in seeds {
        let t = transport_constant(h, s, region, opts)?;
        for &i in &t.flagged {
            valid[i] = false;
        }
        constants.push(t.function);
    }
    let trusted = trusted_nodes(region, &valid);
    let n = constants.len();
    let mut residuals = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let b = poisson_bracket(&constants[i], &constants[j])?;
            let (v, loc) = max_over(&b, &trusted);
            if v > bracket_tol {
                return Err(Error::NotInvolutive { i, j, value: v, location: loc });
            }
            residuals[i][j] = v;
            residuals[j][i] = v;
        }
    }
    let flagged = valid.iter().enumerate().filter(|(_, v)| !**v).map(|(i, _)| i).collect();
    Ok(InvolutiveSet { constants, flagged, residuals })
}

/// Compares the bracket residual next to the seeding hypersurface with the
/// residual over the whole trusted interior.
pub fn involution_profile(set: &InvolutiveSet, i: usize, j: usize, surface: &Hypersurface) -> Result<InvolutionProfile> {
    let grid = set.constants[0].grid();
    let mut valid = vec![true; grid.len()];
    for &k in &set.flagged {
        valid[k] = false;
    }
    let trusted = trusted_nodes(grid, &valid);
    let b = poisson_bracket(&set.constants[i], &set.constants[j])?;
    let h = grid.axis(surface.axis).spacing();
    let near: Vec<usize> = trusted.iter().copied().filter(|&k| (grid.point(k)[surface.axis] - surface.value).abs() <= h * (1.0 + 1e-9)).collect();
    Ok(InvolutionProfile { near_surface: max_over(&b, &near).0, interior: max_over(&b, &trusted).0 })
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::density::{ClassicalDensity, DensityModel};
use crate::error::{invalid, Error, Result};
use crate::numeric::{gauss_legendre, stream_rng};
use crate::phasespace::{hamilton_flow_sampled, AxisBox, Hamiltonian, Integrator};

/// Lowest accepted rejection-sampling efficiency.
pub const MIN_SAMPLING_EFFICIENCY: f64 = 1e-4;
const MAX_ATTEMPTS: usize = 100_000;

/// Phase points of an ensemble at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub time: f64,
    pub states: Vec<Vec<f64>>,
}

/// Draws `count` points from `model` by rejection inside `proposal`.
/// Particle `i` uses random stream `i`, so results do not depend on threading.
/// Returns the ensemble and the observed acceptance rate.
pub fn sample_density(model: &DensityModel, proposal: &AxisBox, count: usize, seed: u64) -> Result<(Ensemble, f64)> {
    if proposal.dim() != model.dim() {
        return Err(invalid("proposal box dimension differs from the density"));
    }
    let bound = model.upper_bound();
    let d = proposal.dim();
    let draws: Vec<Result<(Vec<f64>, usize)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut x = vec![0.0; d];
            for attempt in 1..=MAX_ATTEMPTS {
                for k in 0..d {
                    x[k] = proposal.lo[k] + rng.random::<f64>() * (proposal.hi[k] - proposal.lo[k]);
                }
                let u: f64 = rng.random();
                if u * bound < model.eval(&x) {
                    return Ok((x, attempt));
                }
            }
            Err(Error::SamplingEfficiency(1.0 / MAX_ATTEMPTS as f64))
        })
        .collect();
    let mut states = Vec::with_capacity(count);
    let mut attempts = 0usize;
    for r in draws {
        let (x, a) = r?;
        states.push(x);
        attempts += a;
    }
    let efficiency = count as f64 / attempts.max(1) as f64;
    if efficiency < MIN_SAMPLING_EFFICIENCY {
        return Err(Error::SamplingEfficiency(efficiency));
    }
    Ok((Ensemble { time: 0.0, states }, efficiency))
}

/// Moves every member of `ens` along the flow for `duration`, wrapping
/// coordinates with a period `(min, max)` back into range.
pub fn evolve_ensemble<H: Hamiltonian + ?Sized>(h: &H, ens: &Ensemble, duration: f64, dt: f64, integrator: Integrator, wrap: &[Option<(f64, f64)>]) -> Result<Ensemble> {
    let states: Result<Vec<Vec<f64>>> = ens
        .states
        .par_iter()
        .map(|x| {
            let traj = hamilton_flow_sampled(h, x, duration, dt, integrator, usize::MAX)?;
            let mut y = traj.last().to_vec();
            for (v, w) in y.iter_mut().zip(wrap) {
                if let Some((lo, hi)) = w {
                    *v = lo + (*v - lo).rem_euclid(hi - lo);
                }
            }
            Ok(y)
        })
        .collect();
    Ok(Ensemble { time: ens.time + duration, states: states? })
}

/// Samples the density on its grid box and transports the sample to each of
/// `times` (ascending). Periodic grid axes are wrapped.
pub fn sample_trajectories<H: Hamiltonian + ?Sized>(
    density: &ClassicalDensity,
    h: &H,
    count: usize,
    times: &[f64],
    dt: f64,
    integrator: Integrator,
    seed: u64,
) -> Result<Vec<Ensemble>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(invalid("times must be non-negative and ascending"));
    }
    let grid = density.function.grid();
    let (mut ens, _) = sample_density(&density.model, &grid.bounds(), count, seed)?;
    let wrap: Vec<Option<(f64, f64)>> = grid.axes().iter().map(|a| a.periodic.then(|| (a.min, a.min + a.period()))).collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > ens.time {
            ens = evolve_ensemble(h, &ens, t - ens.time, dt, integrator, &wrap)?;
        }
        out.push(ens.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins counted separately; sparse bins are pooled into one extra bin.
    pub bins: usize,
}

/// Pearson test of a 2D sample against `density` on a `bins x bins` grid over
/// `window`. Bin probabilities use 8x8 Gauss-Legendre quadrature and are
/// renormalized to the window; bins expecting fewer than 5 points are pooled.
pub fn chi_square_2d<F: Fn(&[f64]) -> f64 + Sync>(points: &[Vec<f64>], density: F, window: &AxisBox, bins: usize) -> Result<ChiSquareTest> {
    if window.dim() != 2 || bins == 0 {
        return Err(invalid("chi-square binning needs a 2D window and at least one bin"));
    }
    let (gx, gw) = gauss_legendre(8);
    let w = [(window.hi[0] - window.lo[0]) / bins as f64, (window.hi[1] - window.lo[1]) / bins as f64];
    let probs: Vec<f64> = (0..bins * bins)
        .into_par_iter()
        .map(|b| {
            let (i, j) = (b / bins, b % bins);
            let c0 = window.lo[0] + (i as f64 + 0.5) * w[0];
            let c1 = window.lo[1] + (j as f64 + 0.5) * w[1];
            let mut s = 0.0;
            for (xa, wa) in gx.iter().zip(&gw) {
                for (xb, wb) in gx.iter().zip(&gw) {
                    s += wa * wb * density(&[c0 + 0.5 * w[0] * xa, c1 + 0.5 * w[1] * xb]);
                }
            }
            s * 0.25 * w[0] * w[1]
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("density has no mass in the window"));
    }
    let mut counts = vec![0usize; bins * bins];
    let mut inside = 0usize;
    for x in points {
        let i = ((x[0] - window.lo[0]) / w[0]).floor();
        let j = ((x[1] - window.lo[1]) / w[1]).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < bins && (j as usize) < bins {
            counts[i as usize * bins + j as usize] += 1;
            inside += 1;
        }
    }
    let n = inside as f64;
    let mut stat = 0.0;
    let mut used = 0usize;
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for (p, c) in probs.iter().zip(&counts) {
        let e = n * p / total;
        if e < 5.0 {
            pooled_e += e;
            pooled_o += *c as f64;
        } else {
            stat += (*c as f64 - e).powi(2) / e;
            used += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        used += 1;
    }
    if used < 2 {
        return Err(invalid("too few populated bins for a chi-square test"));
    }
    let dof = used - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareTest { statistic: stat, dof, p_value: 1.0 - dist.cdf(stat), bins: used })
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{Atlas, Chart};
use crate::error::{invalid, Error, Result};
use crate::numeric::{gaussian, stream_rng, CompensatedSum};
use crate::phasespace::AxisBox;

/// Largest accepted `mc_error / volume`.
pub const MAX_RELATIVE_MC_ERROR: f64 = 0.05;
const BLOCK: usize = 4096;

/// Level values `(w, p_1, ..., p_N)` of a chart's constants and the weight
/// of that level set in an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub chart: usize,
    pub levels: Vec<f64>,
    pub weight: f64,
}

/// Smoothed microcanonical volume
/// `C = integral prod_k N_eta(c_k - level_k) B_chart dq dp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroVolume {
    pub chart: usize,
    pub levels: Vec<f64>,
    pub eta: f64,
    pub volume: f64,
    pub mc_error: f64,
    pub samples: usize,
}

impl MicroVolume {
    pub fn relative_error(&self) -> f64 {
        self.mc_error / self.volume
    }
}

/// Sampling box of a chart: its region, widened by half a frontier when an
/// atlas supplies bump weights.
pub fn chart_domain(chart: &Chart, atlas: Option<&Atlas>) -> AxisBox {
    match atlas {
        Some(a) => chart.region.expanded(0.5 * a.epsilon),
        None => chart.region.clone(),
    }
}

pub(crate) fn kernel_product(values: &[f64], levels: &[f64], eta: f64) -> f64 {
    values.iter().zip(levels).map(|(v, l)| gaussian(v - l, eta)).product()
}

/// Monte Carlo estimate of the smoothed level-set volume of a chart.
///
/// Deterministic for a given seed: sample block `b` always uses stream `b`,
/// and block sums are combined in order with compensated summation.
pub fn config_volume(chart: &Chart, atlas: Option<&Atlas>, levels: &[f64], eta: f64, samples: usize, seed: u64) -> Result<MicroVolume> {
    if levels.len() != chart.constants.len() {
        return Err(invalid(format!("{} levels given for {} constants", levels.len(), chart.constants.len())));
    }
    if !(eta > 0.0) || samples < 2 {
        return Err(invalid("need eta > 0 and at least two samples"));
    }
    let domain = chart_domain(chart, atlas);
    let vol = domain.volume();
    let d = domain.dim();
    let blocks = samples.div_ceil(BLOCK);
    let n_constants = levels.len();
    let partials: Vec<(CompensatedSum, CompensatedSum, Vec<(f64, f64)>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let mut s = CompensatedSum::new();
            let mut s2 = CompensatedSum::new();
            let mut range = vec![(f64::INFINITY, f64::NEG_INFINITY); n_constants];
            let mut x = vec![0.0; d];
            for _ in 0..BLOCK.min(samples - b * BLOCK) {
                for k in 0..d {
                    x[k] = domain.lo[k] + rng.random::<f64>() * (domain.hi[k] - domain.lo[k]);
                }
                let Some(c) = chart.constants_at(&x) else { continue };
                for (r, v) in range.iter_mut().zip(&c) {
                    r.0 = r.0.min(*v);
                    r.1 = r.1.max(*v);
                }
                let bump = match atlas {
                    Some(a) => a.weight(chart.id, &x).unwrap_or(0.0),
                    None => 1.0,
                };
                let v = kernel_product(&c, levels, eta) * bump;
                s.add(v);
                s2.add(v * v);
            }
            (s, s2, range)
        })
        .collect();
    let mut s = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut range = vec![(f64::INFINITY, f64::NEG_INFINITY); n_constants];
    for (a, b, r) in &partials {
        s.merge(a);
        s2.merge(b);
        for (acc, x) in range.iter_mut().zip(r) {
            acc.0 = acc.0.min(x.0);
            acc.1 = acc.1.max(x.1);
        }
    }
    for (k, (l, (lo, hi))) in levels.iter().zip(&range).enumerate() {
        if *l < lo - 3.0 * eta || *l > hi + 3.0 * eta {
            return Err(Error::EmptyLevelSet(format!("level {l} of constant {k} lies outside the attained range [{lo}, {hi}]")));
        }
    }
    let n = samples as f64;
    let mean = s.value() / n;
    let var = (s2.value() / n - mean * mean).max(0.0);
    let volume = vol * mean;
    let mc_error = vol * (var / n).sqrt();
    if !(volume > 3.0 * mc_error) {
        return Err(Error::EmptyLevelSet(format!("volume {volume:e} is indistinguishable from zero (error {mc_error:e})")));
    }
    if mc_error / volume > MAX_RELATIVE_MC_ERROR {
        return Err(Error::MonteCarloPrecision(mc_error / volume));
    }
    Ok(MicroVolume { chart: chart.id, levels: levels.to_vec(), eta, volume, mc_error, samples })
}

/// Volumes at `eta` and `eta / 2`, for judging smoothing convergence.
pub fn volume_convergence(chart: &Chart, atlas: Option<&Atlas>, levels: &[f64], eta: f64, samples: usize, seed: u64) -> Result<(MicroVolume, MicroVolume)> {
    Ok((config_volume(chart, atlas, levels, eta, samples, seed)?, config_volume(chart, atlas, levels, 0.5 * eta, samples, seed)?))
}

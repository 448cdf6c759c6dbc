use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{force, hessian, BilliardSpec};
use crate::error::{invalid, Error, Result};
use crate::numeric::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub dt: f64,
    pub blocks: usize,
    /// Time between tangent-vector renormalizations.
    pub renorm_every: f64,
    /// Seed of the initial tangent direction.
    pub seed: u64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { dt: 1e-3, blocks: 20, renorm_every: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda_max: f64,
    pub stderr: f64,
    pub blocks: Vec<f64>,
}

/// Largest Lyapunov exponent from the linearized kick-drift-kick map,
/// renormalizing the tangent vector every `renorm_every`. The run is split
/// into equal blocks; the estimate is the block mean and the error the
/// standard error of the block values.
pub fn lyapunov(spec: &BilliardSpec, start: [f64; 4], t_end: f64, opts: &LyapunovOptions) -> Result<LyapunovEstimate> {
    spec.validate()?;
    if !(opts.dt > 0.0) || !(opts.renorm_every >= opts.dt) || opts.blocks < 2 || !(t_end > 0.0) {
        return Err(invalid("need dt > 0, renorm_every >= dt, at least two blocks and t_end > 0"));
    }
    let steps_per_renorm = (opts.renorm_every / opts.dt).round().max(1.0) as usize;
    let renorms = (t_end / (steps_per_renorm as f64 * opts.dt)).round() as usize;
    let per_block = renorms / opts.blocks;
    if per_block == 0 {
        return Err(invalid("run too short for the requested number of blocks"));
    }
    let block_time = per_block as f64 * steps_per_renorm as f64 * opts.dt;
    let mut rng = stream_rng(opts.seed, 0);
    let mut v: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>() - 0.5);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut s = start;
    let dt = opts.dt;
    let mut f = force(spec, s[0], s[1]).ok_or_else(|| Error::Geometry("start lies outside the billiard".into()))?;
    let mut k = hessian(spec, s[0], s[1]);
    let mut t = 0.0;
    let mut blocks = Vec::with_capacity(opts.blocks);
    for _ in 0..opts.blocks {
        let mut log_growth = 0.0;
        for _ in 0..per_block {
            for _ in 0..steps_per_renorm {
                s[2] += 0.5 * dt * f[0];
                s[3] += 0.5 * dt * f[1];
                v[2] -= 0.5 * dt * (k[0] * v[0] + k[1] * v[1]);
                v[3] -= 0.5 * dt * (k[1] * v[0] + k[2] * v[1]);
                s[0] += dt * s[2];
                s[1] += dt * s[3];
                v[0] += dt * v[2];
                v[1] += dt * v[3];
                t += dt;
                f = force(spec, s[0], s[1]).ok_or(Error::Escaped(t))?;
                k = hessian(spec, s[0], s[1]);
                s[2] += 0.5 * dt * f[0];
                s[3] += 0.5 * dt * f[1];
                v[2] -= 0.5 * dt * (k[0] * v[0] + k[1] * v[1]);
                v[3] -= 0.5 * dt * (k[1] * v[0] + k[2] * v[1]);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::NonFinite(format!("tangent vector at t = {t}")));
            }
            log_growth += n.ln();
            v.iter_mut().for_each(|x| *x /= n);
        }
        blocks.push(log_growth / block_time);
    }
    let b = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / b;
    let var = blocks.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    Ok(LyapunovEstimate { lambda_max: mean, stderr: (var / b).sqrt(), blocks })
}

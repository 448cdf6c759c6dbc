use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::transport::Hypersurface;
use crate::error::{Error, Result};
use crate::phasespace::{hamiltonian_of, AxisBox, PhaseFunction};

/// Default ceiling on the Hessian norm accepted as "Lipschitz".
pub const DEFAULT_LIPSCHITZ_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Largest spectral norm of the Hessian of `H` over the region
    /// (a Lipschitz constant of the Hamiltonian vector field).
    pub bound: f64,
    pub ok: bool,
    /// Whether the flow crosses the hypersurface transversally at every sampled point.
    pub delta_ok: bool,
    /// Smallest `|X_H . n| / |X_H|` over the sampled hypersurface points.
    pub min_transversality: f64,
}

/// Bounds the Lipschitz constant of `X_H` on `region` and checks
/// transversality of the flow to an optional seeding hypersurface.
pub fn lipschitz_check(h: &PhaseFunction, region: Option<&AxisBox>, surface: Option<&Hypersurface>, cap: f64) -> Result<LipschitzReport> {
    let grid = h.grid();
    let d = grid.ndim();
    if h.values().iter().any(|z| z.re.is_nan() || z.im.is_nan()) {
        return Err(Error::NonFinite("Hamiltonian samples contain NaN".into()));
    }
    let in_region = |i: usize| region.is_none_or(|r| r.contains(&grid.point(i)));
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| in_region(i)).collect();
    let singular = nodes.iter().any(|&i| !h.values()[i].re.is_finite());
    let mut bound: f64 = 0.0;
    if singular {
        bound = f64::INFINITY;
    } else {
        let mut second = vec![vec![None; d]; d];
        for a in 0..d {
            let da = h.derivative(a)?;
            for b in a..d {
                second[a][b] = Some(da.derivative(b)?);
            }
        }
        for &i in &nodes {
            let m = DMatrix::from_fn(d, d, |a, b| {
                let (x, y) = if a <= b { (a, b) } else { (b, a) };
                second[x][y].as_ref().expect("upper triangle filled").values()[i].re
            });
            if m.iter().any(|v| v.is_nan()) {
                return Err(Error::NonFinite("Hessian samples".into()));
            }
            if m.iter().any(|v| v.is_infinite()) {
                bound = f64::INFINITY;
                break;
            }
            let norm = m.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            bound = bound.max(norm);
        }
    }
    let (mut delta_ok, mut min_t) = (true, f64::INFINITY);
    if let Some(s) = surface {
        let ham = hamiltonian_of(h)?;
        let mut v = vec![0.0; d];
        for k in 0..s.seed.grid().len() {
            let x = s.lift(&s.seed.grid().point(k));
            if region.is_some_and(|r| !r.contains(&x)) {
                continue;
            }
            if ham.vector_field(&x, &mut v).is_err() {
                continue;
            }
            let norm = v.iter().map(|z| z * z).sum::<f64>().sqrt();
            let t = if norm > 0.0 { v[s.axis].abs() / norm } else { 0.0 };
            min_t = min_t.min(t);
        }
        delta_ok = min_t > super::transport::TRANSVERSALITY_TOL;
    }
    Ok(LipschitzReport { bound, ok: bound.is_finite() && bound <= cap, delta_ok, min_transversality: min_t })
}

use std::ops::ControlFlow;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::stream_rng;
use crate::phasespace::{dp45_step, hamiltonian_of, integrate_adaptive, poisson_bracket, AxisBox, Hamiltonian, PhaseFunction, PhaseGrid};

/// Axis-aligned hyperplane `{x[axis] = value}` carrying seed data for a
/// constant of motion. The seed lives on a grid over the remaining axes, in
/// their original order.
#[derive(Debug, Clone)]
pub struct Hypersurface {
    pub axis: usize,
    pub value: f64,
    pub seed: PhaseFunction,
}

impl Hypersurface {
    pub fn new(axis: usize, value: f64, seed: PhaseFunction) -> Result<Self> {
        if !value.is_finite() {
            return Err(invalid("hypersurface position must be finite"));
        }
        Ok(Self { axis, value, seed })
    }

    pub fn dim(&self) -> usize {
        self.seed.grid().ndim() + 1
    }

    /// Seed value at a point of the hyperplane; `None` outside the seed grid.
    pub fn seed_at(&self, x: &[f64]) -> Option<f64> {
        let y: Vec<f64> = x.iter().enumerate().filter(|(k, _)| *k != self.axis).map(|(_, v)| *v).collect();
        if self.seed.exact().is_some() && !self.seed.grid().contains(&y) {
            return None;
        }
        self.seed.value_at(&y).map(|z| z.re)
    }

    /// Full-space coordinates of a seed-grid point.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        x.insert(self.axis, self.value);
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportOptions {
    /// Local error tolerance of the characteristic integration.
    pub tol: f64,
    /// Longest flow time searched in each direction.
    pub max_time: f64,
    /// Largest integration step.
    pub max_step: f64,
    /// Box the characteristics may explore; defaults to the region itself.
    #[serde(default)]
    pub domain: Option<AxisBox>,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_time: 100.0, max_step: 0.05, domain: None }
    }
}

/// Minimum `|X_H . n| / |X_H|` accepted at a crossing.
pub const TRANSVERSALITY_TOL: f64 = 1e-8;

struct Crossing {
    time: f64,
    point: Vec<f64>,
}

fn find_crossing(h: &dyn Hamiltonian, seed: &Hypersurface, region: &AxisBox, x: &[f64], t_end: f64, opts: &TransportOptions) -> Result<Option<Crossing>> {
    let a = seed.axis;
    let c = seed.value;
    let f = |y: &[f64], out: &mut [f64]| h.vector_field(y, out);
    let margin: Vec<f64> = region.lo.iter().zip(&region.hi).map(|(l, u)| 1e-9 * (u - l)).collect();
    let inside = |y: &[f64]| y.iter().enumerate().all(|(k, v)| *v >= region.lo[k] - margin[k] && *v <= region.hi[k] + margin[k]);
    let mut prev = (0.0, x.to_vec());
    let mut bracket: Option<((f64, Vec<f64>), f64)> = None;
    let result = integrate_adaptive(f, x, t_end, opts.tol, opts.max_step, opts.max_step, |t, y| {
        let s0 = prev.1[a] - c;
        let s1 = y[a] - c;
        if s0 == 0.0 || s0.signum() != s1.signum() {
            bracket = Some((prev.clone(), t));
            return ControlFlow::Break(());
        }
        if !inside(y) {
            return ControlFlow::Break(());
        }
        prev = (t, y.to_vec());
        ControlFlow::Continue(())
    });
    match result {
        Ok(_) => {}
        Err(Error::ExitedDomain { .. }) => return Ok(None),
        Err(e) => return Err(e),
    }
    let Some(((t0, y0), t1)) = bracket else { return Ok(None) };
    if y0[a] == c {
        return Ok(Some(Crossing { time: t0, point: y0 }));
    }
    // Bisection on the length of a single step taken from the bracket start.
    let s0 = y0[a] - c;
    let (mut lo, mut hi) = (0.0, t1 - t0);
    let mut best = y0.clone();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (y, _) = dp45_step(&f, &y0, mid, opts.tol)?;
        if (y[a] - c).signum() == s0.signum() && y[a] != c {
            lo = mid;
        } else {
            hi = mid;
        }
        best = y;
        if (hi - lo).abs() <= 1e-15 * (t0.abs() + hi.abs()).max(1e-300) {
            break;
        }
    }
    let (point, _) = dp45_step(&f, &y0, 0.5 * (lo + hi), opts.tol).unwrap_or((best, 0.0));
    Ok(Some(Crossing { time: t0 + 0.5 * (lo + hi), point }))
}

/// Value at `x` of the constant of motion defined by `seed`, obtained by
/// following the flow of `h` back (or forward) to the hypersurface.
/// `None` when no characteristic reaches seeded data inside `region`.
pub fn transport_point(h: &dyn Hamiltonian, seed: &Hypersurface, region: &AxisBox, x: &[f64], opts: &TransportOptions) -> Result<Option<f64>> {
    if (x[seed.axis] - seed.value).abs() <= 1e-14 * (1.0 + seed.value.abs()) {
        return Ok(seed.seed_at(x));
    }
    let fwd = find_crossing(h, seed, region, x, opts.max_time, opts)?;
    let limit = fwd.as_ref().map_or(opts.max_time, |c| c.time.abs());
    let bwd = find_crossing(h, seed, region, x, -limit, opts)?;
    let mut candidates: Vec<Crossing> = fwd.into_iter().chain(bwd).collect();
    candidates.sort_by(|p, q| p.time.abs().total_cmp(&q.time.abs()));
    for cr in candidates {
        let mut v = vec![0.0; x.len()];
        h.vector_field(&cr.point, &mut v)?;
        let norm = v.iter().map(|z| z * z).sum::<f64>().sqrt();
        if norm == 0.0 || v[seed.axis].abs() < TRANSVERSALITY_TOL * norm {
            return Err(Error::Transversality(cr.point));
        }
        if let Some(val) = seed.seed_at(&cr.point) {
            return Ok(Some(val));
        }
    }
    Ok(None)
}

/// A constant of motion transported from a hypersurface onto a region grid.
#[derive(Debug, Clone)]
pub struct Transported {
    /// Transported values; flagged nodes hold NaN.
    pub function: PhaseFunction,
    pub flagged: Vec<usize>,
    /// Max `|{H, O}|` over trusted nodes (interior 80%, full valid stencil).
    pub residual: f64,
    pub bracket: PhaseFunction,
}

/// Samples `h` on `grid`, keeping its exact form.
pub(crate) fn resample(h: &PhaseFunction, grid: &PhaseGrid) -> Result<PhaseFunction> {
    if let Some(p) = h.exact() {
        return PhaseFunction::from_polynomial(grid.clone(), p.clone());
    }
    if h.grid().same_as(grid) {
        return Ok(h.clone());
    }
    let values = (0..grid.len())
        .map(|i| h.interpolate(&grid.point(i)).ok_or(Error::RegionOutsideGrid))
        .collect::<Result<Vec<_>>>()?;
    PhaseFunction::from_values(grid.clone(), values)
}

/// Nodes whose value and whole finite-difference stencil are valid and
/// which lie in the central 80% of the grid.
pub fn trusted_nodes(grid: &PhaseGrid, valid: &[bool]) -> Vec<usize> {
    let strides = grid.strides();
    (0..grid.len())
        .filter(|&i| {
            if !valid[i] || !grid.in_interior(i, 0.8) {
                return false;
            }
            let idx = grid.multi_index(i);
            (0..grid.ndim()).all(|k| {
                let a = grid.axis(k);
                let n = a.count;
                let up = if idx[k] + 1 < n { Some(i + strides[k]) } else if a.periodic { Some(i + strides[k] - n * strides[k]) } else { None };
                let dn = if idx[k] > 0 { Some(i - strides[k]) } else if a.periodic { Some(i + (n - 1) * strides[k]) } else { None };
                up.is_none_or(|j| valid[j]) && dn.is_none_or(|j| valid[j])
            })
        })
        .collect()
}

/// Max `|f|` over a node set, with the location.
pub(crate) fn max_over(f: &PhaseFunction, nodes: &[usize]) -> (f64, Vec<f64>) {
    let mut best = (0.0, Vec::new());
    for &i in nodes {
        let v = f.values()[i].norm();
        if v > best.0 || best.1.is_empty() {
            best = (v, f.grid().point(i));
        }
    }
    best
}

/// Transports `seed` along the flow of `h` onto every node of `region`.
pub fn transport_constant(h: &PhaseFunction, seed: &Hypersurface, region: &PhaseGrid, opts: &TransportOptions) -> Result<Transported> {
    if seed.dim() != region.ndim() || h.grid().ndim() != region.ndim() {
        return Err(Error::GridMismatch("hypersurface, Hamiltonian and region dimensions differ".into()));
    }
    let ham = hamiltonian_of(h)?;
    let bounds = opts.domain.clone().unwrap_or_else(|| region.bounds());
    let values = (0..region.len())
        .into_par_iter()
        .map(|i| transport_point(ham.as_ref(), seed, &bounds, &region.point(i), opts))
        .collect::<Result<Vec<_>>>()?;
    let flagged: Vec<usize> = values.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
    let function = PhaseFunction::from_real_values(region.clone(), values.iter().map(|v| v.unwrap_or(f64::NAN)).collect())?;
    let hr = resample(h, region)?;
    let bracket = poisson_bracket(&hr, &function)?;
    let valid: Vec<bool> = values.iter().map(|v| v.is_some()).collect();
    let (residual, _) = max_over(&bracket, &trusted_nodes(region, &valid));
    Ok(Transported { function, flagged, residual, bracket })
}

/// Residual of a transported constant measured by stencil probes at random
/// nodes of a uniform lattice with `count` points per axis.
///
/// Used where the full tensor lattice is too large to fill (e.g. 257^4):
/// each probe transports the constant to the node's `2 * dim` neighbours and
/// forms `{H, O}` with central differences of `O` and the exact gradient of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub max_residual: f64,
    pub probes: usize,
    pub skipped: usize,
}

pub fn probe_transport_residual(
    h: &dyn Hamiltonian,
    seed: &Hypersurface,
    region: &AxisBox,
    count: usize,
    probes: usize,
    rng_seed: u64,
    opts: &TransportOptions,
) -> Result<ProbeReport> {
    let d = region.dim();
    let steps: Vec<f64> = (0..d).map(|k| (region.hi[k] - region.lo[k]) / (count - 1) as f64).collect();
    let inner = region.interior(0.8);
    let domain = opts.domain.clone().unwrap_or_else(|| region.clone());
    let results = (0..probes)
        .into_par_iter()
        .map(|n| -> Result<Option<f64>> {
            let mut rng = stream_rng(rng_seed, n as u64);
            let x: Vec<f64> = (0..d)
                .map(|k| {
                    let lo = ((inner.lo[k] - region.lo[k]) / steps[k]).ceil() as usize;
                    let hi = ((inner.hi[k] - region.lo[k]) / steps[k]).floor() as usize;
                    region.lo[k] + rng.random_range(lo..=hi) as f64 * steps[k]
                })
                .collect();
            let mut grad_o = vec![0.0; d];
            for k in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += steps[k];
                xm[k] -= steps[k];
                let (Some(a), Some(b)) = (transport_point(h, seed, &domain, &xp, opts)?, transport_point(h, seed, &domain, &xm, opts)?) else {
                    return Ok(None);
                };
                grad_o[k] = (a - b) / (2.0 * steps[k]);
            }
            let mut grad_h = vec![0.0; d];
            h.gradient(&x, &mut grad_h)?;
            let n_dof = d / 2;
            let br: f64 = (0..n_dof).map(|j| grad_h[j] * grad_o[n_dof + j] - grad_h[n_dof + j] * grad_o[j]).sum();
            Ok(Some(br.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<f64> = results.iter().flatten().copied().collect();
    Ok(ProbeReport { max_residual: used.iter().copied().fold(0.0, f64::max), probes: used.len(), skipped: probes - used.len() })
}

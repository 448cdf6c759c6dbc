use num_complex::Complex64;
use rayon::prelude::*;

use super::function::PhaseFunction;
use super::grid::AxisBox;
use crate::error::{Error, Result};
use crate::numeric::{trapezoid_weights, ComplexSum};

/// Trapezoid integral over the grid, or over the nodes inside `region`.
pub fn integrate_phase(f: &PhaseFunction, region: Option<&AxisBox>) -> Result<Complex64> {
    let grid = f.grid();
    let d = grid.ndim();
    let mut weights = Vec::with_capacity(d);
    for (k, a) in grid.axes().iter().enumerate() {
        let h = a.spacing();
        match region {
            None => weights.push(trapezoid_weights(a.count, h, a.periodic)),
            Some(r) => {
                if r.dim() != d {
                    return Err(Error::GridMismatch("region dimension differs from grid".into()));
                }
                let tol = 1e-9 * h;
                let top = if a.periodic { a.max } else { a.max + tol };
                if r.lo[k] < a.min - tol || r.hi[k] > top {
                    return Err(Error::RegionOutsideGrid);
                }
                let whole = a.periodic && r.lo[k] <= a.min + tol && r.hi[k] >= a.max - tol;
                if whole {
                    weights.push(trapezoid_weights(a.count, h, true));
                    continue;
                }
                let inside: Vec<usize> = (0..a.count).filter(|&i| a.node(i) >= r.lo[k] - tol && a.node(i) <= r.hi[k] + tol).collect();
                let mut w = vec![0.0; a.count];
                if inside.len() >= 2 {
                    let sub = trapezoid_weights(inside.len(), h, false);
                    for (i, s) in inside.iter().zip(sub) {
                        w[*i] = s;
                    }
                }
                weights.push(w);
            }
        }
    }
    let values = f.values();
    let chunk = 4096;
    let partials: Vec<ComplexSum> = (0..values.len().div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut s = ComplexSum::default();
            for i in c * chunk..((c + 1) * chunk).min(values.len()) {
                let idx = grid.multi_index(i);
                let w: f64 = idx.iter().zip(&weights).map(|(&j, w)| w[j]).product();
                if w != 0.0 {
                    s.add(values[i] * w);
                }
            }
            s
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in &partials {
        total.merge(p);
    }
    Ok(total.value())
}

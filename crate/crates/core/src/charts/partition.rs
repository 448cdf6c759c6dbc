use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phasespace::{AxisBox, PhaseFunction};

/// Largest admissible value of `hbar / eps^2` and of `eps^2 / S`.
pub const SCALE_RATIO_LIMIT: f64 = 0.1;

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step from 0 (t <= 0) to 1 (t >= 1), all derivatives vanishing at both ends.
pub fn smooth_step(t: f64) -> f64 {
    let a = flat(t);
    let b = flat(1.0 - t);
    if a + b == 0.0 {
        if t >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        a / (a + b)
    }
}

/// Unnormalized bump of one chart: 1 deep inside the box, 0 beyond half a
/// frontier width outside, smooth in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub chart: usize,
    pub region: AxisBox,
    pub epsilon: f64,
    pub periods: Vec<Option<f64>>,
}

impl BumpFunction {
    pub fn support(&self) -> AxisBox {
        self.region.expanded(0.5 * self.epsilon)
    }

    fn axis_factor(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = (self.region.lo[k], self.region.hi[k]);
        let e = self.epsilon;
        let f = |x: f64| smooth_step((x - lo + 0.5 * e) / e) * smooth_step((hi + 0.5 * e - x) / e);
        match self.periods.get(k).copied().flatten() {
            Some(p) => {
                let mid = 0.5 * (lo + hi);
                let shifted = x - p * ((x - mid) / p).round();
                f(shifted)
            }
            None => f(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|k| self.axis_factor(k, x[k])).product()
    }
}

/// Charts with disjoint interiors, frontier width `epsilon`, and the smooth
/// partition of unity `B_i = b_i / sum_j b_j` built from their bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub ids: Vec<usize>,
    pub bumps: Vec<BumpFunction>,
    pub epsilon: f64,
    pub hbar: f64,
    pub action_scale: f64,
}

fn overlap_interiors(a: &AxisBox, b: &AxisBox, periods: &[Option<f64>]) -> bool {
    (0..a.dim()).all(|k| {
        let tol = 1e-12 * (1.0 + a.hi[k].abs().max(b.hi[k].abs()));
        match periods.get(k).copied().flatten() {
            None => a.lo[k].max(b.lo[k]) < a.hi[k].min(b.hi[k]) - tol,
            Some(p) => (-1..=1).any(|m| {
                let s = m as f64 * p;
                a.lo[k].max(b.lo[k] + s) < a.hi[k].min(b.hi[k] + s) - tol
            }),
        }
    })
}

/// Builds the partition of unity for the given chart boxes.
///
/// Chart ids are the box indices. `periods[k]` marks periodic axes.
pub fn build_partition(boxes: &[AxisBox], epsilon: f64, periods: &[Option<f64>], hbar: f64, action_scale: f64) -> Result<Atlas> {
    if boxes.is_empty() {
        return Err(invalid("atlas needs at least one chart"));
    }
    if !(epsilon > 0.0) || !(hbar > 0.0) || !(action_scale > 0.0) {
        return Err(invalid("epsilon, hbar and the action scale must be positive"));
    }
    let d = boxes[0].dim();
    if boxes.iter().any(|b| b.dim() != d) || (!periods.is_empty() && periods.len() != d) {
        return Err(invalid("chart boxes and periods must share one dimension"));
    }
    let hbar_ratio = hbar / (epsilon * epsilon);
    let action_ratio = epsilon * epsilon / action_scale;
    if hbar_ratio >= SCALE_RATIO_LIMIT || action_ratio >= SCALE_RATIO_LIMIT {
        return Err(Error::ScaleOrdering { hbar_ratio, action_ratio });
    }
    for (i, b) in boxes.iter().enumerate() {
        if b.lo.iter().zip(&b.hi).any(|(l, h)| h - l < epsilon) {
            return Err(Error::StackedFrontiers(i));
        }
        for (j, c) in boxes.iter().enumerate().skip(i + 1) {
            if overlap_interiors(b, c, periods) {
                return Err(Error::OverlappingCharts(i, j));
            }
        }
    }
    let periods: Vec<Option<f64>> = if periods.is_empty() { vec![None; d] } else { periods.to_vec() };
    let bumps = boxes.iter().enumerate().map(|(i, b)| BumpFunction { chart: i, region: b.clone(), epsilon, periods: periods.clone() }).collect();
    Ok(Atlas { ids: (0..boxes.len()).collect(), bumps, epsilon, hbar, action_scale })
}

impl Atlas {
    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bumps[0].region.dim()
    }

    pub fn region(&self, chart: usize) -> Result<&AxisBox> {
        self.bumps.get(chart).map(|b| &b.region).ok_or(Error::UnknownChart(chart))
    }

    /// All partition weights `B_i(x)`; all zero outside every support.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = self.bumps.iter().map(|b| b.eval(x)).collect();
        let s: f64 = raw.iter().sum();
        if s == 0.0 {
            raw
        } else {
            raw.iter().map(|v| v / s).collect()
        }
    }

    pub fn weight(&self, chart: usize, x: &[f64]) -> Result<f64> {
        if chart >= self.len() {
            return Err(Error::UnknownChart(chart));
        }
        Ok(self.weights(x)[chart])
    }

    /// Chart whose box contains `x` (first match).
    pub fn chart_of(&self, x: &[f64]) -> Option<usize> {
        self.bumps.iter().position(|b| b.region.contains(x))
    }

    /// `max |sum_i B_i - 1|` over points inside the union of chart boxes.
    pub fn partition_defect(&self, points: &[Vec<f64>]) -> f64 {
        points.iter().filter(|x| self.chart_of(x).is_some()).map(|x| (self.weights(x).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn hbar_ratio(&self) -> f64 {
        self.hbar / (self.epsilon * self.epsilon)
    }

    pub fn action_ratio(&self) -> f64 {
        self.epsilon * self.epsilon / self.action_scale
    }
}

/// Restriction `A * B_i` of a phase function to chart `chart`.
pub fn localize(a: &PhaseFunction, atlas: &Atlas, chart: usize) -> Result<PhaseFunction> {
    if chart >= atlas.len() {
        return Err(Error::UnknownChart(chart));
    }
    if a.grid().ndim() != atlas.dim() {
        return Err(Error::GridMismatch("function and atlas dimensions differ".into()));
    }
    let grid = a.grid().clone();
    let w: Vec<f64> = (0..grid.len()).map(|i| atlas.weights(&grid.point(i))[chart]).collect();
    let values = a.values().iter().zip(w).map(|(z, b)| z * b).collect();
    PhaseFunction::from_values(grid, values)
}

use rayon::prelude::*;

use super::volume::{kernel_product, LevelSpec, MicroVolume};
use crate::charts::{Atlas, Chart};
use crate::error::{invalid, Error, Result};
use crate::numeric::gaussian;
use crate::phasespace::{integrate_phase, PhaseFunction, PhaseGrid};

/// Pointwise classical density
/// `rho(x) = sum_s w_s / C_s prod_k N_eta(c_k(x) - level_k) B_chart(x)`,
/// divided by the grid normalization.
#[derive(Debug, Clone)]
pub struct DensityModel {
    charts: Vec<Chart>,
    atlas: Option<Atlas>,
    terms: Vec<(usize, Vec<f64>, f64)>,
    eta: f64,
    norm: f64,
}

impl DensityModel {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.charts[0].region.dim()
    }

    fn raw(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (ci, levels, coeff) in &self.terms {
            let chart = &self.charts[*ci];
            let bump = match &self.atlas {
                Some(a) => a.weight(chart.id, x).unwrap_or(0.0),
                None if chart.region.contains(x) => 1.0,
                None => 0.0,
            };
            if bump == 0.0 {
                continue;
            }
            if let Some(c) = chart.constants_at(x) {
                total += coeff * bump * kernel_product(&c, levels, self.eta);
            }
        }
        total
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.raw(x) / self.norm
    }

    /// Upper bound of [`DensityModel::eval`] over phase space.
    pub fn upper_bound(&self) -> f64 {
        let peak = gaussian(0.0, self.eta);
        self.terms.iter().map(|(_, l, c)| c * peak.powi(l.len() as i32)).sum::<f64>() / self.norm
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalDensity {
    pub function: PhaseFunction,
    pub model: DensityModel,
    /// Grid integral before renormalization.
    pub raw_normalization: f64,
    pub min_value: f64,
    /// Largest change of a constant between neighbouring nodes near its level.
    pub value_spacing: f64,
}

/// Largest forward difference of `f` along any axis at nodes with `|f - level| <= eta`.
fn value_spacing(grid: &PhaseGrid, chart: &Chart, k: usize, level: f64, eta: f64) -> f64 {
    let d = grid.ndim();
    let steps: Vec<f64> = grid.axes().iter().map(|a| a.spacing()).collect();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            if !chart.region.contains(&x) {
                return 0.0;
            }
            let Some(v) = chart.constants[k].value_at(&x).map(|z| z.re) else { return 0.0 };
            if (v - level).abs() > eta {
                return 0.0;
            }
            let mut worst: f64 = 0.0;
            let mut y = x.clone();
            for a in 0..d {
                y[a] = x[a] + steps[a];
                if let Some(w) = chart.constants[k].value_at(&y) {
                    worst = worst.max((w.re - v).abs());
                }
                y[a] = x[a];
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Builds the classical density from level specifications and their
/// precomputed microcanonical volumes, tabulated on `grid`.
///
/// Each chart's constants must be resolved: the smoothing width (taken from
/// the volumes) has to be at least twice the change of any constant between
/// neighbouring nodes close to its level.
pub fn classical_density(charts: &[Chart], atlas: Option<&Atlas>, specs: &[LevelSpec], volumes: &[MicroVolume], grid: PhaseGrid) -> Result<ClassicalDensity> {
    if charts.is_empty() || specs.is_empty() {
        return Err(invalid("need at least one chart and one level specification"));
    }
    let wsum: f64 = specs.iter().map(|s| s.weight).sum();
    if specs.iter().any(|s| !(s.weight >= 0.0)) || (wsum - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("weights must be non-negative and sum to 1 (sum {wsum})")));
    }
    if charts.iter().any(|c| c.region.dim() != grid.ndim()) {
        return Err(Error::GridMismatch("chart and grid dimensions differ".into()));
    }
    let eta = volumes.first().map(|v| v.eta).ok_or(Error::MissingVolume(specs[0].chart))?;
    if volumes.iter().any(|v| v.eta != eta) {
        return Err(invalid("all volumes must share one smoothing width"));
    }
    let mut terms = Vec::with_capacity(specs.len());
    let mut spacing: f64 = 0.0;
    for s in specs {
        let ci = charts.iter().position(|c| c.id == s.chart).ok_or(Error::UnknownChart(s.chart))?;
        if s.levels.len() != charts[ci].constants.len() {
            return Err(invalid(format!("chart {} has {} constants, {} levels given", s.chart, charts[ci].constants.len(), s.levels.len())));
        }
        let v = volumes.iter().find(|v| v.chart == s.chart && v.levels == s.levels).ok_or(Error::MissingVolume(s.chart))?;
        for (k, l) in s.levels.iter().enumerate() {
            spacing = spacing.max(value_spacing(&grid, &charts[ci], k, *l, eta));
        }
        terms.push((ci, s.levels.clone(), s.weight / v.volume));
    }
    if eta < 2.0 * spacing {
        return Err(Error::UnderResolved { eta, spacing });
    }
    let mut model = DensityModel { charts: charts.to_vec(), atlas: atlas.cloned(), terms, eta, norm: 1.0 };
    let raw = PhaseFunction::from_real_fn(grid.clone(), |x| model.raw(x));
    let raw_normalization = integrate_phase(&raw, None)?.re;
    if !(raw_normalization > 0.0) {
        return Err(Error::EmptyLevelSet("density vanishes on the grid".into()));
    }
    model.norm = raw_normalization;
    let function = raw.map(|z| z / raw_normalization);
    let min_value = function.min_real();
    Ok(ClassicalDensity { function, model, raw_normalization, min_value, value_spacing: spacing })
}

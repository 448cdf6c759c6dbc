use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phasespace::{hamilton_flow_sampled, Hamiltonian, Integrator};

/// Relative drift tolerance used by [`classify_constant`].
pub const DEFAULT_DRIFT_TOL: f64 = 1e-4;
/// Chart transitions needed before a function is called locally conserved.
pub const MIN_TRANSITIONS: usize = 10;

/// Value of a probed function along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: f64,
    /// `None` inside excluded zones (frontiers, corners).
    pub chart: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    Global,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: ConstantKind,
    pub drift_tol: f64,
    /// Largest `|F(t) - F(0)|` over all probes.
    pub max_drift: f64,
    /// Charts in which every visit conserved the function.
    pub conserved_charts: Vec<usize>,
    pub broken_charts: Vec<usize>,
    pub transitions: usize,
    /// Times at which the value jumped by more than the tolerance.
    pub jump_times: Vec<f64>,
}

/// Classifies a function from its values along probe trajectories.
///
/// The tolerance is `rel_tol * max(range of F, max |F|)`. The function is
/// global when no probe drifts beyond it, local when it is constant on every
/// visit to at least one chart and at least [`MIN_TRANSITIONS`] chart
/// changes were observed.
pub fn classify_series(series: &[Vec<ProbeSample>], rel_tol: f64) -> Result<Classification> {
    if series.is_empty() || series.iter().any(|s| s.is_empty()) {
        return Err(invalid("need at least one non-empty probe series"));
    }
    let all = series.iter().flatten();
    let (lo, hi, amax) = all.fold((f64::INFINITY, f64::NEG_INFINITY, 0f64), |(lo, hi, m), s| (lo.min(s.value), hi.max(s.value), m.max(s.value.abs())));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite("probe values".into()));
    }
    let drift_tol = rel_tol * (hi - lo).max(amax).max(f64::MIN_POSITIVE);
    let mut max_drift: f64 = 0.0;
    let mut transitions = 0;
    let mut jump_times = Vec::new();
    let mut conserved = std::collections::BTreeSet::new();
    let mut broken = std::collections::BTreeSet::new();
    for s in series {
        let f0 = s[0].value;
        for w in s.windows(2) {
            if (w[1].value - w[0].value).abs() > drift_tol {
                jump_times.push(w[1].t);
            }
        }
        // Chart changes, looking across excluded samples.
        let mut last = None;
        for c in s.iter().filter_map(|x| x.chart) {
            if last.is_some_and(|l| l != c) {
                transitions += 1;
            }
            last = Some(c);
        }
        max_drift = s.iter().map(|x| (x.value - f0).abs()).fold(max_drift, f64::max);
        // Segments of consecutive samples inside one chart.
        let mut start = 0;
        while start < s.len() {
            let Some(c) = s[start].chart else {
                start += 1;
                continue;
            };
            let mut end = start;
            while end + 1 < s.len() && s[end + 1].chart == Some(c) {
                end += 1;
            }
            let base = s[start].value;
            if s[start..=end].iter().all(|x| (x.value - base).abs() <= drift_tol) {
                conserved.insert(c);
            } else {
                broken.insert(c);
            }
            start = end + 1;
        }
    }
    for c in &broken {
        conserved.remove(c);
    }
    let kind = if max_drift <= drift_tol {
        ConstantKind::Global
    } else if conserved.is_empty() {
        return Err(Error::NotLocallyConserved);
    } else if transitions < MIN_TRANSITIONS {
        return Err(invalid(format!("only {transitions} chart transitions observed, {MIN_TRANSITIONS} are needed to call the function local")));
    } else {
        ConstantKind::Local
    };
    Ok(Classification {
        kind,
        drift_tol,
        max_drift,
        conserved_charts: conserved.into_iter().collect(),
        broken_charts: broken.into_iter().collect(),
        transitions,
        jump_times,
    })
}

/// Integrates probe trajectories from `starts`, records `f` and the chart at
/// every step, and classifies the result with [`classify_series`].
#[allow(clippy::too_many_arguments)]
pub fn classify_constant<H, F, C>(f: F, h: &H, chart_of: C, starts: &[Vec<f64>], t_end: f64, dt: f64, integrator: Integrator, rel_tol: f64) -> Result<Classification>
where
    H: Hamiltonian + ?Sized,
    F: Fn(&[f64]) -> f64 + Sync,
    C: Fn(&[f64]) -> Option<usize> + Sync,
{
    let series: Result<Vec<Vec<ProbeSample>>> = starts
        .par_iter()
        .map(|x| {
            let traj = hamilton_flow_sampled(h, x, t_end, dt, integrator, 1)?;
            Ok(traj.times.iter().zip(&traj.states).map(|(t, y)| ProbeSample { t: *t, chart: chart_of(y), value: f(y) }).collect())
        })
        .collect();
    classify_series(&series?, rel_tol)
}

use serde::{Deserialize, Serialize};

use super::{force, invariants, BilliardSpec, DomainLabel};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub h: f64,
    pub px: f64,
    pub py: f64,
    pub ptheta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dt: f64,
    /// Record every `sample_every`-th step.
    pub sample_every: usize,
    /// Abort when `|H - H0| / H0` exceeds this at a sample.
    pub drift_limit: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { dt: 1e-5, sample_every: 100, drift_limit: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilliardTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    pub labels: Vec<DomainLabel>,
    /// False in corners and frontier bands, where two constant sets compete.
    pub counted: Vec<bool>,
    pub invariants: Vec<Invariants>,
}

impl BilliardTrajectory {
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.invariants[0].h;
        self.invariants.iter().map(|c| (c.h - h0).abs()).fold(0.0, f64::max) / h0
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, spec: &BilliardSpec, t: f64, s: [f64; 4]) {
        let (label, counted) = spec.classify(s[0], s[1]);
        self.times.push(t);
        self.states.push(s);
        self.labels.push(label);
        self.counted.push(counted);
        self.invariants.push(invariants(spec, &s));
    }
}

/// Kick-drift-kick integration in the smooth billiard potential, reusing the
/// force between steps (one force evaluation per step).
pub fn simulate_billiard(spec: &BilliardSpec, start: [f64; 4], t_end: f64, opts: &SimOptions) -> Result<BilliardTrajectory> {
    spec.validate()?;
    if !(opts.dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() || opts.sample_every == 0 {
        return Err(invalid("need dt > 0, t_end >= 0 and sample_every >= 1"));
    }
    let mut f = force(spec, start[0], start[1]).ok_or_else(|| Error::Geometry("start lies outside the billiard".into()))?;
    let mut traj = BilliardTrajectory { times: vec![], states: vec![], labels: vec![], counted: vec![], invariants: vec![] };
    traj.push(spec, 0.0, start);
    let h0 = traj.invariants[0].h;
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(invalid("start needs positive finite energy"));
    }
    let n_steps = (t_end / opts.dt).ceil() as usize;
    let mut s = start;
    for k in 0..n_steps {
        let t0 = k as f64 * opts.dt;
        let dt = (t_end - t0).min(opts.dt);
        s[2] += 0.5 * dt * f[0];
        s[3] += 0.5 * dt * f[1];
        s[0] += dt * s[2];
        s[1] += dt * s[3];
        f = force(spec, s[0], s[1]).ok_or(Error::Escaped(t0 + dt))?;
        s[2] += 0.5 * dt * f[0];
        s[3] += 0.5 * dt * f[1];
        if (k + 1) % opts.sample_every == 0 || k + 1 == n_steps {
            let t = if k + 1 == n_steps { t_end } else { t0 + dt };
            traj.push(spec, t, s);
            let drift = (traj.invariants.last().unwrap().h - h0).abs() / h0;
            if drift > opts.drift_limit {
                return Err(Error::EnergyDrift { drift, limit: opts.drift_limit, time: t });
            }
        }
    }
    Ok(traj)
}

/// Conservation record of one domain's two local constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainStats {
    pub label: DomainLabel,
    pub constant: String,
    pub samples: usize,
    pub visits: usize,
    /// Largest relative change of `H` within one visit.
    pub energy_drift: f64,
    /// Largest relative change of the domain's momentum constant within one visit.
    pub constant_drift: f64,
    /// Largest relative change of the momentum constant across the whole run.
    pub global_change: f64,
}

/// Per-domain drifts of `(H, C)` over uninterrupted visits, with `C` the
/// domain's tabulated momentum constant. Momenta are measured relative to
/// `sqrt(2 H0)` and `P_theta` relative to `(radius + d) sqrt(2 H0)`.
pub fn conservation_table(spec: &BilliardSpec, traj: &BilliardTrajectory) -> Vec<DomainStats> {
    let h0 = traj.invariants[0].h;
    let pscale = (2.0 * h0).sqrt();
    let value = |label: DomainLabel, c: &super::Invariants| match label {
        DomainLabel::D0 | DomainLabel::D1 | DomainLabel::D3 => c.px / pscale,
        DomainLabel::D2 => c.py / pscale,
        DomainLabel::D4 => c.ptheta / ((spec.radius + spec.d) * pscale),
    };
    DomainLabel::ALL
        .iter()
        .map(|&label| {
            let mut st = DomainStats {
                label,
                constant: label.constant_name().into(),
                samples: 0,
                visits: 0,
                energy_drift: 0.0,
                constant_drift: 0.0,
                global_change: 0.0,
            };
            let first = traj.invariants.first().map(|c| value(label, c)).unwrap_or(0.0);
            let mut open: Option<(f64, f64)> = None;
            for (i, c) in traj.invariants.iter().enumerate() {
                st.global_change = st.global_change.max((value(label, c) - first).abs());
                if traj.labels[i] == label && traj.counted[i] {
                    st.samples += 1;
                    let (hs, cs) = *open.get_or_insert_with(|| {
                        st.visits += 1;
                        (c.h, value(label, c))
                    });
                    st.energy_drift = st.energy_drift.max((c.h - hs).abs() / h0);
                    st.constant_drift = st.constant_drift.max((value(label, c) - cs).abs());
                } else {
                    open = None;
                }
            }
            st
        })
        .collect()
}

use serde::{Deserialize, Serialize};

use super::{billiard_potential, force, BilliardSpec, DomainLabel};
use crate::error::{invalid, Error, Result};

/// First collision of a straight ray with the hard-wall billiard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardWallHit {
    pub time: f64,
    pub point: [f64; 2],
    /// Unit normal pointing into the billiard.
    pub normal: [f64; 2],
    pub outgoing: [f64; 2],
}

/// Event-driven reflection in the `d -> 0` billiard: the ray `pos + t vel`
/// is followed to the nearest wall and mirrored there.
pub fn hard_wall_reflection(spec: &BilliardSpec, pos: [f64; 2], vel: [f64; 2]) -> Result<HardWallHit> {
    let mut best: Option<(f64, [f64; 2])> = None;
    let mut consider = |t: f64, n: [f64; 2]| {
        if t > 0.0 && best.is_none_or(|(b, _)| t < b) {
            best = Some((t, n));
        }
    };
    if vel[0] > 0.0 {
        consider((spec.lx - pos[0]) / vel[0], [-1.0, 0.0]);
    }
    if vel[0] < 0.0 {
        consider((-spec.lx - pos[0]) / vel[0], [1.0, 0.0]);
    }
    if vel[1] > 0.0 {
        consider((spec.ly - pos[1]) / vel[1], [0.0, -1.0]);
    }
    if vel[1] < 0.0 {
        consider((-spec.ly - pos[1]) / vel[1], [0.0, 1.0]);
    }
    let mut disc_t = None;
    if spec.radius > 0.0 {
        let [cx, cy] = spec.disc_center();
        let (ox, oy) = (pos[0] - cx, pos[1] - cy);
        let a = vel[0] * vel[0] + vel[1] * vel[1];
        let b = ox * vel[0] + oy * vel[1];
        let c = ox * ox + oy * oy - spec.radius * spec.radius;
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let t = (-b - disc.sqrt()) / a;
            if t > 0.0 {
                disc_t = Some(t);
            }
        }
    }
    if let Some(t) = disc_t {
        if best.is_none_or(|(b, _)| t < b) {
            let [cx, cy] = spec.disc_center();
            let p = [pos[0] + t * vel[0], pos[1] + t * vel[1]];
            best = Some((t, [(p[0] - cx) / spec.radius, (p[1] - cy) / spec.radius]));
        }
    }
    let (t, n) = best.ok_or_else(|| invalid("ray never reaches a wall"))?;
    let point = [pos[0] + t * vel[0], pos[1] + t * vel[1]];
    let vn = vel[0] * n[0] + vel[1] * n[1];
    Ok(HardWallHit { time: t, point, normal: n, outgoing: [vel[0] - 2.0 * vn * n[0], vel[1] - 2.0 * vn * n[1]] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecularOptions {
    /// Step as a fraction of the wall width.
    pub dt_ratio: f64,
    /// Distance from the ideal impact point at which the outgoing ray is measured.
    pub probe_distance: f64,
    pub max_time: f64,
}

impl Default for SpecularOptions {
    fn default() -> Self {
        SpecularOptions { dt_ratio: 2e-3, probe_distance: 0.5, max_time: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecularReport {
    pub d_values: Vec<f64>,
    /// Angle (rad) between the actual and the ideal outgoing ray, both seen
    /// from the ideal impact point.
    pub errors: Vec<f64>,
    pub monotone: bool,
}

/// Follows one smooth-wall interaction per `d` and compares the outgoing ray
/// with the hard-wall reflection.
pub fn specular_limit(spec: &BilliardSpec, start: [f64; 4], d_values: &[f64], opts: &SpecularOptions) -> Result<SpecularReport> {
    if d_values.is_empty() || d_values.windows(2).any(|w| !(w[1] < w[0])) || !(d_values[d_values.len() - 1] > 0.0) {
        return Err(invalid("d values must be positive and strictly decreasing"));
    }
    let mut errors = Vec::with_capacity(d_values.len());
    for &d in d_values {
        let sd = spec.with_d(d);
        sd.validate()?;
        if sd.classify(start[0], start[1]) != (DomainLabel::D0, true) {
            return Err(Error::Geometry(format!("start must lie in the free interior for d = {d}")));
        }
        let hit = hard_wall_reflection(&sd, [start[0], start[1]], [start[2], start[3]])?;
        let dt = opts.dt_ratio * d;
        let mut s = start;
        let mut f = force(&sd, s[0], s[1]).ok_or_else(|| Error::Geometry("start outside the billiard".into()))?;
        let (mut touched, mut left, mut t) = (false, false, 0.0);
        let err = loop {
            if t > opts.max_time {
                return Err(Error::Incomplete(opts.max_time));
            }
            s[2] += 0.5 * dt * f[0];
            s[3] += 0.5 * dt * f[1];
            s[0] += dt * s[2];
            s[1] += dt * s[3];
            f = force(&sd, s[0], s[1]).ok_or(Error::Escaped(t + dt))?;
            s[2] += 0.5 * dt * f[0];
            s[3] += 0.5 * dt * f[1];
            t += dt;
            if billiard_potential(&sd, s[0], s[1]) > 0.0 {
                if left {
                    return Err(Error::Geometry("a second wall was reached before the probe distance".into()));
                }
                touched = true;
                continue;
            }
            left = touched;
            let (rx, ry) = (s[0] - hit.point[0], s[1] - hit.point[1]);
            if left && rx.hypot(ry) >= opts.probe_distance {
                let (ox, oy) = (hit.outgoing[0], hit.outgoing[1]);
                break (rx * oy - ry * ox).atan2(rx * ox + ry * oy).abs();
            }
        };
        errors.push(err);
    }
    // Already-exact cases (normal incidence) count as converged.
    let monotone = errors.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-12);
    Ok(SpecularReport { d_values: d_values.to_vec(), errors, monotone })
}

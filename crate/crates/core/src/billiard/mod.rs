//! Sinai billiard with smoothed walls: a rectangle `[-lx, lx] x [-ly, ly]`
//! with a quarter disc of radius `radius` removed at the corner
//! `(-lx, -ly)`. Every hard wall is replaced by a barrier of width `d` that
//! depends only on the wall's normal coordinate.

mod lyapunov;
mod sim;
mod specular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lyapunov::{lyapunov, LyapunovEstimate, LyapunovOptions};
pub use sim::{conservation_table, simulate_billiard, BilliardTrajectory, DomainStats, Invariants, SimOptions};
pub use specular::{hard_wall_reflection, specular_limit, HardWallHit, SpecularOptions, SpecularReport};

/// Fraction of `d` a point must penetrate before it is labelled as inside a wall.
pub const LABEL_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardSpec {
    pub lx: f64,
    pub ly: f64,
    /// Disc radius; 0 gives the plain (integrable) rectangle.
    pub radius: f64,
    pub d: f64,
    /// Typical kinetic energy; the barrier height scale is `stiffness * energy_scale`.
    #[serde(default = "one")]
    pub energy_scale: f64,
    #[serde(default = "default_stiffness")]
    pub stiffness: f64,
}

fn one() -> f64 {
    1.0
}

fn default_stiffness() -> f64 {
    1e3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainLabel {
    D0,
    D1,
    D2,
    D3,
    D4,
}

impl DomainLabel {
    pub const ALL: [DomainLabel; 5] = [DomainLabel::D0, DomainLabel::D1, DomainLabel::D2, DomainLabel::D3, DomainLabel::D4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Name of the second local constant next to `H`.
    pub fn constant_name(self) -> &'static str {
        match self {
            DomainLabel::D0 | DomainLabel::D1 | DomainLabel::D3 => "Px",
            DomainLabel::D2 => "Py",
            DomainLabel::D4 => "Ptheta",
        }
    }
}

impl std::fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Penetration depths into the five barriers: left, right, bottom, top, disc.
/// Positive inside a barrier band, `>= d` at or beyond the hard wall.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Depths([f64; 5]);

const WALL_LABELS: [DomainLabel; 5] = [DomainLabel::D2, DomainLabel::D2, DomainLabel::D1, DomainLabel::D3, DomainLabel::D4];

impl BilliardSpec {
    pub fn new(lx: f64, ly: f64, radius: f64, d: f64) -> Result<Self> {
        let s = BilliardSpec { lx, ly, radius, d, energy_scale: 1.0, stiffness: default_stiffness() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lx, self.ly, self.radius, self.d, self.energy_scale, self.stiffness].iter().all(|v| v.is_finite());
        if !finite || !(self.lx > 0.0 && self.ly > 0.0 && self.d > 0.0 && self.energy_scale > 0.0 && self.stiffness > 0.0) {
            return Err(Error::Geometry("sizes, wall width and energy scale must be positive".into()));
        }
        if !(self.radius >= 0.0) || self.radius >= self.lx.min(self.ly) {
            return Err(Error::Geometry(format!("radius {} must lie in [0, min(lx, ly))", self.radius)));
        }
        if self.radius > 0.0 && self.d >= 0.5 * self.radius {
            return Err(Error::Geometry(format!("wall width {} must be below radius / 2", self.d)));
        }
        if self.d >= self.lx.min(self.ly) {
            return Err(Error::Geometry("wall width exceeds the rectangle".into()));
        }
        Ok(())
    }

    pub fn with_d(&self, d: f64) -> Self {
        BilliardSpec { d, ..*self }
    }

    pub fn barrier_height(&self) -> f64 {
        self.stiffness * self.energy_scale
    }

    pub fn disc_center(&self) -> [f64; 2] {
        [-self.lx, -self.ly]
    }

    pub(crate) fn depths(&self, x: f64, y: f64) -> Depths {
        let d = self.d;
        let disc = if self.radius > 0.0 { self.radius + d - (x + self.lx).hypot(y + self.ly) } else { f64::NEG_INFINITY };
        Depths([-self.lx + d - x, x - (self.lx - d), -self.ly + d - y, y - (self.ly - d), disc])
    }

    /// Wall profile `V0 u^4 / (1 - u)^2` with `u = s / d`, and its first two
    /// derivatives with respect to `s`. Infinite at and beyond the hard wall.
    pub(crate) fn profile(&self, s: f64) -> (f64, f64, f64) {
        if s <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if s >= self.d {
            return (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        }
        let v0 = self.barrier_height();
        let u = s / self.d;
        let w = 1.0 / (1.0 - u);
        let u2 = u * u;
        let v = v0 * u2 * u2 * w * w;
        let dv = v0 / self.d * (4.0 * u2 * u * w * w + 2.0 * u2 * u2 * w * w * w);
        let ddv = v0 / (self.d * self.d) * (12.0 * u2 * w * w + 16.0 * u2 * u * w * w * w + 6.0 * u2 * u2 * w * w * w * w);
        (v, dv, ddv)
    }

    /// Domain of a configuration point and whether it counts towards
    /// per-domain conservation statistics (only that domain's own barrier,
    /// or none for `D0`, is active).
    pub fn classify(&self, x: f64, y: f64) -> (DomainLabel, bool) {
        let Depths(s) = self.depths(x, y);
        let threshold = LABEL_THRESHOLD * self.d;
        let mut best: Option<(usize, f64)> = None;
        for (k, v) in s.iter().enumerate() {
            if *v > threshold && best.is_none_or(|(_, b)| *v > b) {
                best = Some((k, *v));
            }
        }
        let label = best.map_or(DomainLabel::D0, |(k, _)| WALL_LABELS[k]);
        let counted = s.iter().enumerate().all(|(k, v)| *v <= 0.0 || best.is_some_and(|(b, _)| WALL_LABELS[b] == WALL_LABELS[k]));
        (label, counted)
    }
}

/// Potential energy at `(x, y)`: the sum of the five barrier terms.
pub fn billiard_potential(spec: &BilliardSpec, x: f64, y: f64) -> f64 {
    let Depths(s) = spec.depths(x, y);
    s.iter().map(|v| spec.profile(*v).0).sum()
}

/// Force `-grad V`, or `None` when the point is at or beyond a hard wall.
#[inline]
pub(crate) fn force(spec: &BilliardSpec, x: f64, y: f64) -> Option<[f64; 2]> {
    let Depths(s) = spec.depths(x, y);
    if s.iter().any(|v| *v >= spec.d) {
        return None;
    }
    let mut f = [0.0, 0.0];
    // dV/dx = W'(s) ds/dx.
    f[0] += spec.profile(s[0]).1;
    f[0] -= spec.profile(s[1]).1;
    f[1] += spec.profile(s[2]).1;
    f[1] -= spec.profile(s[3]).1;
    if s[4] > 0.0 {
        let (rx, ry) = (x + spec.lx, y + spec.ly);
        let r = rx.hypot(ry);
        let dv = spec.profile(s[4]).1;
        f[0] += dv * rx / r;
        f[1] += dv * ry / r;
    }
    Some(f)
}

/// Hessian of the potential as `[vxx, vxy, vyy]`.
pub(crate) fn hessian(spec: &BilliardSpec, x: f64, y: f64) -> [f64; 3] {
    let Depths(s) = spec.depths(x, y);
    let mut h = [spec.profile(s[0]).2 + spec.profile(s[1]).2, 0.0, spec.profile(s[2]).2 + spec.profile(s[3]).2];
    if s[4] > 0.0 {
        let (rx, ry) = (x + spec.lx, y + spec.ly);
        let r = rx.hypot(ry);
        let (ux, uy) = (rx / r, ry / r);
        let (_, dv, ddv) = spec.profile(s[4]);
        // V = W(R + d - r): Hess = W'' u u^T - (W' / r)(I - u u^T).
        let t = dv / r;
        h[0] += ddv * ux * ux - t * (1.0 - ux * ux);
        h[1] += ddv * ux * uy + t * ux * uy;
        h[2] += ddv * uy * uy - t * (1.0 - uy * uy);
    }
    h
}

/// Energy, `P_x`, `P_y` and the angular momentum about the disc centre.
pub fn invariants(spec: &BilliardSpec, s: &[f64; 4]) -> Invariants {
    let [x, y, px, py] = *s;
    let [cx, cy] = spec.disc_center();
    Invariants { h: 0.5 * (px * px + py * py) + billiard_potential(spec, x, y), px, py, ptheta: (x - cx) * py - (y - cy) * px }
}

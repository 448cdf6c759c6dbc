use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernels, VanHoveObservable, VanHoveState};
use crate::error::{invalid, Error, Result};
use crate::numeric::ComplexSum;

/// Mean value split into its time-independent and decaying parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValue {
    pub singular: Complex64,
    pub regular: Complex64,
}

impl MeanValue {
    pub fn total(&self) -> Complex64 {
        self.singular + self.regular
    }
}

/// Largest `|t|` for which the grid resolves the phase `(w - w') t / hbar`.
pub fn resolution_horizon(k: &Kernels) -> f64 {
    std::f64::consts::FRAC_PI_4 * k.hbar / k.grid.spacing()
}

/// Precomputed pairing of a state with an observable.
///
/// `R(t) = sum_{k,l} e^{i w_k t/hbar} M_{kl} e^{-i w_l t/hbar}` where `M`
/// already contains the trapezoid weights and the chart/multiplicity sums.
pub struct Pairing {
    singular: Complex64,
    matrix: Vec<Complex64>,
    omegas: Vec<f64>,
    hbar: f64,
    horizon: f64,
    has_regular: bool,
}

impl Pairing {
    pub fn new(rho: &VanHoveState, obs: &VanHoveObservable) -> Result<Self> {
        let (r, o) = (rho.kernels(), obs.kernels());
        r.check_compatible(o)?;
        let n = r.grid.count;
        let w = r.grid.weights();
        let mut s = ComplexSum::default();
        for c in 0..r.n_charts() {
            for (i, wi) in w.iter().enumerate() {
                for a in 0..r.m_dim {
                    for b in 0..r.m_dim {
                        s.add(r.singular_at(c, i, a, b).conj() * o.singular_at(c, i, a, b) * wi);
                    }
                }
            }
        }
        let mut matrix = vec![Complex64::default(); n * n];
        let mm = r.m_dim * r.m_dim;
        for c in 0..r.n_charts() {
            for i in 0..n {
                for j in 0..n {
                    let base = r.r_index(c, i, j, 0, 0);
                    let mut acc = Complex64::default();
                    for x in 0..mm {
                        acc += r.regular[base + x].conj() * o.regular[base + x];
                    }
                    matrix[i * n + j] += acc * (w[i] * w[j]);
                }
            }
        }
        let has_regular = matrix.iter().any(|z| *z != Complex64::default());
        Ok(Self { singular: s.value(), matrix, omegas: r.grid.nodes(), hbar: r.hbar, horizon: resolution_horizon(r), has_regular })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn singular(&self) -> Complex64 {
        self.singular
    }

    /// Regular contribution at time `t`, without the resolution guard.
    pub fn regular_unchecked(&self, t: f64) -> Complex64 {
        if !self.has_regular {
            return Complex64::default();
        }
        let n = self.omegas.len();
        let left: Vec<Complex64> = self.omegas.iter().map(|w| Complex64::from_polar(1.0, w * t / self.hbar)).collect();
        let mut s = ComplexSum::default();
        for i in 0..n {
            let row = &self.matrix[i * n..(i + 1) * n];
            let mut acc = Complex64::default();
            for (m, l) in row.iter().zip(&left) {
                acc += m * l.conj();
            }
            s.add(left[i] * acc);
        }
        s.value()
    }

    pub fn mean_value(&self, t: f64) -> Result<MeanValue> {
        if self.has_regular && t.abs() > self.horizon * (1.0 + 1e-12) {
            let ratio = t.abs() * std::f64::consts::FRAC_PI_4 / self.horizon;
            return Err(Error::Unresolved { t, ratio });
        }
        Ok(MeanValue { singular: self.singular, regular: self.regular_unchecked(t) })
    }
}

/// `<O>_rho(t) = sum integral conj(rho) e^{i(w - w')t/hbar} O`, trapezoid in energy.
///
/// Fails when the grid cannot resolve the oscillation at `t`
/// (`dw |t| / hbar > pi/4`) and the regular parts overlap.
pub fn mean_value(rho: &VanHoveState, obs: &VanHoveObservable, t: f64) -> Result<MeanValue> {
    Pairing::new(rho, obs)?.mean_value(t)
}

/// Drops the regular part: the long-time limit of every mean value.
pub fn weak_limit(rho: &VanHoveState) -> VanHoveState {
    let mut k = rho.kernels().clone();
    k.regular.iter_mut().for_each(|z| *z = Complex64::default());
    VanHoveState::new_unchecked(k)
}

/// Schrodinger evolution: the regular kernel picks up `e^{-i(w - w')t/hbar}`.
pub fn evolve(rho: &VanHoveState, t: f64) -> VanHoveState {
    let mut k = rho.kernels().clone();
    let n = k.grid.count;
    let w = k.grid.nodes();
    let mm = k.m_dim * k.m_dim;
    for c in 0..k.n_charts() {
        for i in 0..n {
            for j in 0..n {
                let phase = Complex64::from_polar(1.0, -(w[i] - w[j]) * t / k.hbar);
                let base = k.r_index(c, i, j, 0, 0);
                for z in &mut k.regular[base..base + mm] {
                    *z *= phase;
                }
            }
        }
    }
    VanHoveState::new_unchecked(k)
}

/// Time at which the regular contribution falls below `threshold` times its
/// initial magnitude (last crossing before the resolution horizon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceTime {
    pub time: f64,
    pub horizon: f64,
    pub initial: f64,
}

pub fn decoherence_time(rho: &VanHoveState, obs: &VanHoveObservable, threshold: f64) -> Result<DecoherenceTime> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid("threshold must lie in (0, 1)"));
    }
    let pairing = Pairing::new(rho, obs)?;
    let r0 = pairing.regular_unchecked(0.0).norm();
    if r0 == 0.0 {
        return Err(Error::NoRegularPart);
    }
    let horizon = pairing.horizon();
    let level = threshold * r0;
    let above = |t: f64| pairing.regular_unchecked(t).norm() >= level;
    if above(horizon) {
        return Err(Error::NoDecay { horizon });
    }
    // Geometric ladder t_k = horizon * 2^{(k - 80)/2}; take the last rung
    // still above the level and bisect towards the next one.
    let rungs = 80;
    let ladder: Vec<f64> = (0..=rungs).map(|k| horizon * 2f64.powf((k as f64 - rungs as f64) / 2.0)).collect();
    let (mut lo, mut hi) = match ladder.iter().rposition(|&t| above(t)) {
        Some(k) => (ladder[k], ladder[k + 1]),
        None => (0.0, ladder[0]),
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(DecoherenceTime { time: 0.5 * (lo + hi), horizon, initial: r0 })
}

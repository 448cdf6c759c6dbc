use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::trapezoid_weights;

/// Uniform energy grid on `[0, omega_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub omega_max: f64,
    pub count: usize,
}

impl OmegaGrid {
    pub fn new(omega_max: f64, count: usize) -> Result<Self> {
        if count < 3 || !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(invalid("omega grid needs omega_max > 0 and at least 3 nodes"));
        }
        Ok(Self { omega_max, count })
    }

    pub fn spacing(&self) -> f64 {
        self.omega_max / (self.count - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.node(k)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.count, self.spacing(), false)
    }
}

/// Singular and regular kernels shared by states and observables.
///
/// `singular[chart][w][m][m']` and `regular[chart][w][w'][m][m']`, stored
/// row-major in flat vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernels {
    pub grid: OmegaGrid,
    pub charts: Vec<usize>,
    pub m_dim: usize,
    pub hbar: f64,
    pub singular: Vec<Complex64>,
    pub regular: Vec<Complex64>,
}

impl Kernels {
    pub fn zeros(grid: OmegaGrid, charts: Vec<usize>, m_dim: usize, hbar: f64) -> Result<Self> {
        if charts.is_empty() || m_dim == 0 {
            return Err(invalid("kernels need at least one chart and m_dim >= 1"));
        }
        if !(hbar > 0.0) {
            return Err(invalid("hbar must be positive"));
        }
        let (c, n, m) = (charts.len(), grid.count, m_dim);
        Ok(Self { grid, charts, m_dim, hbar, singular: vec![Complex64::default(); c * n * m * m], regular: vec![Complex64::default(); c * n * n * m * m] })
    }

    /// Builds kernels from closures `(chart_index, w, m, m')` and `(chart_index, w, w', m, m')`
    /// evaluated at grid energies.
    pub fn from_fns<S, R>(grid: OmegaGrid, charts: Vec<usize>, m_dim: usize, hbar: f64, singular: S, regular: R) -> Result<Self>
    where
        S: Fn(usize, f64, usize, usize) -> Complex64,
        R: Fn(usize, f64, f64, usize, usize) -> Complex64,
    {
        let mut k = Self::zeros(grid, charts, m_dim, hbar)?;
        let w = grid.nodes();
        for c in 0..k.charts.len() {
            for (i, &wi) in w.iter().enumerate() {
                for a in 0..m_dim {
                    for b in 0..m_dim {
                        let idx = k.s_index(c, i, a, b);
                        k.singular[idx] = singular(c, wi, a, b);
                        for (j, &wj) in w.iter().enumerate() {
                            let idx = k.r_index(c, i, j, a, b);
                            k.regular[idx] = regular(c, wi, wj, a, b);
                        }
                    }
                }
            }
        }
        Ok(k)
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }

    pub fn s_index(&self, c: usize, w: usize, m: usize, mp: usize) -> usize {
        ((c * self.grid.count + w) * self.m_dim + m) * self.m_dim + mp
    }

    pub fn r_index(&self, c: usize, w: usize, wp: usize, m: usize, mp: usize) -> usize {
        (((c * self.grid.count + w) * self.grid.count + wp) * self.m_dim + m) * self.m_dim + mp
    }

    pub fn singular_at(&self, c: usize, w: usize, m: usize, mp: usize) -> Complex64 {
        self.singular[self.s_index(c, w, m, mp)]
    }

    pub fn regular_at(&self, c: usize, w: usize, wp: usize, m: usize, mp: usize) -> Complex64 {
        self.regular[self.r_index(c, w, wp, m, mp)]
    }

    pub fn has_regular(&self) -> bool {
        self.regular.iter().any(|z| *z != Complex64::default())
    }

    pub fn check_compatible(&self, other: &Kernels) -> Result<()> {
        if self.grid != other.grid || self.charts != other.charts || self.m_dim != other.m_dim || (self.hbar - other.hbar).abs() > 1e-14 * self.hbar {
            return Err(Error::GridMismatch("kernels differ in grid, charts, m_dim or hbar".into()));
        }
        Ok(())
    }

    fn all_finite(&self) -> bool {
        self.singular.iter().chain(&self.regular).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest violation of `K(w)_{mm'} = conj K(w)_{m'm}` and
    /// `K(w,w')_{mm'} = conj K(w',w)_{m'm}`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        let n = self.grid.count;
        for c in 0..self.n_charts() {
            for i in 0..n {
                for a in 0..self.m_dim {
                    for b in 0..self.m_dim {
                        d = d.max((self.singular_at(c, i, a, b) - self.singular_at(c, i, b, a).conj()).norm());
                        for j in 0..n {
                            d = d.max((self.regular_at(c, i, j, a, b) - self.regular_at(c, j, i, b, a).conj()).norm());
                        }
                    }
                }
            }
        }
        d
    }

    /// `sum_{chart, m} integral K(w)_{mm} dw` (trapezoid).
    pub fn total_probability(&self) -> Complex64 {
        let w = self.grid.weights();
        let mut s = Complex64::default();
        for c in 0..self.n_charts() {
            for (i, wi) in w.iter().enumerate() {
                for m in 0..self.m_dim {
                    s += self.singular_at(c, i, m, m) * wi;
                }
            }
        }
        s
    }

    /// Largest kernel magnitude on the `w = omega_max` boundary relative to
    /// the overall maximum; large values signal truncated support.
    pub fn tail_mass(&self) -> f64 {
        let n = self.grid.count;
        let max = self.singular.iter().chain(&self.regular).map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for c in 0..self.n_charts() {
            for a in 0..self.m_dim {
                for b in 0..self.m_dim {
                    edge = edge.max(self.singular_at(c, n - 1, a, b).norm());
                    for j in 0..n {
                        edge = edge.max(self.regular_at(c, n - 1, j, a, b).norm()).max(self.regular_at(c, j, n - 1, a, b).norm());
                    }
                }
            }
        }
        edge / max
    }
}

/// Tolerance for the kernel invariants.
pub const KERNEL_TOL: f64 = 1e-10;

/// Density-matrix kernels: Hermitian, non-negative diagonal, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct VanHoveState(Kernels);

/// Observable kernels: Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct VanHoveObservable(Kernels);

impl VanHoveState {
    pub fn new(k: Kernels) -> Result<Self> {
        if !k.all_finite() {
            return Err(Error::NonFinite("state kernel".into()));
        }
        let scale = k.singular.iter().chain(&k.regular).map(|z| z.norm()).fold(1.0, f64::max);
        let herm = k.hermiticity_defect();
        if herm > KERNEL_TOL * scale {
            return Err(Error::KernelInvariant(format!("Hermiticity (defect {herm:e})")));
        }
        for c in 0..k.n_charts() {
            for i in 0..k.grid.count {
                for m in 0..k.m_dim {
                    let v = k.singular_at(c, i, m, m);
                    if v.im.abs() > KERNEL_TOL * scale || v.re < -KERNEL_TOL * scale {
                        return Err(Error::KernelInvariant(format!("non-negative real diagonal (chart {c}, node {i}, m {m}: {v})")));
                    }
                }
            }
        }
        let p = k.total_probability();
        if (p - Complex64::new(1.0, 0.0)).norm() > KERNEL_TOL {
            return Err(Error::KernelInvariant(format!("unit total probability (found {p})")));
        }
        Ok(Self(k))
    }

    /// Accepts kernels without checking invariants (used after exact
    /// transformations of a valid state).
    pub(crate) fn new_unchecked(k: Kernels) -> Self {
        Self(k)
    }

    pub fn kernels(&self) -> &Kernels {
        &self.0
    }

    pub fn into_kernels(self) -> Kernels {
        self.0
    }
}

impl VanHoveObservable {
    pub fn new(k: Kernels) -> Result<Self> {
        if !k.all_finite() {
            return Err(Error::NonFinite("observable kernel".into()));
        }
        let scale = k.singular.iter().chain(&k.regular).map(|z| z.norm()).fold(1.0, f64::max);
        let herm = k.hermiticity_defect();
        if herm > KERNEL_TOL * scale {
            return Err(Error::KernelInvariant(format!("self-adjointness (defect {herm:e})")));
        }
        Ok(Self(k))
    }

    pub fn kernels(&self) -> &Kernels {
        &self.0
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point `(q_0..q_N, p_0..p_N)` in phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint(pub Vec<f64>);

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(invalid(format!("phase point needs an even, non-zero length, got {}", coords.len())));
        }
        Ok(Self(coords))
    }

    pub fn n_dof(&self) -> usize {
        self.0.len() / 2
    }

    pub fn q(&self) -> &[f64] {
        &self.0[..self.n_dof()]
    }

    pub fn p(&self) -> &[f64] {
        &self.0[self.n_dof()..]
    }
}

/// The canonical symplectic form `sum_j dq_j ^ dp_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    n_dof: usize,
}

impl SymplecticForm {
    pub fn canonical(n_dof: usize) -> Self {
        Self { n_dof }
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    /// `omega(u, v) = sum_j (u_qj v_pj - u_pj v_qj)`.
    pub fn pair(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n_dof;
        (0..n).map(|j| u[j] * v[n + j] - u[n + j] * v[j]).sum()
    }

    /// Hamiltonian vector field from a gradient: `(dH/dp, -dH/dq)`.
    pub fn vector_field(&self, grad: &[f64], out: &mut [f64]) {
        let n = self.n_dof;
        for j in 0..n {
            out[j] = grad[n + j];
            out[n + j] = -grad[j];
        }
    }
}

/// One grid axis: `count` nodes on `[min, max]`.
///
/// Non-periodic axes include both endpoints. Periodic axes identify `max`
/// with `min` and place nodes at `min + k (max - min) / count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, periodic: false }
    }

    pub fn periodic(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, periodic: true }
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.max - self.min) / self.count as f64
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }

    pub fn period(&self) -> f64 {
        self.max - self.min
    }

    /// Cell index and fractional offset for linear interpolation.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let h = self.spacing();
        if self.periodic {
            let u = (x - self.min).rem_euclid(self.period()) / h;
            let i = (u.floor() as usize).min(self.count - 1);
            return Some((i, u - i as f64));
        }
        let tol = 1e-12 * h;
        if x < self.min - tol || x > self.max + tol {
            return None;
        }
        let u = ((x - self.min) / h).clamp(0.0, (self.count - 1) as f64);
        let i = (u.floor() as usize).min(self.count - 2);
        Some((i, u - i as f64))
    }
}

/// Axis-aligned box, used for regions and chart supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(invalid("box bounds must satisfy lo < hi on every axis"));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Self { lo: self.lo.iter().map(|a| a - margin).collect(), hi: self.hi.iter().map(|b| b + margin).collect() }
    }

    /// Central sub-box keeping `fraction` of each side.
    pub fn interior(&self, fraction: f64) -> Self {
        let shrink = 0.5 * (1.0 - fraction);
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (a + shrink * (b - a), b - shrink * (b - a)))
            .unzip();
        Self { lo, hi }
    }
}

/// Tensor-product grid with row-major (last axis fastest) node ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    axes: Vec<Axis>,
}

impl PhaseGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("grid needs at least one axis"));
        }
        for (k, a) in axes.iter().enumerate() {
            if a.count < 3 {
                return Err(Error::TooFewNodes { axis: k, count: a.count });
            }
            if !(a.min.is_finite() && a.max.is_finite()) || !(a.max > a.min) {
                return Err(invalid(format!("axis {k} has zero or negative extent")));
            }
        }
        Ok(Self { axes })
    }

    /// Same uniform non-periodic axis repeated `dim` times.
    pub fn cube(dim: usize, min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(vec![Axis::new(min, max, count); dim])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for k in (0..self.ndim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].count;
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.axes.iter()).fold(0, |acc, (i, a)| acc * a.count + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for k in (0..self.ndim()).rev() {
            let c = self.axes[k].count;
            idx[k] = flat % c;
            flat /= c;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a.node(i)).collect()
    }

    pub fn bounds(&self) -> AxisBox {
        AxisBox {
            lo: self.axes.iter().map(|a| a.min).collect(),
            hi: self.axes.iter().map(|a| if a.periodic { a.max - a.spacing() } else { a.max }).collect(),
        }
    }

    /// True if `x` lies inside the grid (periodic axes always contain `x`).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.ndim() && self.axes.iter().zip(x).all(|(a, v)| a.periodic || a.locate(*v).is_some())
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.count == b.count
                    && a.periodic == b.periodic
                    && (a.min - b.min).abs() <= 1e-12 * (1.0 + a.min.abs())
                    && (a.max - b.max).abs() <= 1e-12 * (1.0 + a.max.abs())
            })
    }

    pub fn check_same(&self, other: &PhaseGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("phase functions live on different grids".into()))
        }
    }

    /// Grid with axis `k` removed.
    pub fn without_axis(&self, k: usize) -> Result<Self> {
        let mut axes = self.axes.clone();
        axes.remove(k);
        Self::new(axes)
    }

    /// True if node `flat` lies in the central `fraction` of every non-periodic axis.
    pub fn in_interior(&self, flat: usize, fraction: f64) -> bool {
        let idx = self.multi_index(flat);
        idx.iter().zip(&self.axes).all(|(&i, a)| {
            if a.periodic {
                return true;
            }
            let u = i as f64 / (a.count - 1) as f64;
            let margin = 0.5 * (1.0 - fraction);
            u >= margin - 1e-12 && u <= 1.0 - margin + 1e-12
        })
    }
}

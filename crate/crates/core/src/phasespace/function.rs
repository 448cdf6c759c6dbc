use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::grid::PhaseGrid;
use super::poly::Polynomial;
use crate::error::{invalid, Error, Result};

/// How grid derivatives are formed along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Second-order central differences, one-sided second order at open edges.
    FiniteDifference,
    /// Fourier differentiation on periodic axes, finite differences elsewhere.
    Spectral,
}

/// Values of a function sampled on a [`PhaseGrid`], optionally with its exact
/// polynomial form.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    grid: PhaseGrid,
    values: Vec<Complex64>,
    exact: Option<Polynomial>,
}

impl PhaseFunction {
    pub fn from_values(grid: PhaseGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values, exact: None })
    }

    pub fn from_real_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        Self::from_values(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_polynomial(grid: PhaseGrid, poly: Polynomial) -> Result<Self> {
        if poly.nvars() != grid.ndim() {
            return Err(Error::GridMismatch(format!("polynomial in {} variables on a {}-axis grid", poly.nvars(), grid.ndim())));
        }
        let values = (0..grid.len()).into_par_iter().map(|i| poly.eval(&grid.point(i))).collect();
        Ok(Self { grid, values, exact: Some(poly) })
    }

    pub fn from_fn<F>(grid: PhaseGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        Self { grid, values, exact: None }
    }

    pub fn from_real_fn<F>(grid: PhaseGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        self.exact = None;
        &mut self.values
    }

    pub fn exact(&self) -> Option<&Polynomial> {
        self.exact.as_ref()
    }

    pub fn without_exact(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol * self.max_abs().max(1.0)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Multilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> Option<Complex64> {
        let d = self.grid.ndim();
        if x.len() != d {
            return None;
        }
        let mut cells = Vec::with_capacity(d);
        for (a, v) in self.grid.axes().iter().zip(x) {
            cells.push(a.locate(*v)?);
        }
        let strides = self.grid.strides();
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..d {
                let (i, t) = cells[k];
                let up = (corner >> k) & 1 == 1;
                let a = self.grid.axis(k);
                let j = if up { if a.periodic { (i + 1) % a.count } else { i + 1 } } else { i };
                w *= if up { t } else { 1.0 - t };
                flat += j * strides[k];
            }
            if w != 0.0 {
                acc += self.values[flat] * w;
            }
        }
        Some(acc)
    }

    /// Exact value if the polynomial form is known, otherwise interpolated.
    pub fn value_at(&self, x: &[f64]) -> Option<Complex64> {
        match &self.exact {
            Some(p) => Some(p.eval(x)),
            None => self.interpolate(x),
        }
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        Self { grid: self.grid.clone(), values: self.values.par_iter().map(|z| f(*z)).collect(), exact: None }
    }

    pub fn zip_with<F>(&self, other: &PhaseFunction, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        self.grid.check_same(&other.grid)?;
        let values = self.values.par_iter().zip(other.values.par_iter()).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self { grid: self.grid.clone(), values, exact: None })
    }

    pub fn add(&self, other: &PhaseFunction) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            out.exact = Some(a + b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PhaseFunction) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a - b)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            out.exact = Some(a - b);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &PhaseFunction) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a * b)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            out.exact = Some(a * b);
        }
        Ok(out)
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        let mut out = self.map(|z| z * c);
        out.exact = self.exact.as_ref().map(|p| p.scale(c));
        out
    }

    /// First derivative along `axis`.
    ///
    /// Uses the exact polynomial form when present.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        self.derivative_with(axis, DerivativeScheme::FiniteDifference)
    }

    pub fn derivative_with(&self, axis: usize, scheme: DerivativeScheme) -> Result<Self> {
        if axis >= self.grid.ndim() {
            return Err(invalid(format!("axis {axis} out of range")));
        }
        if let Some(p) = &self.exact {
            return Self::from_polynomial(self.grid.clone(), p.derivative(axis));
        }
        let a = *self.grid.axis(axis);
        let values = if a.periodic && scheme == DerivativeScheme::Spectral {
            spectral_derivative(&self.grid, &self.values, axis)
        } else {
            fd_derivative(&self.grid, &self.values, axis)
        };
        Ok(Self { grid: self.grid.clone(), values, exact: None })
    }

    /// Mixed partial derivative with multi-index `orders`.
    pub fn partial(&self, orders: &[u32], scheme: DerivativeScheme) -> Result<Self> {
        if let Some(p) = &self.exact {
            return Self::from_polynomial(self.grid.clone(), p.partial(orders));
        }
        let mut out = self.clone();
        for (axis, &n) in orders.iter().enumerate() {
            for _ in 0..n {
                out = out.derivative_with(axis, scheme)?;
            }
        }
        Ok(out)
    }

    /// Nodes where this function and all its stencil neighbours are finite.
    pub fn finite_mask(&self) -> Vec<bool> {
        self.values.iter().map(|z| z.re.is_finite() && z.im.is_finite()).collect()
    }
}

fn for_each_line(grid: &PhaseGrid, axis: usize) -> Vec<usize> {
    let stride = grid.strides()[axis];
    let n = grid.axis(axis).count;
    (0..grid.len()).filter(|f| (f / stride).is_multiple_of(n)).collect()
}

fn fd_derivative(grid: &PhaseGrid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let a = grid.axis(axis);
    let n = a.count;
    let h = a.spacing();
    let stride = grid.strides()[axis];
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    let starts = for_each_line(grid, axis);
    let lines: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&s| {
            let f = |i: usize| values[s + i * stride];
            (0..n)
                .map(|i| {
                    if a.periodic {
                        (f((i + 1) % n) - f((i + n - 1) % n)) / (2.0 * h)
                    } else if i == 0 {
                        (f(0) * -3.0 + f(1) * 4.0 - f(2)) / (2.0 * h)
                    } else if i == n - 1 {
                        (f(n - 1) * 3.0 - f(n - 2) * 4.0 + f(n - 3)) / (2.0 * h)
                    } else {
                        (f(i + 1) - f(i - 1)) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect();
    for (s, line) in starts.iter().zip(lines) {
        for (i, v) in line.into_iter().enumerate() {
            out[s + i * stride] = v;
        }
    }
    out
}

fn spectral_derivative(grid: &PhaseGrid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let a = grid.axis(axis);
    let n = a.count;
    let stride = grid.strides()[axis];
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(n);
    let inv: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_inverse(n);
    let two_pi_over_l = 2.0 * std::f64::consts::PI / a.period();
    let factors: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = if 2 * m < n { m as f64 } else if 2 * m == n { 0.0 } else { m as f64 - n as f64 };
            Complex64::new(0.0, k * two_pi_over_l / n as f64)
        })
        .collect();
    let starts = for_each_line(grid, axis);
    let lines: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&s| {
            let mut buf: Vec<Complex64> = (0..n).map(|i| values[s + i * stride]).collect();
            fwd.process(&mut buf);
            for (b, f) in buf.iter_mut().zip(&factors) {
                *b *= f;
            }
            inv.process(&mut buf);
            buf
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for (s, line) in starts.iter().zip(lines) {
        for (i, v) in line.into_iter().enumerate() {
            out[s + i * stride] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::grid::Axis;

    #[test]
    fn fd_is_exact_on_quadratics() {
        let g = PhaseGrid::new(vec![Axis::new(-1.0, 2.0, 7), Axis::new(0.0, 1.0, 5)]).unwrap();
        let f = PhaseFunction::from_real_fn(g.clone(), |x| 3.0 * x[0] * x[0] - x[0] * x[1]);
        let d = f.derivative(0).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            assert!((d.values()[i].re - (6.0 * x[0] - x[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let l = 2.0 * std::f64::consts::PI;
        let g = PhaseGrid::new(vec![Axis::periodic(0.0, l, 32), Axis::new(0.0, 1.0, 3)]).unwrap();
        let f = PhaseFunction::from_real_fn(g.clone(), |x| (3.0 * x[0]).sin() * (1.0 + x[1]));
        let d = f.derivative_with(0, DerivativeScheme::Spectral).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            assert!((d.values()[i].re - 3.0 * (3.0 * x[0]).cos() * (1.0 + x[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_is_exact_for_multilinear() {
        let g = PhaseGrid::new(vec![Axis::new(0.0, 1.0, 4), Axis::new(0.0, 2.0, 5)]).unwrap();
        let f = PhaseFunction::from_real_fn(g, |x| 1.0 + 2.0 * x[0] + x[1] + x[0] * x[1]);
        let v = f.interpolate(&[0.37, 1.21]).unwrap().re;
        assert!((v - (1.0 + 0.74 + 1.21 + 0.37 * 1.21)).abs() < 1e-13);
        assert!(f.interpolate(&[1.5, 0.0]).is_none());
    }
}

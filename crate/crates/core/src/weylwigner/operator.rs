use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform position lattice `q_a = origin + a * dq`, `a = 0..dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionBasis {
    pub dim: usize,
    pub dq: f64,
    pub origin: f64,
}

impl PositionBasis {
    pub fn new(dim: usize, dq: f64, origin: f64) -> Result<Self> {
        if dim.is_multiple_of(2) {
            return Err(Error::EvenDimension(dim));
        }
        if !(dq > 0.0) || !dq.is_finite() || !origin.is_finite() {
            return Err(invalid("lattice spacing must be positive and finite"));
        }
        Ok(Self { dim, dq, origin })
    }

    /// Lattice of `dim` points centred on zero.
    pub fn centered(dim: usize, dq: f64) -> Result<Self> {
        Self::new(dim, dq, -((dim / 2) as f64) * dq)
    }

    pub fn position(&self, a: usize) -> f64 {
        self.origin + a as f64 * self.dq
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.position(a)).collect()
    }

    /// Momenta of the discrete Fourier modes, `2 pi hbar k / (dim dq)` with `k` centred.
    pub fn momenta(&self, hbar: f64) -> Vec<f64> {
        let half = (self.dim / 2) as i64;
        (-half..=half).map(|k| 2.0 * std::f64::consts::PI * hbar * k as f64 / (self.dim as f64 * self.dq)).collect()
    }

    fn same_as(&self, other: &PositionBasis) -> bool {
        self.dim == other.dim && (self.dq - other.dq).abs() <= 1e-12 * self.dq && (self.origin - other.origin).abs() <= 1e-12 * (1.0 + self.origin.abs())
    }
}

/// Operator on the position lattice, stored as a dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: DMatrix<Complex64>,
    basis: PositionBasis,
    hbar: f64,
}

impl OperatorMatrix {
    pub fn new(matrix: DMatrix<Complex64>, basis: PositionBasis, hbar: f64) -> Result<Self> {
        if matrix.nrows() != basis.dim || matrix.ncols() != basis.dim {
            return Err(invalid(format!("matrix is {}x{}, basis has {} points", matrix.nrows(), matrix.ncols(), basis.dim)));
        }
        if basis.dim.is_multiple_of(2) {
            return Err(Error::EvenDimension(basis.dim));
        }
        if !(hbar > 0.0) {
            return Err(invalid("hbar must be positive"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries".into()));
        }
        Ok(Self { matrix, basis, hbar })
    }

    pub fn identity(basis: PositionBasis, hbar: f64) -> Result<Self> {
        Self::new(DMatrix::identity(basis.dim, basis.dim), basis, hbar)
    }

    /// Diagonal position operator.
    pub fn position(basis: PositionBasis, hbar: f64) -> Result<Self> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(basis.dim, basis.positions().into_iter().map(|q| Complex64::new(q, 0.0))));
        Self::new(d, basis, hbar)
    }

    /// Spectral momentum operator on the periodic lattice.
    pub fn momentum(basis: PositionBasis, hbar: f64) -> Result<Self> {
        let d = basis.dim;
        let half = (d / 2) as i64;
        let pk = basis.momenta(hbar);
        let m = DMatrix::from_fn(d, d, |a, b| {
            let diff = a as f64 - b as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for (i, k) in (-half..=half).enumerate() {
                s += Complex64::from_polar(pk[i], 2.0 * std::f64::consts::PI * k as f64 * diff / d as f64);
            }
            s / d as f64
        });
        Self::new(m, basis, hbar)
    }

    pub fn from_fn<F: Fn(usize, usize) -> Complex64>(basis: PositionBasis, hbar: f64, f: F) -> Result<Self> {
        Self::new(DMatrix::from_fn(basis.dim, basis.dim, f), basis, hbar)
    }

    /// Pure state `|psi><psi|` from amplitudes on the lattice, normalized.
    pub fn pure_state(basis: PositionBasis, hbar: f64, psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if psi.len() != basis.dim || !(norm > 0.0) {
            return Err(invalid("state vector must match the basis and be non-zero"));
        }
        Self::from_fn(basis, hbar, |a, b| psi[a] * psi[b].conj() / norm)
    }

    /// `n`-th eigenstate of `(p^2 + q^2) / 2`, sampled from the Hermite
    /// function on the lattice and normalized there.
    pub fn oscillator_state(basis: PositionBasis, hbar: f64, n: usize) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(invalid("hbar must be positive"));
        }
        let psi: Vec<Complex64> = basis
            .positions()
            .iter()
            .map(|x| {
                let xi = x / hbar.sqrt();
                let (mut prev, mut cur) = (0.0, (-0.5 * xi * xi).exp());
                for k in 0..n {
                    let next = (2.0 / (k + 1) as f64).sqrt() * xi * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
                    prev = cur;
                    cur = next;
                }
                Complex64::new(cur, 0.0)
            })
            .collect();
        Self::pure_state(basis, hbar, &psi)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn basis(&self) -> &PositionBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), ..self.clone() }
    }

    /// Largest entry of `A - A^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn check_compatible(&self, other: &OperatorMatrix) -> Result<()> {
        if !self.basis.same_as(&other.basis) || (self.hbar - other.hbar).abs() > 1e-14 * self.hbar {
            return Err(Error::GridMismatch("operators live on different lattices or use different hbar".into()));
        }
        Ok(())
    }

    pub fn product(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, ..self.clone() })
    }

    pub fn sum(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, ..self.clone() })
    }

    pub fn scaled(&self, c: impl Into<Complex64>) -> Self {
        Self { matrix: &self.matrix * c.into(), ..self.clone() }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix, ..self.clone() })
    }

    /// `Tr(A^dagger B)`.
    pub fn inner(&self, other: &OperatorMatrix) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn max_difference(&self, other: &OperatorMatrix) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

//! JSON storage for kernels:
//! `{omega_max, count, charts, m_dim, singular, regular, hbar}` with complex
//! entries as `[re, im]` pairs in row-major order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernels, OmegaGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub omega_max: f64,
    pub count: usize,
    pub charts: Vec<usize>,
    pub m_dim: usize,
    pub singular: Vec<[f64; 2]>,
    pub regular: Vec<[f64; 2]>,
    pub hbar: f64,
}

impl KernelFile {
    pub fn from_kernels(k: &Kernels) -> Self {
        let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect();
        Self {
            omega_max: k.grid.omega_max,
            count: k.grid.count,
            charts: k.charts.clone(),
            m_dim: k.m_dim,
            singular: pairs(&k.singular),
            regular: pairs(&k.regular),
            hbar: k.hbar,
        }
    }

    pub fn to_kernels(&self) -> Result<Kernels> {
        let grid = OmegaGrid::new(self.omega_max, self.count)?;
        let mut k = Kernels::zeros(grid, self.charts.clone(), self.m_dim, self.hbar)?;
        if self.singular.len() != k.singular.len() || self.regular.len() != k.regular.len() {
            return Err(Error::Format(format!(
                "expected {} singular and {} regular entries, found {} and {}",
                k.singular.len(),
                k.regular.len(),
                self.singular.len(),
                self.regular.len()
            )));
        }
        k.singular = self.singular.iter().map(|[a, b]| Complex64::new(*a, *b)).collect();
        k.regular = self.regular.iter().map(|[a, b]| Complex64::new(*a, *b)).collect();
        Ok(k)
    }
}

pub fn kernels_to_json(k: &Kernels) -> Result<String> {
    Ok(serde_json::to_string(&KernelFile::from_kernels(k))?)
}

pub fn kernels_from_json(s: &str) -> Result<Kernels> {
    serde_json::from_str::<KernelFile>(s)?.to_kernels()
}

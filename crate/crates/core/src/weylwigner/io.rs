//! JSON storage for operator matrices:
//! `{dim, dq, origin, hbar, entries: [[re, im], ...]}` in row-major order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorMatrix, PositionBasis};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub dim: usize,
    pub dq: f64,
    pub origin: f64,
    pub hbar: f64,
    pub entries: Vec<[f64; 2]>,
}

impl OperatorFile {
    pub fn from_operator(op: &OperatorMatrix) -> Self {
        let b = op.basis();
        let d = b.dim;
        let m = op.matrix();
        let entries = (0..d * d).map(|i| m[(i / d, i % d)]).map(|z| [z.re, z.im]).collect();
        Self { dim: d, dq: b.dq, origin: b.origin, hbar: op.hbar(), entries }
    }

    pub fn to_operator(&self) -> Result<OperatorMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Format(format!("expected {} entries, found {}", self.dim * self.dim, self.entries.len())));
        }
        let basis = PositionBasis::new(self.dim, self.dq, self.origin)?;
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |a, b| {
            let [re, im] = self.entries[a * d + b];
            Complex64::new(re, im)
        });
        OperatorMatrix::new(m, basis, self.hbar)
    }
}

pub fn operator_to_json(op: &OperatorMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&OperatorFile::from_operator(op))?)
}

pub fn operator_from_json(s: &str) -> Result<OperatorMatrix> {
    serde_json::from_str::<OperatorFile>(s)?.to_operator()
}

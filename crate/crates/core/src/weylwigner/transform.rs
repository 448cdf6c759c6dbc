use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorMatrix, PositionBasis};
use crate::error::{invalid, Result};
use crate::phasespace::{Axis, PhaseFunction, PhaseGrid};

/// Whether a symbol represents an observable or a density matrix.
///
/// State symbols carry the extra factor `(2 pi hbar)^-(N+1)` so that
/// `integral W_rho W_O = Tr(rho O)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Observable,
    State,
}

/// Phase-space symbol of an [`OperatorMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSymbol {
    pub function: PhaseFunction,
    pub hbar: f64,
    pub kind: SymbolKind,
    pub basis: PositionBasis,
}

impl WignerSymbol {
    /// Value at a grid node given by position index `j` (half-lattice, with
    /// one padding row at each end) and momentum index `k`.
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.function.values()[j * self.basis.dim + k]
    }

    fn prefactor(&self) -> f64 {
        prefactor(self.kind, self.hbar)
    }
}

fn prefactor(kind: SymbolKind, hbar: f64) -> f64 {
    match kind {
        SymbolKind::Observable => 2.0,
        SymbolKind::State => 2.0 / (2.0 * std::f64::consts::PI * hbar),
    }
}

/// Phase-space grid on which symbols of operators over `basis` live.
///
/// Positions: the half-integer lattice `origin + J dq / 2`, `J = -1..=2d-1`
/// (`2d + 1` nodes; the end rows only pad the trapezoid rule).
/// Momenta: `d` periodic nodes `pi hbar K / (d dq)` with `K` centred.
pub fn symbol_grid(basis: &PositionBasis, hbar: f64) -> Result<PhaseGrid> {
    let d = basis.dim;
    let dq = basis.dq;
    let q0 = basis.origin - 0.5 * dq;
    let q1 = basis.origin + (d - 1) as f64 * dq + 0.5 * dq;
    let dp = std::f64::consts::PI * hbar / (d as f64 * dq);
    let pmin = -((d / 2) as f64) * dp;
    PhaseGrid::new(vec![Axis::new(q0, q1, 2 * d + 1), Axis::periodic(pmin, pmin + d as f64 * dp, d)])
}

fn phase_table(d: usize, sign: f64) -> Vec<Complex64> {
    (0..2 * d).map(|m| Complex64::from_polar(1.0, sign * std::f64::consts::PI * m as f64 / d as f64)).collect()
}

/// Wigner-Weyl symbol of an operator.
pub fn wigner_symb(op: &OperatorMatrix, kind: SymbolKind) -> Result<WignerSymbol> {
    let basis = *op.basis();
    let d = basis.dim;
    let grid = symbol_grid(&basis, op.hbar())?;
    let a = op.matrix();
    let table = phase_table(d, -1.0);
    let half = (d / 2) as i64;
    let two_d = 2 * d as i64;
    let alpha = prefactor(kind, op.hbar());
    let rows: Vec<Vec<Complex64>> = (0..2 * d + 1)
        .into_par_iter()
        .map(|jp| {
            let mut row = vec![Complex64::new(0.0, 0.0); d];
            if jp == 0 || jp == 2 * d {
                return row;
            }
            let j = jp - 1;
            let lo = j.saturating_sub(d - 1);
            let hi = j.min(d - 1);
            for (kk, out) in row.iter_mut().enumerate() {
                let k = kk as i64 - half;
                let mut s = Complex64::new(0.0, 0.0);
                for aa in lo..=hi {
                    let bb = j - aa;
                    let m = (k * (aa as i64 - bb as i64)).rem_euclid(two_d) as usize;
                    s += table[m] * a[(aa, bb)];
                }
                *out = s * alpha;
            }
            row
        })
        .collect();
    let values = rows.into_iter().flatten().collect();
    Ok(WignerSymbol { function: PhaseFunction::from_values(grid, values)?, hbar: op.hbar(), kind, basis })
}

/// Inverse of [`wigner_symb`]: recovers the operator matrix exactly.
pub fn weyl_operator(symbol: &WignerSymbol) -> Result<OperatorMatrix> {
    let d = symbol.basis.dim;
    if symbol.function.grid().len() != (2 * d + 1) * d {
        return Err(invalid("symbol grid does not match its basis"));
    }
    let table = phase_table(d, 1.0);
    let half = (d / 2) as i64;
    let two_d = 2 * d as i64;
    let scale = 1.0 / (d as f64 * symbol.prefactor());
    let m = DMatrix::from_fn(d, d, |a, b| {
        let jp = a + b + 1;
        let mut s = Complex64::new(0.0, 0.0);
        for kk in 0..d {
            let k = kk as i64 - half;
            let idx = (k * (a as i64 - b as i64)).rem_euclid(two_d) as usize;
            s += table[idx] * symbol.at(jp, kk);
        }
        s * scale
    });
    OperatorMatrix::new(m, symbol.basis, symbol.hbar)
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::OperatorMatrix;
use super::transform::{wigner_symb, SymbolKind};
use crate::error::Result;
use crate::phasespace::integrate_phase;

/// Quantum trace and its phase-space counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePairing {
    /// `Tr(rho^dagger O)`.
    pub quantum: Complex64,
    /// `integral conj(W_rho) W_O dq dp`.
    pub classical: Complex64,
    /// `|quantum - classical|`.
    pub discrepancy: f64,
}

impl TracePairing {
    pub fn relative_discrepancy(&self) -> f64 {
        self.discrepancy / self.quantum.norm().max(f64::MIN_POSITIVE)
    }
}

/// Compares `Tr(rho^dagger O)` with the phase-space integral of the symbols.
pub fn trace_pairing(rho: &OperatorMatrix, obs: &OperatorMatrix) -> Result<TracePairing> {
    let quantum = rho.inner(obs)?;
    let wr = wigner_symb(rho, SymbolKind::State)?;
    let wo = wigner_symb(obs, SymbolKind::Observable)?;
    let integrand = wr.function.zip_with(&wo.function, |a, b| a.conj() * b)?;
    let classical = integrate_phase(&integrand, None)?;
    Ok(TracePairing { quantum, classical, discrepancy: (quantum - classical).norm() })
}

//! Energy-shell (van Hove) representation of states and observables.
//!
//! Kernels are indexed by chart, energy `w` on a uniform grid and a finite
//! multiplicity index `m`. The singular part is diagonal in energy and
//! survives for all times; the regular part couples `w` to `w'` and dephases.

mod dynamics;
pub mod io;
mod kernel;
mod pointer;
pub mod scenarios;
mod trace;

pub use dynamics::{decoherence_time, evolve, mean_value, resolution_horizon, weak_limit, DecoherenceTime, MeanValue, Pairing};
pub use kernel::{Kernels, OmegaGrid, VanHoveObservable, VanHoveState, KERNEL_TOL};
pub use pointer::{pointer_basis, PointerBasis, PointerTransform, HERMITIAN_TOL};
pub use trace::m_trace;

#[cfg(test)]
mod tests;

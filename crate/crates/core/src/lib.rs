//! Phase-space formulation of quantum mechanics on finite lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`phasespace`]: grids, sampled phase functions, polynomials, Poisson
//!   brackets, quadrature and Hamiltonian flows.
//! * [`weylwigner`]: operator matrices, the Wigner symbol map, Weyl
//!   quantization, the Moyal star product and bracket, and the trace pairing.
//! * [`vanhove`]: singular/regular energy-shell kernels, their mean values,
//!   time evolution, decoherence times, pointer bases and partial traces.
//! * [`charts`]: transported constants of motion, involutive sets, Lipschitz
//!   checks and smooth partitions of unity.
//! * [`classical`]: microcanonical volumes, classical densities, sampled
//!   ensembles, constant classification and traced equilibria.
//! * [`billiard`]: a Sinai billiard with smooth steep walls.

pub mod billiard;
pub mod charts;
pub mod classical;
pub mod error;
pub mod numeric;
pub mod phasespace;
pub mod vanhove;
pub mod weylwigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Physical scales shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scales {
    pub hbar: f64,
    pub action_scale: f64,
}

impl Default for Scales {
    fn default() -> Self {
        Self { hbar: 1.0, action_scale: 1.0 }
    }
}

//! Phase-space primitives: grids, sampled functions, brackets, quadrature
//! and Hamiltonian flows.

mod bracket;
mod flow;
mod function;
mod grid;
mod integrate;
pub mod io;
mod poly;

pub use bracket::{poisson_bracket, poisson_bracket_poly};
pub use flow::{
    dp45_step, hamilton_flow, hamilton_flow_sampled, hamiltonian_of, integrate_adaptive, strang_step, CompiledPoly, GridHamiltonian, Hamiltonian,
    Integrator, PolynomialHamiltonian, Trajectory,
};
pub use function::{DerivativeScheme, PhaseFunction};
pub use grid::{Axis, AxisBox, PhaseGrid, PhasePoint, SymplecticForm};
pub use integrate::integrate_phase;
pub use poly::Polynomial;

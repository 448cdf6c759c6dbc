//! Classical limit: smoothed microcanonical volumes, densities over an atlas,
//! sampled ensembles and the classification of conserved functions.

mod classify;
mod density;
mod ensemble;
mod equilibrium;
mod volume;

pub use classify::{classify_constant, classify_series, Classification, ConstantKind, ProbeSample, DEFAULT_DRIFT_TOL, MIN_TRANSITIONS};
pub use density::{classical_density, ClassicalDensity, DensityModel};
pub use ensemble::{chi_square_2d, evolve_ensemble, sample_density, sample_trajectories, ChiSquareTest, Ensemble, MIN_SAMPLING_EFFICIENCY};
pub use equilibrium::{traced_equilibrium, ClassifiedFunction};
pub use volume::{chart_domain, config_volume, volume_convergence, LevelSpec, MicroVolume, MAX_RELATIVE_MC_ERROR};

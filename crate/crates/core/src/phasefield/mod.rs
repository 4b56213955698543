//! The ε-regularized phase-field energy on the periodic torus.

mod energy;
mod grid;
mod nearfar;
mod scaling;
mod spectral;

pub use energy::{minimize_energy, peierls_energy, total_energy, EnergyBreakdown, MinimizeOutcome, PhaseFieldConfig};
pub use grid::{build_dipole_stack, build_regularized_dipole, build_sharp_dipole, TorusGrid};
pub use nearfar::{near_far_split, NearFar};
pub use scaling::{linear_fit, scaling_fit, stack_energies, ScalingFit, ScalingRow, StackRow};
pub use spectral::{elastic_energy_and_gradient, elastic_energy_spectral, fourier_symbol, symbol_matrix};

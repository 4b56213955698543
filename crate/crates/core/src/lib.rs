//! Line-tension energies, relaxation and cell problems for planar dislocation
//! networks on a single active slip plane.

pub mod cell;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod limit;
pub mod linetension;
pub mod optimize;
pub mod phasefield;
pub mod quadrature;
pub mod relax;

pub use error::{Error, Result};

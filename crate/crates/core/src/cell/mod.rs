//! Periodic dislocation microstructures realizing an affine macroscopic slip
//! gradient, and the resulting upper bounds for the cell-problem density `g`.

mod gupper;
mod network;
mod zigzag;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::relax::AsymptoticDensity;

pub use gupper::{g_upper, grid_energy, GUpperParams, GWitness, Laminate};
pub use network::{periodic_network_energy, periodic_network_optimize, NetworkOptimum, PeriodicNetworkTopology, PeriodicSegment};
pub use zigzag::{
    eta_threshold, nu_threshold, zigzag_energy, zigzag_energy_with, zigzag_optimize, zigzag_optimize_with, ZigzagConfig,
    ZigzagEnergy, ZigzagOptimum,
};

/// Energy per unit length of a wall with (real) Burgers vector `b` and unit normal `n`.
pub trait WallDensity {
    fn psi(&self, b: &[f64], n: [f64; 2]) -> f64;
}

impl<F: Fn(&[f64], [f64; 2]) -> f64> WallDensity for F {
    fn psi(&self, b: &[f64], n: [f64; 2]) -> f64 {
        self(b, n)
    }
}

impl WallDensity for AsymptoticDensity {
    fn psi(&self, b: &[f64], n: [f64; 2]) -> f64 {
        self.eval(b, n)
    }
}

/// Macroscopic slip gradient, an `N×2` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineSlip {
    rows: Vec<[f64; 2]>,
}

impl AffineSlip {
    pub fn new(rows: Vec<[f64; 2]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("slip gradient needs at least one row".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("slip gradient entries must be finite".into()));
        }
        Ok(Self { rows })
    }

    pub fn diag(a1: f64, a2: f64) -> Self {
        Self { rows: vec![[a1, 0.0], [0.0, a2]] }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { rows: vec![[0.0; 2]; dim] }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != 2 {
            return Err(Error::Domain(format!("slip gradient must have two columns, got {}", m.ncols())));
        }
        Self::new((0..m.nrows()).map(|i| [m[(i, 0)], m[(i, 1)]]).collect())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), 2, |i, j| self.rows[i][j])
    }

    /// `A v` for a vector in the plane.
    pub fn apply(&self, v: [f64; 2]) -> Vec<f64> {
        self.rows.iter().map(|r| r[0] * v[0] + r[1] * v[1]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { rows: self.rows.iter().map(|r| [t * r[0], t * r[1]]).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.rows.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|&x| x == 0.0)
    }
}

//! The ε-regularized energy `E_ε = (1/ε)∫dist²(u,ℤᴺ) + elastic`, and its minimization.

use serde::Serialize;

use super::grid::TorusGrid;
use super::spectral::{elastic_energy_and_gradient, elastic_energy_spectral, fourier_symbol};
use crate::error::{Error, Result};
use crate::kernel::KernelOnCircle;

#[derive(Debug, Clone)]
pub struct PhaseFieldConfig {
    pub eps: f64,
    pub kernel: KernelOnCircle,
    /// Near-field radius for [`super::near_far_split`].
    pub rho: f64,
    symbol: KernelOnCircle,
}

impl PhaseFieldConfig {
    pub fn new(eps: f64, kernel: KernelOnCircle, rho: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("rho must be positive, got {rho}")));
        }
        let symbol = fourier_symbol(&kernel)?;
        Ok(Self { eps, kernel, rho, symbol })
    }

    /// Angular part of the elastic multiplier (see [`fourier_symbol`]).
    pub fn symbol(&self) -> &KernelOnCircle {
        &self.symbol
    }

    /// Check `ε < L/4` and `ρ < L/2` for a torus of period `l`.
    pub fn check_period(&self, l: f64) -> Result<()> {
        if !(self.eps < l / 4.0) {
            return Err(Error::Domain(format!("eps = {} must be below L/4 = {}", self.eps, l / 4.0)));
        }
        if !(self.rho < l / 2.0) {
            return Err(Error::Domain(format!("rho = {} must be below L/2 = {}", self.rho, l / 2.0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub peierls: f64,
    pub elastic: f64,
    pub total: f64,
}

fn dist_to_int(v: f64) -> f64 {
    v - v.round()
}

/// `(1/ε)(L/M)² Σ_cells Σ_i dist²(u_i, ℤ)`.
pub fn peierls_energy(g: &TorusGrid, eps: f64) -> f64 {
    let h = g.spacing();
    g.values().iter().map(|&v| dist_to_int(v).powi(2)).sum::<f64>() * h * h / eps
}

fn peierls_gradient(g: &TorusGrid, eps: f64) -> Vec<f64> {
    let h = g.spacing();
    g.values()
        .iter()
        .map(|&v| if v - v.floor() == 0.5 { 0.0 } else { 2.0 * h * h / eps * dist_to_int(v) })
        .collect()
}

/// Peierls plus spectral elastic energy.
pub fn total_energy(g: &TorusGrid, cfg: &PhaseFieldConfig) -> EnergyBreakdown {
    let peierls = peierls_energy(g, cfg.eps);
    let elastic = elastic_energy_spectral(g, cfg.symbol());
    EnergyBreakdown { peierls, elastic, total: peierls + elastic }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub grid: TorusGrid,
    /// Total energy at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub accepted: usize,
}

/// Preconditioned gradient descent with backtracking.
///
/// The search direction is the energy gradient divided by the cell area. A
/// step is accepted only if it lowers the energy; otherwise it is halved, and
/// the run stops early when 40 halvings fail.
pub fn minimize_energy(g0: &TorusGrid, cfg: &PhaseFieldConfig, iters: usize, step: f64) -> Result<MinimizeOutcome> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let h2 = g0.spacing().powi(2);
    let mut g = g0.clone();
    let mut energy = total_energy(&g, cfg).total;
    let mut trace = vec![energy];
    let mut t = step;
    let mut accepted = 0;
    'outer: for _ in 0..iters {
        let (_, mut grad) = elastic_energy_and_gradient(&g, cfg.symbol());
        for (a, b) in grad.iter_mut().zip(peierls_gradient(&g, cfg.eps)) {
            *a = (*a + b) / h2;
        }
        for _ in 0..40 {
            let mut trial = g.clone();
            for (v, d) in trial.values_mut().iter_mut().zip(&grad) {
                *v -= t * d;
            }
            let e = total_energy(&trial, cfg).total;
            if e < energy {
                g = trial;
                energy = e;
                trace.push(e);
                accepted += 1;
                t *= 1.5;
                continue 'outer;
            }
            t *= 0.5;
        }
        break;
    }
    Ok(MinimizeOutcome { grid: g, trace, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MaterialCubic;
    use crate::phasefield::grid::{build_regularized_dipole, build_sharp_dipole};
    use approx::assert_relative_eq;

    fn cfg(eps: f64) -> PhaseFieldConfig {
        PhaseFieldConfig::new(eps, KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0).unwrap()), 0.25).unwrap()
    }

    #[test]
    fn peierls_examples() {
        let g = TorusGrid::constant(2.0, 8, &[3.0, -1.0]).unwrap();
        assert_eq!(peierls_energy(&g, 0.1), 0.0);
        let g = TorusGrid::constant(2.0, 8, &[0.5, 0.5, 0.5]).unwrap();
        assert_relative_eq!(peierls_energy(&g, 0.1), 4.0 * 3.0 / 4.0 / 0.1, max_relative = 1e-14);
        // two ramps of width ε, each ∫min(v,1−v)² = ε/12 per unit length
        let g = build_regularized_dipole(1.0, 1024, 1.0 / 16.0, &[1.0]).unwrap();
        assert_relative_eq!(peierls_energy(&g, 1.0 / 16.0), 1.0 / 6.0, max_relative = 1e-3);
    }

    #[test]
    fn total_is_sum_and_nonnegative() {
        let c = cfg(1.0 / 32.0);
        let g = build_regularized_dipole(1.0, 64, 1.0 / 32.0, &[1.0, 0.0]).unwrap();
        let e = total_energy(&g, &c);
        assert_eq!(e.total, e.peierls + e.elastic);
        assert!(e.peierls > 0.0 && e.elastic > 0.0);
        let z = total_energy(&TorusGrid::constant(1.0, 16, &[2.0, -3.0]).unwrap(), &c);
        assert_eq!(z.peierls, 0.0);
        assert!(z.total.abs() < 1e-20);
    }

    #[test]
    fn minimizer_keeps_integer_states() {
        let g = TorusGrid::constant(1.0, 16, &[1.0, 0.0]).unwrap();
        let out = minimize_energy(&g, &cfg(0.1), 20, 0.1).unwrap();
        assert_eq!(out.grid, g);
        assert_eq!(out.accepted, 0);
        assert!(minimize_energy(&g, &cfg(0.1), 1, 0.0).is_err());
    }

    #[test]
    fn sharp_dipole_relaxes() {
        let eps = 1.0 / 32.0;
        let g = build_sharp_dipole(1.0, 128, &[1.0, 0.0]).unwrap();
        let out = minimize_energy(&g, &cfg(eps), 200, 0.01).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
        assert!(out.trace.last().unwrap() < &out.trace[0]);
        // core width from the steepest step of the profile; the sharp start has width h
        let h = 1.0 / 128.0;
        let steepest = (0..128).map(|i| (out.grid.at((i + 1) % 128, 0)[0] - out.grid.at(i, 0)[0]).abs() / h).fold(0.0, f64::max);
        let width = 1.0 / steepest;
        assert!(width > eps && width < 10.0 * eps, "core width {width}");
    }
}

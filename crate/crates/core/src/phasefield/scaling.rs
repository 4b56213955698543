//! Logarithmic scaling of dipole energies and quadratic growth of dislocation stacks.

use serde::Serialize;

use super::energy::{total_energy, PhaseFieldConfig};
use super::grid::{build_dipole_stack, build_regularized_dipole};
use crate::error::{Error, Result};
use crate::kernel::KernelOnCircle;

/// Least-squares line `y = slope·x + intercept` with its coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub ln_inv_eps: f64,
    pub peierls: f64,
    pub elastic: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingFit {
    /// Slope of the fit without the largest `ε`.
    pub fn slope_without_coarsest(&self) -> f64 {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        rows.pop();
        let x: Vec<f64> = rows.iter().map(|r| r.ln_inv_eps).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.total).collect();
        linear_fit(&x, &y).0
    }
}

/// Fit the regularized-dipole energy against `ln(1/ε)` on an `M×M` grid.
pub fn scaling_fit(l: f64, m: usize, eps_list: &[f64], b: &[f64], kernel: &KernelOnCircle) -> Result<ScalingFit> {
    if eps_list.len() < 2 {
        return Err(Error::Domain("need at least two values of eps".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let g = build_regularized_dipole(l, m, eps, b)?;
        let cfg = PhaseFieldConfig::new(eps, kernel.clone(), l / 4.0)?;
        let e = total_energy(&g, &cfg);
        rows.push(ScalingRow { eps, ln_inv_eps: (1.0 / eps).ln(), peierls: e.peierls, elastic: e.elastic, total: e.total });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.ln_inv_eps).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.total).collect();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    Ok(ScalingFit { slope, intercept, r2, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StackRow {
    pub count: usize,
    pub total: f64,
    /// `E(count)/E(previous count)`, or NaN for the first row.
    pub ratio: f64,
}

/// Energies of staircases of `count` equally spaced dipoles at fixed `ε`.
pub fn stack_energies(l: f64, m: usize, eps: f64, b: &[f64], counts: &[usize], kernel: &KernelOnCircle) -> Result<Vec<StackRow>> {
    let cfg = PhaseFieldConfig::new(eps, kernel.clone(), l / 4.0)?;
    let mut out: Vec<StackRow> = Vec::with_capacity(counts.len());
    for &count in counts {
        let g = build_dipole_stack(l, m, eps, b, count)?;
        let total = total_energy(&g, &cfg).total;
        let ratio = out.last().map_or(f64::NAN, |p| total / p.total);
        out.push(StackRow { count, total, ratio });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c, r2) = linear_fit(&x, &y);
        assert_relative_eq!(s, 2.5, max_relative = 1e-14);
        assert_relative_eq!(c, -1.0, max_relative = 1e-13);
        assert_relative_eq!(r2, 1.0, max_relative = 1e-14);
    }
}

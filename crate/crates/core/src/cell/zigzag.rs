//! The zig-zag composite: two wall families reacting along 45° segments.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::Serialize;

use super::WallDensity;
use crate::error::{Error, Result};
use crate::kernel::MaterialCubic;
use crate::optimize::golden_section;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZigzagConfig {
    pub sigma: f64,
    /// Half of the horizontal projection of the composite segment.
    pub delta: f64,
    pub mat: MaterialCubic,
}

impl ZigzagConfig {
    pub fn new(sigma: f64, delta: f64, mat: MaterialCubic) -> Result<Self> {
        check_geometry(sigma, delta)?;
        Ok(Self { sigma, delta, mat })
    }
}

fn check_geometry(sigma: f64, delta: f64) -> Result<()> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(0.0..sigma / 2.0).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, sigma/2)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZigzagEnergy {
    /// Energy in one `σ×σ` cell.
    pub cell: f64,
    /// Energy per unit area.
    pub per_area: f64,
}

/// Closed-form cubic `e(δ) = 4σ(μ/4π)[ℓ + η(σ/2−δ)²/ℓ + δ√2]`, `ℓ = √(δ² + (σ/2−δ)²)`.
pub fn zigzag_energy(cfg: &ZigzagConfig) -> Result<ZigzagEnergy> {
    check_geometry(cfg.sigma, cfg.delta)?;
    let (s, d) = (cfg.sigma, cfg.delta);
    let h = s / 2.0 - d;
    let l = d.hypot(h);
    let cell = 4.0 * s * cfg.mat.mu_over_4pi() * (l + cfg.mat.eta() * h * h / l + d * SQRT_2);
    Ok(ZigzagEnergy { cell, per_area: cell / (s * s) })
}

/// `e(δ)` for an arbitrary wall density: the composite `σ(b₁+b₂)` runs at 45°
/// and the two arms carry `σb₁` and `σb₂`.
pub fn zigzag_energy_with<D: WallDensity + ?Sized>(sigma: f64, delta: f64, b1: &[f64], b2: &[f64], density: &D) -> Result<ZigzagEnergy> {
    check_geometry(sigma, delta)?;
    let h = sigma / 2.0 - delta;
    let l = delta.hypot(h);
    let sb1: Vec<f64> = b1.iter().map(|x| sigma * x).collect();
    let sb2: Vec<f64> = b2.iter().map(|x| sigma * x).collect();
    let sum: Vec<f64> = sb1.iter().zip(&sb2).map(|(a, b)| a + b).collect();
    let mut cell = 2.0 * l * (density.psi(&sb1, [h / l, delta / l]) + density.psi(&sb2, [delta / l, h / l]));
    if delta > 0.0 {
        cell += 2.0 * delta * SQRT_2 * density.psi(&sum, [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
    }
    Ok(ZigzagEnergy { cell, per_area: cell / (sigma * sigma) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZigzagOptimum {
    pub delta: f64,
    pub energy: ZigzagEnergy,
    /// The straight grid, `δ = 0`.
    pub grid: ZigzagEnergy,
}

impl ZigzagOptimum {
    /// `(e(0) − e(δ*))/σ²`.
    pub fn margin_per_area(&self) -> f64 {
        self.grid.per_area - self.energy.per_area
    }
}

/// Minimize `e` over `δ ∈ [0, σ/2)` by golden section; `δ* = 0` unless the
/// interior candidate improves on the grid by more than `1e−12` relative.
pub fn zigzag_optimize_with<F: Fn(f64) -> Result<ZigzagEnergy>>(sigma: f64, e: F) -> Result<ZigzagOptimum> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let grid = e(0.0)?;
    let (d, _) = golden_section(|d| e(d).map_or(f64::INFINITY, |v| v.cell), 0.0, sigma / 2.0 - 1e-12 * sigma, 1e-9 * sigma);
    let cand = e(d)?;
    if cand.cell < grid.cell * (1.0 - 1e-12) {
        Ok(ZigzagOptimum { delta: d, energy: cand, grid })
    } else {
        Ok(ZigzagOptimum { delta: 0.0, energy: grid, grid })
    }
}

/// Optimal overlap for the closed-form cubic zig-zag.
pub fn zigzag_optimize(sigma: f64, mat: &MaterialCubic) -> Result<ZigzagOptimum> {
    zigzag_optimize_with(sigma, |d| zigzag_energy(&ZigzagConfig { sigma, delta: d, mat: *mat }))
}

fn bisect_onset<F: Fn(f64) -> Result<bool>>(mut lo: f64, mut hi: f64, tol: f64, active: F) -> Result<f64> {
    if active(lo)? || !active(hi)? {
        return Err(Error::Domain(format!("zig-zag onset is not bracketed by [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if active(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest `η` in `[lo, hi]` for which the optimal overlap is positive.
pub fn eta_threshold(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect_onset(lo, hi, tol, |eta| {
        let mat = MaterialCubic::normalized(MaterialCubic::nu_from_eta(eta))?;
        Ok(zigzag_optimize(1.0, &mat)?.delta > 0.0)
    })
}

/// Smallest Poisson ratio in `[lo, hi]` for which the optimal overlap is positive.
pub fn nu_threshold(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect_onset(lo, hi, tol, |nu| Ok(zigzag_optimize(1.0, &MaterialCubic::normalized(nu)?)?.delta > 0.0))
}

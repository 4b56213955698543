//! Real-space evaluation of the elastic double integral, split at a radius `ρ`.

use std::f64::consts::PI;

use serde::Serialize;

use super::energy::PhaseFieldConfig;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::kernel::KernelOnCircle;

/// Components of the real-space elastic energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearFar {
    /// Lattice sum over `0 < |z| < ρ`.
    pub near: f64,
    /// Lattice sum over `ρ ≤ |z| < R` over periodic images, plus the tail beyond `R`.
    pub far: f64,
    /// Estimate of the excluded self cell from a linearization of `u` (not part of near/far).
    pub self_cell: f64,
    /// Discretization tolerance for `near + far` against the spectral energy.
    pub tolerance: f64,
    /// Truncation radius `R` of the image sum.
    pub cutoff: f64,
}

const MAX_DIRECT: usize = 128;

/// `D(j) = h² Σ_x (u(x) − u(x+jh)) ⊗ (u(x) − u(x+jh))`, row-major `N×N` per offset.
fn autocorrelation(g: &TorusGrid) -> Vec<f64> {
    let (m, n, h) = (g.size(), g.dim(), g.spacing());
    let u = g.values();
    let mut d = vec![0.0; m * m * n * n];
    let mut diff = vec![0.0; n];
    for j2 in 0..m {
        for j1 in 0..m {
            let out = &mut d[(j2 * m + j1) * n * n..(j2 * m + j1 + 1) * n * n];
            for i2 in 0..m {
                let k2 = (i2 + j2) % m;
                for i1 in 0..m {
                    let k1 = (i1 + j1) % m;
                    let a = (i2 * m + i1) * n;
                    let b = (k2 * m + k1) * n;
                    for c in 0..n {
                        diff[c] = u[a + c] - u[b + c];
                    }
                    for p in 0..n {
                        for q in 0..n {
                            out[p * n + q] += diff[p] * diff[q];
                        }
                    }
                }
            }
            for v in out.iter_mut() {
                *v *= h * h;
            }
        }
    }
    d
}

fn contract(k: &[f64], d: &[f64]) -> f64 {
    k.iter().zip(d).map(|(a, b)| a * b).sum()
}

/// Split the elastic double integral `∫∫Γ(z)(u(x)−u(x+z))·(u(x)−u(x+z))` with
/// the `−3`-homogeneous kernel into `|z| < ρ` and `|z| ≥ ρ`, by direct
/// summation over lattice offsets (self cell excluded).
pub fn near_far_split(g: &TorusGrid, cfg: &PhaseFieldConfig, rho: f64) -> Result<NearFar> {
    let (m, n, h, l) = (g.size(), g.dim(), g.spacing(), g.period());
    if m > MAX_DIRECT {
        return Err(Error::DeskScale(m));
    }
    if !(rho > 0.0 && rho < l / 2.0) {
        return Err(Error::Domain(format!("rho must lie in (0, L/2), got {rho}")));
    }
    let k: &KernelOnCircle = &cfg.kernel;
    if k.dim() != n {
        return Err(Error::Domain(format!("kernel has N = {}, grid has N = {n}", k.dim())));
    }
    let d = autocorrelation(g);
    let nn = n * n;

    let cutoff = 4.0 * l;
    let jmax = (cutoff / h).ceil() as i64;
    let mut gam = vec![0.0; nn];
    let (mut near, mut far) = (0.0, 0.0);
    for j2 in -jmax..=jmax {
        for j1 in -jmax..=jmax {
            if j1 == 0 && j2 == 0 {
                continue;
            }
            let z = [j1 as f64 * h, j2 as f64 * h];
            let r = z[0].hypot(z[1]);
            if r >= cutoff {
                continue;
            }
            k.eval_into([z[0] / r, z[1] / r], &mut gam);
            let idx = (j2.rem_euclid(m as i64) as usize * m + j1.rem_euclid(m as i64) as usize) * nn;
            let v = h * h * contract(&gam, &d[idx..idx + nn]) / (r * r * r);
            if r < rho {
                near += v;
            } else {
                far += v;
            }
        }
    }

    // beyond the cutoff D is replaced by its torus average
    let mut dbar = vec![0.0; nn];
    for chunk in d.chunks(nn) {
        for (a, b) in dbar.iter_mut().zip(chunk) {
            *a += b / (m * m) as f64;
        }
    }
    let n_ang = 720;
    let mut circ = vec![0.0; nn];
    let mut ang = vec![0.0; 4 * nn];
    for j in 0..n_ang {
        let t = 2.0 * PI * j as f64 / n_ang as f64;
        let w = [t.cos(), t.sin()];
        k.eval_into(w, &mut gam);
        for c in 0..nn {
            circ[c] += gam[c] * 2.0 * PI / n_ang as f64;
            for p in 0..2 {
                for q in 0..2 {
                    ang[(p * 2 + q) * nn + c] += w[p] * w[q] * gam[c] * 2.0 * PI / n_ang as f64;
                }
            }
        }
    }
    let tail = contract(&circ, &dbar) / cutoff;
    far += tail;

    // self cell: disc of area h², u linearized by central differences
    let a = h / PI.sqrt();
    let u = g.values();
    let mut self_cell = 0.0;
    let mut grad = vec![[0.0; 2]; n];
    for i2 in 0..m {
        for i1 in 0..m {
            let at = |a1: usize, a2: usize, c: usize| u[(a2 * m + a1) * n + c];
            for (c, gr) in grad.iter_mut().enumerate() {
                gr[0] = (at((i1 + 1) % m, i2, c) - at((i1 + m - 1) % m, i2, c)) / (2.0 * h);
                gr[1] = (at(i1, (i2 + 1) % m, c) - at(i1, (i2 + m - 1) % m, c)) / (2.0 * h);
            }
            for p in 0..2 {
                for q in 0..2 {
                    for ci in 0..n {
                        for cj in 0..n {
                            self_cell += h * h * a * grad[ci][p] * grad[cj][q] * ang[(p * 2 + q) * nn + ci * n + cj];
                        }
                    }
                }
            }
        }
    }
    Ok(NearFar { near, far, self_cell, tolerance: self_cell.abs() + tail.abs(), cutoff })
}

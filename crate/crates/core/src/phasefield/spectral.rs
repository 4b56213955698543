//! Spectral evaluation of the nonlocal elastic term on the torus.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::TorusGrid;
use crate::error::Result;
use crate::kernel::{kernel_positivity, AngularTable, KernelOnCircle};
use crate::linetension::prelog_matrix;

/// Angular part of the Fourier symbol of the real-space kernel `Γ`.
///
/// `2∫Γ(z)(1 − cos ξ·z)dz = π|ξ| Q(ξ/|ξ|)` where `Q(n)` is the prelog matrix
/// (`ψ₀(b,n) = bᵀQ(n)b`); this returns `ω ↦ πQ(ω)`, so that feeding it to
/// [`crate::kernel::spectral_multiplier`] gives the exact multiplier of the
/// real-space double integral. For the cubic kernel it is `(μ/4)(I + η ωωᵀ)`;
/// other kernels are tabulated at 720 directions.
pub fn fourier_symbol(k: &KernelOnCircle) -> Result<KernelOnCircle> {
    if let Some(mat) = k.material() {
        let c = mat.mu / 4.0;
        let eta = mat.eta();
        return Ok(KernelOnCircle::from_fn(2, move |w, out| {
            out[0] = c * (1.0 + eta * w[0] * w[0]);
            out[1] = c * eta * w[0] * w[1];
            out[2] = out[1];
            out[3] = c * (1.0 + eta * w[1] * w[1]);
        }));
    }
    kernel_positivity(k, 32)?;
    let angles: Vec<f64> = (0..720).map(|j| 2.0 * PI * j as f64 / 720.0).collect();
    let mut mats = Vec::with_capacity(720);
    for &t in &angles {
        let q = prelog_matrix(k, [t.cos(), t.sin()], 1e-10)?;
        mats.push(PI * 0.5 * (&q + q.transpose()));
    }
    Ok(KernelOnCircle::from_table(AngularTable::new(angles, mats)?))
}

struct Plan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plan {
    fn new(m: usize) -> Self {
        let mut p = FftPlanner::new();
        Self { fwd: p.plan_fft_forward(m), inv: p.plan_fft_inverse(m) }
    }
}

fn transpose(a: &[Complex64], b: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in 0..m {
            b[j * m + i] = a[i * m + j];
        }
    }
}

/// Unnormalized 2-D transform of an `M×M` row-major array.
fn fft2(buf: &mut [Complex64], tmp: &mut [Complex64], m: usize, fft: &Arc<dyn Fft<f64>>) {
    fft.process(buf);
    transpose(buf, tmp, m);
    fft.process(tmp);
    transpose(tmp, buf, m);
}

/// Signed frequency index: `{0..M/2}` then `{−M/2+1..−1}`.
fn freq(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Transforms of each component, `û_c = (L/M²)·DFT(u_c)` (Parseval: `Σ|û|² = ∫|u|²`).
fn transforms(g: &TorusGrid, plan: &Plan) -> Vec<Vec<Complex64>> {
    let (m, n) = (g.size(), g.dim());
    let c = g.period() / (m * m) as f64;
    let mut tmp = vec![Complex64::default(); m * m];
    (0..n)
        .map(|comp| {
            let mut buf: Vec<Complex64> = g.values().chunks(n).map(|v| Complex64::new(v[comp], 0.0)).collect();
            fft2(&mut buf, &mut tmp, m, &plan.fwd);
            for z in buf.iter_mut() {
                *z *= c;
            }
            buf
        })
        .collect()
}

/// Apply `|ξ|S(ξ/|ξ|)` to the transforms in place; returns `Σ conj(û)ᵀ|ξ|S û`.
fn apply_symbol(uh: &mut [Vec<Complex64>], m: usize, l: f64, symbol: &KernelOnCircle) -> f64 {
    let n = uh.len();
    let mut s = vec![0.0; n * n];
    let mut v = vec![Complex64::default(); n];
    let mut energy = 0.0;
    for j2 in 0..m {
        for j1 in 0..m {
            let idx = j2 * m + j1;
            let xi = [2.0 * PI * freq(j1, m) as f64 / l, 2.0 * PI * freq(j2, m) as f64 / l];
            let r = xi[0].hypot(xi[1]);
            if r == 0.0 {
                for u in uh.iter_mut() {
                    u[idx] = Complex64::default();
                }
                continue;
            }
            symbol.eval_into([xi[0] / r, xi[1] / r], &mut s);
            for a in 0..n {
                v[a] = (0..n).map(|b| uh[b][idx] * (r * s[a * n + b])).sum();
            }
            for a in 0..n {
                energy += (uh[a][idx].conj() * v[a]).re;
                uh[a][idx] = v[a];
            }
        }
    }
    energy
}

/// `Σ_{ξ≠0} conj(û(ξ))·|ξ|S(ξ/|ξ|)·û(ξ)` over `ξ = 2πk/L`, `k ∈ {−M/2+1..M/2}²`.
///
/// `symbol` is the angular part of the multiplier; use [`fourier_symbol`] of
/// a kernel to evaluate the real-space elastic energy of that kernel.
pub fn elastic_energy_spectral(g: &TorusGrid, symbol: &KernelOnCircle) -> f64 {
    let plan = Plan::new(g.size());
    let mut uh = transforms(g, &plan);
    apply_symbol(&mut uh, g.size(), g.period(), symbol)
}

/// Elastic energy and its gradient with respect to the grid values.
pub fn elastic_energy_and_gradient(g: &TorusGrid, symbol: &KernelOnCircle) -> (f64, Vec<f64>) {
    let (m, n) = (g.size(), g.dim());
    let plan = Plan::new(m);
    let mut uh = transforms(g, &plan);
    let energy = apply_symbol(&mut uh, m, g.period(), symbol);
    let c = g.period() / (m * m) as f64;
    let mut grad = vec![0.0; m * m * n];
    let mut tmp = vec![Complex64::default(); m * m];
    for (comp, buf) in uh.iter_mut().enumerate() {
        fft2(buf, &mut tmp, m, &plan.inv);
        for (k, z) in buf.iter().enumerate() {
            grad[k * n + comp] = 2.0 * c * z.re;
        }
    }
    (energy, grad)
}

/// The multiplier as a dense matrix at one frequency (diagnostics).
pub fn symbol_matrix(symbol: &KernelOnCircle, xi: [f64; 2]) -> DMatrix<f64> {
    crate::kernel::spectral_multiplier(xi, symbol)
}

//! Upper bound for the cell-problem density `g(A)` over a library of constructions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use super::network::{periodic_network_energy, periodic_network_optimize, PeriodicNetworkTopology};
use super::zigzag::{zigzag_optimize_with, ZigzagEnergy};
use super::{AffineSlip, WallDensity};
use crate::error::Result;

/// `ψ∞(Ae₁, e₁) + ψ∞(Ae₂, e₂)`: vertical and horizontal wall families.
pub fn grid_energy<D: WallDensity + ?Sized>(a: &AffineSlip, density: &D) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let wall = |b: Vec<f64>, n: [f64; 2]| if b.iter().all(|&x| x == 0.0) { 0.0 } else { density.psi(&b, n) };
    wall(a.column(0), [1.0, 0.0]) + wall(a.column(1), [0.0, 1.0])
}

#[derive(Debug, Clone)]
pub struct GUpperParams {
    /// Wall normals on the half circle for one- and two-family laminates.
    pub laminate_normals: usize,
    /// Wall normals for three-family laminates.
    pub triple_normals: usize,
    pub zigzag: bool,
    /// Let the zig-zag composite leave the 45° direction.
    pub zigzag_free_angle: bool,
    pub topologies: Vec<PeriodicNetworkTopology>,
    pub iters: usize,
}

impl Default for GUpperParams {
    fn default() -> Self {
        Self { laminate_normals: 180, triple_normals: 36, zigzag: true, zigzag_free_angle: false, topologies: Vec::new(), iters: 2000 }
    }
}

/// `A = Σ b_k ⊗ m_k`: parallel walls with normal `m_k` carrying `b_k` per unit length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Laminate {
    pub terms: Vec<(Vec<f64>, [f64; 2])>,
}

impl Laminate {
    pub fn energy<D: WallDensity + ?Sized>(&self, density: &D) -> f64 {
        self.terms
            .iter()
            .map(|(b, m)| if b.iter().all(|&x| x == 0.0) { 0.0 } else { density.psi(b, *m) })
            .sum()
    }

    pub fn matrix(&self, dim: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(dim, 2);
        for (b, m) in &self.terms {
            for i in 0..dim {
                a[(i, 0)] += b[i] * m[0];
                a[(i, 1)] += b[i] * m[1];
            }
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GWitness {
    Zero,
    Grid,
    Laminate(Laminate),
    Zigzag { delta: f64, mirrored: bool, positions: Vec<[f64; 2]> },
    Topology { index: usize, positions: Vec<[f64; 2]> },
}

fn normal(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

/// Least-norm `B` with `B Mᵀ = A` for the normals `ms` (columns of `M`).
fn laminate(a: &DMatrix<f64>, ms: &[[f64; 2]]) -> Option<Laminate> {
    let k = ms.len();
    let m = DMatrix::from_fn(2, k, |i, j| ms[j][i]);
    let g = &m * m.transpose();
    let gi = Matrix2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    if gi.determinant().abs() < 1e-10 {
        return None;
    }
    let gi = gi.try_inverse()?;
    let gi = DMatrix::from_column_slice(2, 2, gi.as_slice());
    let b = a * gi * &m;
    Some(Laminate { terms: (0..k).map(|j| (b.column(j).iter().copied().collect(), ms[j])).collect() })
}

/// The least energy per unit area over the construction library, with the
/// construction that attains it. Always at most [`grid_energy`].
pub fn g_upper<D: WallDensity + ?Sized>(a: &AffineSlip, density: &D, params: &GUpperParams) -> Result<(f64, GWitness)> {
    if a.is_zero() {
        return Ok((0.0, GWitness::Zero));
    }
    let am = a.matrix();
    let dim = a.dim();
    let mut best = grid_energy(a, density);
    let mut witness = GWitness::Grid;
    let mut offer = |v: f64, w: &dyn Fn() -> GWitness| {
        if v < best * (1.0 - 1e-14) {
            best = v;
            witness = w();
        }
    };

    // single wall family, exactly when A has rank one
    let svd = am.clone().svd(false, true);
    let sv = &svd.singular_values;
    if sv.len() > 1 && sv[1] <= 1e-12 * sv[0] {
        let vt = svd.v_t.as_ref().expect("requested right singular vectors");
        let m = [vt[(0, 0)], vt[(0, 1)]];
        let lam = Laminate { terms: vec![(a.apply(m), m)] };
        let v = lam.energy(density);
        offer(v, &|| GWitness::Laminate(lam.clone()));
    }

    let k2 = params.laminate_normals;
    let ns: Vec<[f64; 2]> = (0..k2).map(|i| normal(PI * i as f64 / k2 as f64)).collect();
    for i in 0..k2 {
        for j in i + 1..k2 {
            if let Some(lam) = laminate(&am, &[ns[i], ns[j]]) {
                let v = lam.energy(density);
                offer(v, &|| GWitness::Laminate(lam.clone()));
            }
        }
    }
    let k3 = params.triple_normals;
    let ns: Vec<[f64; 2]> = (0..k3).map(|i| normal(PI * i as f64 / k3 as f64)).collect();
    for i in 0..k3 {
        for j in i + 1..k3 {
            for k in j + 1..k3 {
                if let Some(lam) = laminate(&am, &[ns[i], ns[j], ns[k]]) {
                    let v = lam.energy(density);
                    offer(v, &|| GWitness::Laminate(lam.clone()));
                }
            }
        }
    }

    if params.zigzag {
        for mirrored in [false, true] {
            if params.zigzag_free_angle {
                let top = PeriodicNetworkTopology::zigzag(a, 0.1, mirrored, true)?;
                let out = periodic_network_optimize(&top, density, params.iters)?;
                offer(out.energy, &|| GWitness::Zigzag { delta: f64::NAN, mirrored, positions: out.positions.clone() });
            } else {
                let e = |d: f64| -> Result<ZigzagEnergy> {
                    let top = PeriodicNetworkTopology::zigzag(a, d, mirrored, false)?;
                    let v = periodic_network_energy(&top, &top.nodes, density);
                    Ok(ZigzagEnergy { cell: v, per_area: v })
                };
                let opt = zigzag_optimize_with(1.0, e)?;
                let top = PeriodicNetworkTopology::zigzag(a, opt.delta, mirrored, false)?;
                offer(opt.energy.per_area, &|| GWitness::Zigzag { delta: opt.delta, mirrored, positions: top.nodes.clone() });
            }
        }
    }

    for (index, top) in params.topologies.iter().enumerate() {
        let out = periodic_network_optimize(top, density, params.iters)?;
        offer(out.energy, &|| GWitness::Topology { index, positions: out.positions.clone() });
    }
    debug_assert!(dim > 0);
    Ok((best, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iso(b: &[f64], _n: [f64; 2]) -> f64 {
        b.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_slip() {
        let (v, w) = g_upper(&AffineSlip::zeros(2), &iso, &GUpperParams::default()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(w, GWitness::Zero);
        assert_eq!(grid_energy(&AffineSlip::zeros(2), &iso), 0.0);
    }

    #[test]
    fn laminate_reconstructs_a() {
        let a = AffineSlip::new(vec![[1.0, 2.0], [-0.5, 0.25], [0.3, 0.0]]).unwrap();
        let am = a.matrix();
        let ms = [normal(0.1), normal(1.0), normal(2.5)];
        let lam = laminate(&am, &ms).unwrap();
        assert!((lam.matrix(3) - &am).amax() < 1e-12);
        assert!(laminate(&am, &[normal(0.3), normal(0.3)]).is_none());
    }

    #[test]
    fn rank_one_is_a_single_family() {
        // isotropic density: a single wall family costs |b|, less than two families
        let m = normal(0.4321);
        let a = AffineSlip::new(vec![[2.0 * m[0], 2.0 * m[1]], [-m[0], -m[1]]]).unwrap();
        let (v, w) = g_upper(&a, &iso, &GUpperParams { zigzag: false, ..GUpperParams::default() }).unwrap();
        assert_relative_eq!(v, 5f64.sqrt(), max_relative = 1e-12);
        assert!(matches!(w, GWitness::Laminate(_)));
    }

    #[test]
    fn below_grid_and_homogeneous() {
        let p = GUpperParams { laminate_normals: 36, triple_normals: 12, ..GUpperParams::default() };
        let a = AffineSlip::new(vec![[0.7, -0.2], [0.4, 1.1]]).unwrap();
        let (v, _) = g_upper(&a, &iso, &p).unwrap();
        assert!(v <= grid_energy(&a, &iso) + 1e-15);
        let (v2, _) = g_upper(&a.scaled(2.0), &iso, &p).unwrap();
        assert_relative_eq!(v2, 2.0 * v, max_relative = 1e-9);
    }
}

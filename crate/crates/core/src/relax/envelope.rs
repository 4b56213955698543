//! One-homogeneous convex envelopes of line-energy densities (two-facet zig-zags).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linetension::{check_unit, quad_form, Prelog};

/// `Q(n)` sampled at `m_dirs` uniformly spaced directions on the full circle.
pub struct PrelogTable {
    prelog: Arc<dyn Prelog>,
    dirs: Vec<[f64; 2]>,
    mats: Vec<DMatrix<f64>>,
    q_min: f64,
}

impl std::fmt::Debug for PrelogTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PrelogTable(N={}, {} directions)", self.prelog.dim(), self.dirs.len())
    }
}

impl PrelogTable {
    pub fn new(prelog: Arc<dyn Prelog>, m_dirs: usize) -> Result<Self> {
        if m_dirs < 16 {
            return Err(Error::Domain(format!("need at least 16 directions, got {m_dirs}")));
        }
        let dirs: Vec<[f64; 2]> = (0..m_dirs)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m_dirs as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let mut mats: Vec<DMatrix<f64>> = Vec::with_capacity(m_dirs);
        for (j, &d) in dirs.iter().enumerate() {
            // Q is even in n, so the second half of an even-sized table is a copy
            if m_dirs.is_multiple_of(2) && j >= m_dirs / 2 {
                let m = mats[j - m_dirs / 2].clone();
                mats.push(m);
            } else {
                mats.push(prelog.matrix(d));
            }
        }
        let mut q_min = f64::INFINITY;
        for m in mats.iter().take(m_dirs.div_ceil(2)) {
            let e = SymmetricEigen::new(m.clone()).eigenvalues.min();
            if !(e > 0.0) {
                return Err(Error::InadmissibleKernel(format!("prelog matrix has eigenvalue {e:.3e}")));
            }
            q_min = q_min.min(e);
        }
        Ok(Self { prelog, dirs, mats, q_min })
    }

    pub fn prelog(&self) -> &Arc<dyn Prelog> {
        &self.prelog
    }

    pub fn dim(&self) -> usize {
        self.prelog.dim()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Slightly deflated minimum eigenvalue of `Q` over the table; a lower
    /// bound for `ψ₀(b, n)/|b|²` used for pruning.
    pub fn q_min(&self) -> f64 {
        0.999 * self.q_min
    }

    pub fn psi0(&self, b: &[f64], n: [f64; 2]) -> f64 {
        self.prelog.psi0(b, n)
    }
}

/// Two-facet replacement of a unit segment with normal `n`:
/// `lengths[0]·normals[0] + lengths[1]·normals[1] = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FacetWitness {
    pub normals: [[f64; 2]; 2],
    pub lengths: [f64; 2],
    /// Position along the hull edge; the facet share of the second normal.
    pub weight: f64,
    pub value: f64,
}

impl FacetWitness {
    fn straight(n: [f64; 2], value: f64) -> Self {
        Self { normals: [n, n], lengths: [1.0, 0.0], weight: 0.0, value }
    }

    /// `Σ lengths[k]·normals[k]`, which reproduces the segment normal.
    pub fn closure(&self) -> [f64; 2] {
        let [a, b] = self.normals;
        [
            self.lengths[0] * a[0] + self.lengths[1] * b[0],
            self.lengths[0] * a[1] + self.lengths[1] * b[1],
        ]
    }
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    angle: f64,
    q: [f64; 2],
    dir: [f64; 2],
    f: f64,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Convex hull (counter-clockwise, collinear points dropped).
fn convex_hull(mut pts: Vec<([f64; 2], usize)>) -> Vec<([f64; 2], usize)> {
    pts.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| cross([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut hull: Vec<([f64; 2], usize)> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && turn(hull[hull.len() - 2].0, hull[hull.len() - 1].0, p.0) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// The largest one-homogeneous convex function below `x ↦ |x|ψ₀(b, x/|x|)`.
///
/// Built from the convex hull of the sampled unit level set; evaluation takes
/// the smaller of the hull value and the exact density, so directions where
/// the density is already convex are reproduced exactly.
#[derive(Debug, Clone)]
pub struct FacetEnvelope {
    table: Arc<PrelogTable>,
    b: Vec<f64>,
    verts: Vec<Vertex>,
}

impl FacetEnvelope {
    pub fn new(b: &[f64], table: Arc<PrelogTable>) -> Result<Self> {
        if b.len() != table.dim() {
            return Err(Error::Domain(format!("Burgers vector has {} components, density has N = {}", b.len(), table.dim())));
        }
        let zero = b.iter().all(|&x| x == 0.0);
        let mut verts = Vec::new();
        if !zero {
            let pts: Vec<([f64; 2], usize)> = table
                .dirs
                .iter()
                .zip(&table.mats)
                .enumerate()
                .map(|(j, (d, m))| {
                    let f = quad_form(m, b);
                    ([d[0] / f, d[1] / f], j)
                })
                .collect();
            for (q, j) in convex_hull(pts) {
                let d = table.dirs[j];
                verts.push(Vertex { angle: q[1].atan2(q[0]), q, dir: d, f: quad_form(&table.mats[j], b) });
            }
            verts.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        }
        Ok(Self { table, b: b.to_vec(), verts })
    }

    pub fn burgers(&self) -> &[f64] {
        &self.b
    }

    /// Number of hull vertices (facet directions that survive convexification).
    pub fn hull_size(&self) -> usize {
        self.verts.len()
    }

    /// Hull value and witness at the unit normal `n`, ignoring the exact density.
    pub fn hull_value(&self, n: [f64; 2]) -> FacetWitness {
        let k = self.verts.len();
        if k == 0 {
            return FacetWitness::straight(n, 0.0);
        }
        let phi = n[1].atan2(n[0]);
        let hi = self.verts.partition_point(|v| v.angle <= phi);
        let (a, b) = (self.verts[(hi + k - 1) % k], self.verts[hi % k]);
        let e = [b.q[0] - a.q[0], b.q[1] - a.q[1]];
        let ne = cross(n, e);
        let t = cross(a.q, e) / ne;
        let s = (cross(a.q, n) / ne).clamp(0.0, 1.0);
        let value = 1.0 / t;
        FacetWitness {
            normals: [a.dir, b.dir],
            lengths: [value * (1.0 - s) / a.f, value * s / b.f],
            weight: s,
            value,
        }
    }

    /// Envelope value and two-facet witness at the unit normal `n`.
    pub fn eval(&self, n: [f64; 2]) -> FacetWitness {
        if self.verts.is_empty() {
            return FacetWitness::straight(n, 0.0);
        }
        let hull = self.hull_value(n);
        let direct = self.table.psi0(&self.b, n);
        if direct <= hull.value {
            FacetWitness::straight(n, direct)
        } else {
            hull
        }
    }

    pub fn value(&self, n: [f64; 2]) -> f64 {
        self.eval(n).value
    }

    /// One-homogeneous extension `F**(x)` for any `x ∈ ℝ²`.
    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return 0.0;
        }
        r * self.value([x[0] / r, x[1] / r])
    }
}

/// Facet envelope of `b` under `prelog`, discretized with `m_dirs` directions.
pub fn facet_envelope(b: &[f64], prelog: Arc<dyn Prelog>, m_dirs: usize) -> Result<FacetEnvelope> {
    FacetEnvelope::new(b, Arc::new(PrelogTable::new(prelog, m_dirs)?))
}

/// Envelope value at a checked unit normal.
pub fn facet_envelope_value(env: &FacetEnvelope, n: [f64; 2]) -> Result<FacetWitness> {
    check_unit(n)?;
    Ok(env.eval(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MaterialCubic;
    use crate::linetension::CubicPrelog;
    use approx::assert_relative_eq;

    fn cubic(nu: f64) -> Arc<dyn Prelog> {
        Arc::new(CubicPrelog(MaterialCubic::normalized(nu).unwrap()))
    }

    fn unit(t: f64) -> [f64; 2] {
        [t.cos(), t.sin()]
    }

    #[test]
    fn coordinate_vectors_are_already_convex() {
        let p = cubic(1.0 / 3.0);
        let env = facet_envelope(&[1.0, 0.0], p.clone(), 720).unwrap();
        for j in 0..37 {
            let n = unit(0.123 + j as f64 * 0.17);
            assert_relative_eq!(env.value(n), p.psi0(&[1.0, 0.0], n), max_relative = 1e-14);
        }
    }

    #[test]
    fn isotropic_density_is_its_own_envelope() {
        let p = cubic(0.0);
        let env = facet_envelope(&[0.7, -1.3], p.clone(), 64).unwrap();
        for j in 0..20 {
            let n = unit(0.3 * j as f64);
            assert_relative_eq!(env.value(n), p.psi0(&[0.7, -1.3], n), max_relative = 1e-13);
        }
    }

    #[test]
    fn diagonal_vector_gains_at_edge_orientation() {
        // brute force over facet pairs: min ℓ_a F(a) + ℓ_b F(b) with ℓ_a a + ℓ_b b = n
        let p = cubic(1.0 / 3.0);
        let b = [1.0, 1.0];
        let env = facet_envelope(&b, p.clone(), 720).unwrap();
        let n = [1.0, 0.0];
        let m = 400;
        let mut best = p.psi0(&b, n);
        for i in 0..m {
            let ta = -PI / 2.0 + PI * i as f64 / m as f64;
            for j in 0..m {
                let tb = -PI / 2.0 + PI * j as f64 / m as f64;
                let (a, c) = (unit(ta), unit(tb));
                let det = cross(a, c);
                if det.abs() < 1e-9 {
                    continue;
                }
                let la = cross(n, c) / det;
                let lb = cross(a, n) / det;
                if la < 0.0 || lb < 0.0 {
                    continue;
                }
                best = best.min(la * p.psi0(&b, a) + lb * p.psi0(&b, c));
            }
        }
        let v = env.value(n);
        assert!(v <= p.psi0(&b, n) + 1e-14);
        assert!(v <= best + 1e-9, "hull {v} vs brute force {best}");
        assert!(v >= best - 1e-4, "hull {v} vs brute force {best}");
    }

    #[test]
    fn witness_closes_and_reproduces_value() {
        let p = cubic(0.45);
        let b = [2.0, -1.0];
        let env = facet_envelope(&b, p.clone(), 360).unwrap();
        for j in 0..50 {
            let n = unit(0.05 + 0.13 * j as f64);
            let w = env.eval(n);
            let c = w.closure();
            assert!((c[0] - n[0]).abs() < 1e-12 && (c[1] - n[1]).abs() < 1e-12);
            let e = w.lengths[0] * p.psi0(&b, w.normals[0]) + w.lengths[1] * p.psi0(&b, w.normals[1]);
            assert_relative_eq!(e, w.value, max_relative = 1e-12);
            assert!(w.lengths[0] >= 0.0 && w.lengths[1] >= 0.0);
        }
    }

    #[test]
    fn table_rejects_too_few_directions() {
        assert!(PrelogTable::new(cubic(0.3), 8).is_err());
    }
}

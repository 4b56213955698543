//! Asymptotic wall density `ψ∞` on real Burgers vectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::split::Relaxer;
use crate::linetension::Prelog;

struct Basis {
    parts: Vec<usize>,
    /// Left inverse of the column matrix of the parts.
    pinv: DMatrix<f64>,
    cols: DMatrix<f64>,
}

/// The one-homogeneous limit of many-part splittings: the least cost of
/// writing `b` as a nonnegative combination of relaxed integer parts,
/// `ψ∞(b, n) = min { Σ λ_k F**_{p_k}(n) : Σ λ_k p_k = b, λ ≥ 0 }`.
///
/// The minimum of this linear program sits on a vertex, so subsets of at most
/// `N` linearly independent parts are enumerated once and reused for every query.
pub struct AsymptoticDensity {
    relaxer: Arc<Relaxer>,
    parts: Vec<Vec<i64>>,
    bases: Vec<Basis>,
    box_bound: i64,
}

impl std::fmt::Debug for AsymptoticDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AsymptoticDensity(box {}, {} parts, {} bases)", self.box_bound, self.parts.len(), self.bases.len())
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl AsymptoticDensity {
    /// Parts range over nonzero integer vectors with `‖p‖∞ ≤ box_bound`.
    pub fn new(relaxer: Arc<Relaxer>, box_bound: i64) -> Self {
        let dim = relaxer.dim();
        let mut parts = Vec::new();
        let side = 2 * box_bound + 1;
        for code in 0..side.pow(dim as u32) {
            let mut c = code;
            let mut p = vec![0; dim];
            for x in p.iter_mut().rev() {
                *x = c % side - box_bound;
                c /= side;
            }
            if p.iter().any(|&x| x != 0) {
                parts.push(p);
            }
        }
        let mut bases = Vec::new();
        for k in 1..=dim {
            for s in subsets(parts.len(), k) {
                let cols = DMatrix::from_fn(dim, k, |i, j| parts[s[j]][i] as f64);
                let gram = cols.transpose() * &cols;
                if gram.determinant().abs() < 1e-9 {
                    continue;
                }
                let pinv = gram.try_inverse().expect("nonsingular Gram matrix") * cols.transpose();
                bases.push(Basis { parts: s, pinv, cols });
            }
        }
        Self { relaxer, parts, bases, box_bound }
    }

    /// Cubic-friendly default: parts with components in `{-2..2}`.
    pub fn with_default_box(relaxer: Arc<Relaxer>) -> Self {
        Self::new(relaxer, 2)
    }

    pub fn dim(&self) -> usize {
        self.relaxer.dim()
    }

    pub fn relaxer(&self) -> &Arc<Relaxer> {
        &self.relaxer
    }

    pub fn prelog(&self) -> &Arc<dyn Prelog> {
        self.relaxer.table().prelog()
    }

    /// Value and the active parts with their multiplicities per unit length.
    pub fn eval_with_witness(&self, b: &[f64], n: [f64; 2]) -> (f64, Vec<(Vec<i64>, f64)>) {
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return (0.0, Vec::new());
        }
        let costs: Vec<f64> = self.parts.iter().map(|p| self.relaxer.envelope(p).value(n)).collect();
        let bv = DVector::from_column_slice(b);
        let mut best = f64::INFINITY;
        let mut arg: Option<(usize, DVector<f64>)> = None;
        for (bi, basis) in self.bases.iter().enumerate() {
            let lam = &basis.pinv * &bv;
            if lam.iter().any(|&l| l < -1e-12 * scale) {
                continue;
            }
            if (&basis.cols * &lam - &bv).amax() > 1e-10 * scale {
                continue;
            }
            let v: f64 = basis.parts.iter().zip(lam.iter()).map(|(&p, &l)| l.max(0.0) * costs[p]).sum();
            if v < best * (1.0 - 1e-13) {
                best = v;
                arg = Some((bi, lam));
            }
        }
        let witness = arg
            .map(|(bi, lam)| {
                self.bases[bi]
                    .parts
                    .iter()
                    .zip(lam.iter())
                    .filter(|(_, &l)| l > 0.0)
                    .map(|(&p, &l)| (self.parts[p].clone(), l))
                    .collect()
            })
            .unwrap_or_default();
        (best, witness)
    }

    pub fn eval(&self, b: &[f64], n: [f64; 2]) -> f64 {
        self.eval_with_witness(b, n).0
    }
}

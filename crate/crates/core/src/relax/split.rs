//! Splitting into parallel partial dislocations, each relaxed by faceting.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::envelope::{FacetEnvelope, FacetWitness, PrelogTable};
use crate::error::{Error, Result};
use crate::linetension::{check_unit, BurgersVector, Prelog};

/// Search bounds for the splitting construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxParams {
    pub m_dirs: usize,
    /// Maximum number of parts; `None` means `max(4, ‖b‖₁)`.
    pub p_max: Option<usize>,
    /// Largest part component; `None` means `2‖b‖∞`.
    pub b_max: Option<i64>,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self { m_dirs: 720, p_max: None, b_max: None }
    }
}

impl RelaxParams {
    pub fn resolved_p_max(&self, b: &BurgersVector) -> usize {
        self.p_max.unwrap_or_else(|| 4.max(b.l1() as usize))
    }

    pub fn resolved_b_max(&self, b: &BurgersVector) -> i64 {
        self.b_max.unwrap_or(2 * b.max_abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPart {
    pub burgers: Vec<i64>,
    pub facets: FacetWitness,
}

/// A splitting `b = Σ parts` with one zig-zag per part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitDecomposition {
    pub target: Vec<i64>,
    pub normal: [f64; 2],
    pub value: f64,
    pub parts: Vec<SplitPart>,
}

impl SplitDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn part_sum(&self) -> Vec<i64> {
        let mut s = vec![0; self.target.len()];
        for p in &self.parts {
            for (a, b) in s.iter_mut().zip(&p.burgers) {
                *a += b;
            }
        }
        s
    }
}

/// Caches per-part facet envelopes for one density.
pub struct Relaxer {
    table: Arc<PrelogTable>,
    cache: Mutex<HashMap<Vec<i64>, Arc<FacetEnvelope>>>,
}

impl std::fmt::Debug for Relaxer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Relaxer({:?})", self.table)
    }
}

fn dist(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) * (x - y)) as f64).sum::<f64>().sqrt()
}

/// Integer vectors with `|p_i| ≤ bound`, `|p|² ≤ r2`, `p ≠ 0`, in lexicographic order.
fn lattice_ball(dim: usize, bound: i64, r2: f64) -> Vec<Vec<i64>> {
    fn rec(dim: usize, bound: i64, r2: f64, cur: &mut Vec<i64>, acc: f64, out: &mut Vec<Vec<i64>>) {
        if cur.len() == dim {
            if acc > 0.0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in -bound..=bound {
            let a = acc + (x * x) as f64;
            if a <= r2 {
                cur.push(x);
                rec(dim, bound, r2, cur, a, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(dim, bound, r2, &mut Vec::new(), 0.0, &mut out);
    out
}

#[derive(Clone)]
struct Entry {
    cost: f64,
    part: usize,
    prev: Vec<i64>,
}

impl Relaxer {
    pub fn new(prelog: Arc<dyn Prelog>, m_dirs: usize) -> Result<Self> {
        Ok(Self::from_table(Arc::new(PrelogTable::new(prelog, m_dirs)?)))
    }

    pub fn from_table(table: Arc<PrelogTable>) -> Self {
        Self { table, cache: Mutex::new(HashMap::new()) }
    }

    pub fn table(&self) -> &Arc<PrelogTable> {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// Facet envelope of an integer part (cached).
    pub fn envelope(&self, p: &[i64]) -> Arc<FacetEnvelope> {
        if let Some(e) = self.cache.lock().expect("cache lock").get(p) {
            return e.clone();
        }
        let bf: Vec<f64> = p.iter().map(|&x| x as f64).collect();
        let env = Arc::new(FacetEnvelope::new(&bf, self.table.clone()).expect("dimension checked by caller"));
        self.cache.lock().expect("cache lock").insert(p.to_vec(), env.clone());
        env
    }

    fn check(&self, b: &BurgersVector, n: [f64; 2]) -> Result<()> {
        check_unit(n)?;
        if b.dim() != self.dim() {
            return Err(Error::Domain(format!("Burgers vector has {} components, density has N = {}", b.dim(), self.dim())));
        }
        if b.is_zero() {
            return Err(Error::Domain("Burgers vector must be nonzero".into()));
        }
        Ok(())
    }

    /// Cheapest splitting of `b` into at most `p_max` nonzero integer parts with
    /// components bounded by `b_max`, each part relaxed by its facet envelope.
    pub fn split_search(&self, b: &BurgersVector, n: [f64; 2], p_max: usize, b_max: i64) -> Result<(f64, SplitDecomposition)> {
        self.check(b, n)?;
        if p_max == 0 {
            return Err(Error::Domain("P_max must be at least 1".into()));
        }
        if b_max < b.max_abs() {
            return Err(Error::Domain(format!("B_max = {b_max} is below ‖b‖∞ = {}", b.max_abs())));
        }
        let dim = self.dim();
        let target = &b.0;
        let q_min = self.table.q_min();

        // an achievable value used to prune the search
        let mut upper = self.envelope(target).value(n);
        if p_max as i64 >= b.l1() {
            let mut coord = 0.0;
            for (i, &c) in target.iter().enumerate() {
                if c != 0 {
                    let mut e = vec![0; dim];
                    e[i] = 1;
                    coord += c.unsigned_abs() as f64 * self.envelope(&e).value(n);
                }
            }
            upper = upper.min(coord);
        }
        let bound = upper * (1.0 + 1e-9);

        let parts = lattice_ball(dim, b_max, bound / q_min);
        let costs: Vec<f64> = parts.iter().map(|p| self.envelope(p).value(n)).collect();
        let levels = p_max.min((bound / q_min).floor().max(1.0) as usize);
        let box_radius = (levels as i64) * b_max;

        let mut layers: Vec<BTreeMap<Vec<i64>, Entry>> = vec![BTreeMap::new()];
        layers[0].insert(vec![0; dim], Entry { cost: 0.0, part: usize::MAX, prev: Vec::new() });
        let mut best: Option<(f64, usize)> = None;
        for l in 0..levels {
            let mut next: BTreeMap<Vec<i64>, Entry> = BTreeMap::new();
            for (c, entry) in &layers[l] {
                for (k, p) in parts.iter().enumerate() {
                    let cost = entry.cost + costs[k];
                    let c2: Vec<i64> = c.iter().zip(p).map(|(a, b)| a + b).collect();
                    if c2.iter().any(|x| x.abs() > box_radius) {
                        continue;
                    }
                    if cost + q_min * dist(&c2, target) > bound {
                        continue;
                    }
                    let better = match next.get(&c2) {
                        Some(e) => cost < e.cost * (1.0 - 1e-13),
                        None => true,
                    };
                    if better {
                        next.insert(c2, Entry { cost, part: k, prev: c.clone() });
                    }
                }
            }
            if let Some(e) = next.get(target) {
                if best.is_none_or(|(v, _)| e.cost < v * (1.0 - 1e-13)) {
                    best = Some((e.cost, l + 1));
                }
            }
            layers.push(next);
        }
        let (value, nparts) = best.ok_or_else(|| Error::NoConvergence("split search found no decomposition".into()))?;

        let mut chosen = Vec::with_capacity(nparts);
        let mut key = target.clone();
        for l in (1..=nparts).rev() {
            let e = &layers[l][&key];
            chosen.push(parts[e.part].clone());
            key = e.prev.clone();
        }
        chosen.sort();
        let parts = chosen
            .into_iter()
            .map(|p| {
                let facets = self.envelope(&p).eval(n);
                SplitPart { burgers: p, facets }
            })
            .collect();
        Ok((value, SplitDecomposition { target: target.clone(), normal: n, value, parts }))
    }

    pub fn psi_rel_upper_with_witness(&self, b: &BurgersVector, n: [f64; 2], params: &RelaxParams) -> Result<(f64, SplitDecomposition)> {
        self.split_search(b, n, params.resolved_p_max(b), params.resolved_b_max(b))
    }

    /// Certified upper bound for the relaxed line-tension density.
    pub fn psi_rel_upper(&self, b: &BurgersVector, n: [f64; 2], params: &RelaxParams) -> Result<f64> {
        self.psi_rel_upper_with_witness(b, n, params).map(|r| r.0)
    }

    /// `min_{1≤s≤S_max} ψ_rel(s·b, n)/s`.
    pub fn psi_infinity(&self, b: &BurgersVector, n: [f64; 2], s_max: usize, params: &RelaxParams) -> Result<f64> {
        self.check(b, n)?;
        if s_max == 0 {
            return Err(Error::Domain("S_max must be at least 1".into()));
        }
        let mut best = f64::INFINITY;
        for s in 1..=s_max {
            let v = self.psi_rel_upper(&b.scaled(s as i64), n, params)? / s as f64;
            best = best.min(v);
        }
        Ok(best)
    }
}

/// One-shot [`Relaxer::split_search`].
pub fn split_search(b: &BurgersVector, n: [f64; 2], prelog: Arc<dyn Prelog>, p_max: usize, b_max: i64) -> Result<(f64, SplitDecomposition)> {
    Relaxer::new(prelog, RelaxParams::default().m_dirs)?.split_search(b, n, p_max, b_max)
}

/// One-shot [`Relaxer::psi_rel_upper`].
pub fn psi_rel_upper(b: &BurgersVector, n: [f64; 2], prelog: Arc<dyn Prelog>, params: &RelaxParams) -> Result<f64> {
    Relaxer::new(prelog, params.m_dirs)?.psi_rel_upper(b, n, params)
}

/// One-shot [`Relaxer::psi_infinity`].
pub fn psi_infinity(b: &BurgersVector, n: [f64; 2], s_max: usize, prelog: Arc<dyn Prelog>, params: &RelaxParams) -> Result<f64> {
    Relaxer::new(prelog, params.m_dirs)?.psi_infinity(b, n, s_max, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MaterialCubic;
    use crate::linetension::CubicPrelog;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn relaxer(nu: f64) -> Relaxer {
        Relaxer::new(Arc::new(CubicPrelog(MaterialCubic::normalized(nu).unwrap())), 720).unwrap()
    }

    fn bv(v: &[i64]) -> BurgersVector {
        BurgersVector(v.to_vec())
    }

    #[test]
    fn multiples_of_coordinate_vectors() {
        let r = relaxer(1.0 / 3.0);
        let p = RelaxParams::default();
        for j in 0..5 {
            let t = 0.2 + PI * j as f64 / 5.0;
            let n = [t.cos(), t.sin()];
            let one = r.table().psi0(&[1.0, 0.0], n);
            let (v, w) = r.psi_rel_upper_with_witness(&bv(&[3, 0]), n, &p).unwrap();
            assert_relative_eq!(v, 3.0 * one, max_relative = 1e-12);
            assert_eq!(w.parts.len(), 3);
            assert_eq!(w.part_sum(), vec![3, 0]);
        }
    }

    #[test]
    fn diagonal_along_screw_direction() {
        let r = relaxer(1.0 / 3.0);
        let n = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        let v = r.psi_rel_upper(&bv(&[1, 1]), n, &RelaxParams::default()).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn single_part_is_the_envelope() {
        let r = relaxer(0.3);
        let n = [0.6, 0.8];
        let (v, w) = r.split_search(&bv(&[1, 0]), n, 1, 2).unwrap();
        assert_eq!(v, r.envelope(&[1, 0]).value(n));
        assert_eq!(w.parts.len(), 1);
    }

    #[test]
    fn rejects_zero_and_bad_bounds() {
        let r = relaxer(0.3);
        assert!(matches!(r.split_search(&bv(&[0, 0]), [1.0, 0.0], 4, 2), Err(Error::Domain(_))));
        assert!(r.split_search(&bv(&[3, 0]), [1.0, 0.0], 4, 2).is_err());
        assert!(r.psi_infinity(&bv(&[0, 0]), [1.0, 0.0], 2, &RelaxParams::default()).is_err());
    }

    #[test]
    fn witness_serializes() {
        let r = relaxer(1.0 / 3.0);
        let (_, w) = r.psi_rel_upper_with_witness(&bv(&[2, 1]), [1.0, 0.0], &RelaxParams::default()).unwrap();
        let json = w.to_json();
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["target"], serde_json::json!([2, 1]));
    }

    #[test]
    fn four_parts_cannot_reach_five_unit_lines() {
        let r = relaxer(1.0 / 3.0);
        let n = [1.0, 0.0];
        let restricted = RelaxParams { p_max: Some(4), ..RelaxParams::default() };
        let v4 = r.psi_rel_upper(&bv(&[5, 0]), n, &restricted).unwrap();
        let v = r.psi_rel_upper(&bv(&[5, 0]), n, &RelaxParams::default()).unwrap();
        assert_relative_eq!(v, 5.0 * 1.5, max_relative = 1e-12);
        assert!(v4 > v + 1.0);
    }
}

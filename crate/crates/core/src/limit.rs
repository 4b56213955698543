//! The limiting strain-gradient functionals: self-energy of piecewise affine
//! slip fields, the full limit energy on grids, and the change of basis to
//! physical slip coordinates.

use std::cell::RefCell;
use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cell::{g_upper, AffineSlip, GUpperParams, WallDensity};
use crate::error::{Error, Result};
use crate::kernel::KernelOnCircle;
use crate::phasefield::{elastic_energy_spectral, fourier_symbol, TorusGrid};
use crate::quadrature::integrate;

/// Energy density on `N×2` slip gradients.
pub trait SlipDensity {
    fn eval(&self, a: &AffineSlip) -> Result<f64>;
}

impl<F: Fn(&AffineSlip) -> f64> SlipDensity for F {
    fn eval(&self, a: &AffineSlip) -> Result<f64> {
        Ok(self(a))
    }
}

/// `g` taken as the best cell-problem upper bound over a wall density.
pub struct GUpperDensity<'a, D: WallDensity + ?Sized> {
    pub walls: &'a D,
    pub params: GUpperParams,
}

impl<D: WallDensity + ?Sized> SlipDensity for GUpperDensity<'_, D> {
    fn eval(&self, a: &AffineSlip) -> Result<f64> {
        g_upper(a, self.walls, &self.params).map(|(v, _)| v)
    }
}

/// One polygonal cell carrying `u(x) = A x + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipCell {
    /// Polygon vertices; orientation is normalized to counter-clockwise.
    pub vertices: Vec<[f64; 2]>,
    /// Rows of the `N×2` matrix `A`.
    pub slip: Vec<[f64; 2]>,
    pub offset: Vec<f64>,
}

impl SlipCell {
    pub fn gradient(&self) -> AffineSlip {
        AffineSlip::new(self.slip.clone()).expect("validated on construction")
    }

    pub fn value(&self, x: [f64; 2]) -> Vec<f64> {
        self.slip.iter().zip(&self.offset).map(|(r, d)| r[0] * x[0] + r[1] * x[1] + d).collect()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    fn contains(&self, x: [f64; 2]) -> bool {
        // crossing number; boundary points may go either way
        let v = &self.vertices;
        let mut inside = false;
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                if x[0] < a[0] + t * (b[0] - a[0]) {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for k in 0..v.len() {
        let (a, b) = (v[k], v[(k + 1) % v.len()]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// An interior edge shared by two cells, or a periodic pair of boundary edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharedEdge {
    pub cell: usize,
    pub edge: usize,
    pub neighbour: usize,
    pub neighbour_edge: usize,
    /// Period shift taking the edge onto the neighbour's copy.
    pub shift: [f64; 2],
}

/// A piecewise affine slip field on `[0, L₁] × [0, L₂]`, periodic along the
/// flagged axes. Edges on a non-periodic side carry no jump term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseAffineSlip {
    pub period: [f64; 2],
    pub periodic: [bool; 2],
    pub cells: Vec<SlipCell>,
    #[serde(skip)]
    edges: Vec<SharedEdge>,
}

impl PiecewiseAffineSlip {
    pub fn new(period: [f64; 2], periodic: [bool; 2], mut cells: Vec<SlipCell>) -> Result<Self> {
        if !(period[0] > 0.0 && period[1] > 0.0 && period.iter().all(|p| p.is_finite())) {
            return Err(Error::Domain(format!("periods must be positive, got {period:?}")));
        }
        let dim = cells.first().map(|c| c.slip.len()).ok_or_else(|| Error::Domain("no cells".into()))?;
        for (i, c) in cells.iter_mut().enumerate() {
            if c.vertices.len() < 3 {
                return Err(Error::Domain(format!("cell {i} has fewer than three vertices")));
            }
            if c.slip.len() != dim || c.offset.len() != dim || dim == 0 {
                return Err(Error::Domain(format!("cell {i}: slip and offset must have {dim} rows")));
            }
            if c.vertices.iter().flatten().chain(c.slip.iter().flatten()).chain(&c.offset).any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("cell {i} has non-finite data")));
            }
            let a = c.area();
            if a.abs() < 1e-14 * period[0] * period[1] {
                return Err(Error::Domain(format!("cell {i} is degenerate")));
            }
            if a < 0.0 {
                c.vertices.reverse();
            }
        }
        let total: f64 = cells.iter().map(|c| c.area()).sum();
        let box_area = period[0] * period[1];
        if (total - box_area).abs() > 1e-9 * box_area {
            return Err(Error::Domain(format!("cells cover area {total}, the box has {box_area}")));
        }
        let mut u = Self { period, periodic, cells, edges: Vec::new() };
        u.edges = u.match_edges()?;
        Ok(u)
    }

    /// Single cell covering the box with `u = A x + d`.
    pub fn affine(period: [f64; 2], periodic: [bool; 2], a: &AffineSlip, d: &[f64]) -> Result<Self> {
        let cell = SlipCell {
            vertices: vec![[0.0, 0.0], [period[0], 0.0], [period[0], period[1]], [0.0, period[1]]],
            slip: a.rows().to_vec(),
            offset: d.to_vec(),
        };
        Self::new(period, periodic, vec![cell])
    }

    /// `u(x) = A x` on `0 < x₁ < L/2` and `0` elsewhere, on the square of side
    /// `L`, periodic in `x₁` and open in `x₂`.
    pub fn half_strip(l: f64, a: &AffineSlip) -> Result<Self> {
        let strip = SlipCell {
            vertices: vec![[0.0, 0.0], [l / 2.0, 0.0], [l / 2.0, l], [0.0, l]],
            slip: a.rows().to_vec(),
            offset: vec![0.0; a.dim()],
        };
        let rest = SlipCell {
            vertices: vec![[l / 2.0, 0.0], [l, 0.0], [l, l], [l / 2.0, l]],
            slip: vec![[0.0; 2]; a.dim()],
            offset: vec![0.0; a.dim()],
        };
        Self::new([l, l], [true, false], vec![strip, rest])
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let raw: Self = serde_json::from_reader(r)?;
        Self::new(raw.period, raw.periodic, raw.cells)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.cells[0].slip.len()
    }

    pub fn edges(&self) -> &[SharedEdge] {
        &self.edges
    }

    /// `t·u`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.slip.iter_mut().flatten().for_each(|x| *x *= t);
            c.offset.iter_mut().for_each(|x| *x *= t);
        }
        out
    }

    fn edge(&self, c: usize, k: usize) -> ([f64; 2], [f64; 2]) {
        let v = &self.cells[c].vertices;
        (v[k], v[(k + 1) % v.len()])
    }

    fn match_edges(&self) -> Result<Vec<SharedEdge>> {
        let tol = 1e-9 * self.period[0].max(self.period[1]);
        let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;
        let mut shifts = vec![[0.0, 0.0]];
        for (s1, s2) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            if (s1 == 0.0 || self.periodic[0]) && (s2 == 0.0 || self.periodic[1]) {
                shifts.push([s1 * self.period[0], s2 * self.period[1]]);
            }
        }
        // hashed on quantized endpoints; the exhaustive scan below only runs
        // when rounding puts a matching pair in different buckets
        let quant = 1e-7 * self.period[0].max(self.period[1]);
        let key = |p: [f64; 2], q: [f64; 2]| {
            [p[0], p[1], q[0], q[1]].map(|x| (x / quant).round() as i64)
        };
        let mut index: HashMap<[i64; 4], Vec<(usize, usize)>> = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for k in 0..cell.vertices.len() {
                let (p, q) = self.edge(c, k);
                index.entry(key(p, q)).or_default().push((c, k));
            }
        }
        let mut out = Vec::new();
        for c in 0..self.cells.len() {
            for k in 0..self.cells[c].vertices.len() {
                let (a, b) = self.edge(c, k);
                let matches = |c2: usize, k2: usize, s: &[f64; 2]| {
                    let (p, q) = self.edge(c2, k2);
                    (c2, k2) != (c, k)
                        && close(a, [q[0] - s[0], q[1] - s[1]])
                        && close(b, [p[0] - s[0], p[1] - s[1]])
                };
                let mut found = shifts.iter().find_map(|s| {
                    let hits = index.get(&key([b[0] + s[0], b[1] + s[1]], [a[0] + s[0], a[1] + s[1]]))?;
                    hits.iter().find(|&&(c2, k2)| matches(c2, k2, s)).map(|&(c2, k2)| (c2, k2, *s))
                });
                if found.is_none() {
                    'search: for (c2, cell) in self.cells.iter().enumerate() {
                        for k2 in 0..cell.vertices.len() {
                            if let Some(s) = shifts.iter().find(|s| matches(c2, k2, s)) {
                                found = Some((c2, k2, *s));
                                break 'search;
                            }
                        }
                    }
                }
                match found {
                    Some((c2, k2, s)) => {
                        if (c, k) < (c2, k2) {
                            out.push(SharedEdge { cell: c, edge: k, neighbour: c2, neighbour_edge: k2, shift: s });
                        }
                    }
                    None => {
                        let on_open = |ax: usize| {
                            !self.periodic[ax]
                                && ((a[ax].abs() <= tol && b[ax].abs() <= tol)
                                    || ((a[ax] - self.period[ax]).abs() <= tol && (b[ax] - self.period[ax]).abs() <= tol))
                        };
                        if !(on_open(0) || on_open(1)) {
                            return Err(Error::Domain(format!(
                                "edge {k} of cell {c} has no conforming neighbour and is not on an open side"
                            )));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Index of a cell containing `x` (taken modulo the box).
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let y = [x[0].rem_euclid(self.period[0]), x[1].rem_euclid(self.period[1])];
        self.cells.iter().position(|c| c.contains(y))
    }

    pub fn value(&self, x: [f64; 2]) -> Option<Vec<f64>> {
        let y = [x[0].rem_euclid(self.period[0]), x[1].rem_euclid(self.period[1])];
        self.locate(y).map(|c| self.cells[c].value(y))
    }

    /// Gradients at the centres of an `m×m` grid of the box.
    pub fn sample_gradients(&self, m: usize) -> Result<GradientSamples> {
        let mut values = Vec::with_capacity(m * m);
        for i2 in 0..m {
            for i1 in 0..m {
                let x = [(i1 as f64 + 0.5) * self.period[0] / m as f64, (i2 as f64 + 0.5) * self.period[1] / m as f64];
                let c = self.locate(x).ok_or_else(|| Error::Domain(format!("no cell contains {x:?}")))?;
                values.push(self.cells[c].gradient());
            }
        }
        GradientSamples::new(self.period, m, values)
    }

    /// Cell-centred values on a square torus grid (requires `L₁ = L₂`).
    pub fn to_grid(&self, m: usize) -> Result<TorusGrid> {
        if (self.period[0] - self.period[1]).abs() > 1e-12 * self.period[0] {
            return Err(Error::Domain("grid sampling needs a square box".into()));
        }
        let m_f = m as f64;
        for i2 in 0..m {
            for i1 in 0..m {
                let x = [(i1 as f64 + 0.5) * self.period[0] / m_f, (i2 as f64 + 0.5) * self.period[1] / m_f];
                if self.locate(x).is_none() {
                    return Err(Error::Domain(format!("no cell contains {x:?}")));
                }
            }
        }
        TorusGrid::from_fn(self.period[0], m, self.dim(), |x| self.value(x).expect("located above"))
    }
}

/// Terms of the self-energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergy {
    pub bulk: f64,
    pub jump: f64,
    pub total: f64,
}

fn outer(v: &[f64], n: [f64; 2]) -> AffineSlip {
    AffineSlip::new(v.iter().map(|x| [x * n[0], x * n[1]]).collect()).expect("finite")
}

/// Reject densities that are not positively 1-homogeneous on the given samples.
pub fn check_homogeneous<G: SlipDensity + ?Sized>(g: &G, samples: &[AffineSlip]) -> Result<()> {
    for a in samples {
        let base = g.eval(a)?;
        for t in [0.5, 2.0, 3.7] {
            let v = g.eval(&a.scaled(t))?;
            if (v - t * base).abs() > 1e-8 * (t * base).abs() + 1e-12 {
                return Err(Error::InvalidDensity(format!(
                    "g(tA) = {v} differs from t·g(A) = {} at t = {t}",
                    t * base
                )));
            }
        }
    }
    Ok(())
}

/// `Σ area·g(A_c) + Σ_edges ∫ g([u] ⊗ n) ds`.
pub fn self_energy<G: SlipDensity + ?Sized>(u: &PiecewiseAffineSlip, g: &G) -> Result<SelfEnergy> {
    let mut samples: Vec<AffineSlip> = u.cells.iter().map(|c| c.gradient()).collect();
    let mut edge_data = Vec::with_capacity(u.edges.len());
    for e in &u.edges {
        let (a, b) = u.edge(e.cell, e.edge);
        let (t, len) = ([b[0] - a[0], b[1] - a[1]], (b[0] - a[0]).hypot(b[1] - a[1]));
        // outward normal of a counter-clockwise polygon
        let n = [t[1] / len, -t[0] / len];
        let here = &u.cells[e.cell];
        let there = &u.cells[e.neighbour];
        let jump_at = move |s: f64| -> Vec<f64> {
            let x = [a[0] + s * t[0], a[1] + s * t[1]];
            let y = [x[0] + e.shift[0], x[1] + e.shift[1]];
            there.value(y).iter().zip(here.value(x)).map(|(p, q)| p - q).collect()
        };
        for s in [0.0, 0.5, 1.0] {
            let j = jump_at(s);
            if j.iter().any(|x| *x != 0.0) {
                samples.push(outer(&j, n));
            }
        }
        edge_data.push((jump_at, n, len));
    }
    check_homogeneous(g, &samples)?;

    let mut bulk = 0.0;
    for c in &u.cells {
        let a = c.gradient();
        if !a.is_zero() {
            bulk += c.area() * g.eval(&a)?;
        }
    }
    let mut jump = 0.0;
    for (jump_at, n, len) in &edge_data {
        let (j0, j1) = (jump_at(0.0), jump_at(1.0));
        if j0.iter().chain(&j1).all(|x| *x == 0.0) {
            continue;
        }
        let failure = RefCell::new(None);
        let v = integrate(
            |s| {
                g.eval(&outer(&jump_at(s), *n)).unwrap_or_else(|err| {
                    failure.borrow_mut().get_or_insert(err);
                    0.0
                })
            },
            0.0,
            1.0,
            1e-12,
            1e-15,
        )?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        jump += len * v;
    }
    Ok(SelfEnergy { bulk, jump, total: bulk + jump })
}

/// Gradient samples on the centres of an `m×m` grid of `[0, L₁] × [0, L₂]`.
#[derive(Debug, Clone)]
pub struct GradientSamples {
    pub period: [f64; 2],
    pub m: usize,
    pub values: Vec<AffineSlip>,
}

impl GradientSamples {
    pub fn new(period: [f64; 2], m: usize, values: Vec<AffineSlip>) -> Result<Self> {
        if m == 0 || values.len() != m * m {
            return Err(Error::Domain(format!("expected {} gradient samples, got {}", m * m, values.len())));
        }
        Ok(Self { period, m, values })
    }

    pub fn from_fn<F: Fn([f64; 2]) -> AffineSlip>(period: [f64; 2], m: usize, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(m * m);
        for i2 in 0..m {
            for i1 in 0..m {
                values.push(f([(i1 as f64 + 0.5) * period[0] / m as f64, (i2 as f64 + 0.5) * period[1] / m as f64]));
            }
        }
        Self::new(period, m, values)
    }
}

/// Midpoint quadrature of `∫ g(∇u)` for a slip field without jumps.
pub fn network_bulk_energy<G: SlipDensity + ?Sized>(u: &GradientSamples, g: &G) -> Result<f64> {
    let w = u.period[0] * u.period[1] / (u.m * u.m) as f64;
    let mut total = 0.0;
    for a in &u.values {
        if !a.is_zero() {
            total += w * g.eval(a)?;
        }
    }
    Ok(total)
}

/// Terms of the discrete limit energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEnergy {
    /// `Σ h² g(∇u)` over increments below the jump threshold.
    pub bulk: f64,
    /// `Σ h g(Δu ⊗ e_k)` over increments above the threshold.
    pub jump: f64,
    pub elastic: f64,
    pub total: f64,
    /// The jump threshold `θ_J` on `|Δu|`.
    pub theta_j: f64,
    pub jump_count: usize,
}

/// Self-energy from forward differences plus the spectral elastic energy.
/// An increment counts as a jump when `|Δu| > θ_J = 10·h·median|∇u|`, the
/// median taken over grid points of the forward-difference gradient norm.
pub fn limit_energy<G: SlipDensity + ?Sized>(u: &TorusGrid, g: &G, kernel: &KernelOnCircle) -> Result<LimitEnergy> {
    let (m, n, h) = (u.size(), u.dim(), u.spacing());
    if kernel.dim() != n {
        return Err(Error::Domain(format!("kernel has N = {}, grid has N = {n}", kernel.dim())));
    }
    let inc = |i1: usize, i2: usize, axis: usize| -> Vec<f64> {
        let (j1, j2) = if axis == 0 { ((i1 + 1) % m, i2) } else { (i1, (i2 + 1) % m) };
        u.at(j1, j2).iter().zip(u.at(i1, i2)).map(|(a, b)| a - b).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut mags = Vec::with_capacity(m * m);
    for i2 in 0..m {
        for i1 in 0..m {
            let (d1, d2) = (inc(i1, i2, 0), inc(i1, i2, 1));
            mags.push((norm(&d1).powi(2) + norm(&d2).powi(2)).sqrt() / h);
        }
    }
    mags.sort_by(|a, b| a.total_cmp(b));
    let median = 0.5 * (mags[(mags.len() - 1) / 2] + mags[mags.len() / 2]);
    let theta_j = 10.0 * h * median;

    let (mut bulk, mut jump, mut jump_count) = (0.0, 0.0, 0);
    let mut grad = vec![[0.0; 2]; n];
    for i2 in 0..m {
        for i1 in 0..m {
            for axis in 0..2 {
                let d = inc(i1, i2, axis);
                if norm(&d) > theta_j {
                    let mut e = [0.0; 2];
                    e[axis] = 1.0;
                    jump += h * g.eval(&outer(&d, e))?;
                    jump_count += 1;
                    grad.iter_mut().for_each(|r| r[axis] = 0.0);
                } else {
                    for (r, x) in grad.iter_mut().zip(&d) {
                        r[axis] = x / h;
                    }
                }
            }
            let a = AffineSlip::new(grad.clone())?;
            if !a.is_zero() {
                bulk += h * h * g.eval(&a)?;
            }
        }
    }
    let elastic = elastic_energy_spectral(u, &fourier_symbol(kernel)?);
    Ok(LimitEnergy { bulk, jump, elastic, total: bulk + jump + elastic, theta_j, jump_count })
}

/// Slip directions `s_1..s_N` in the plane `ℝ²×{0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlipBasis {
    vectors: Vec<[f64; 3]>,
}

impl SlipBasis {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::DegenerateBasis("empty basis".into()));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("basis vectors must be finite".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v[2] != 0.0) {
            return Err(Error::DegenerateBasis(format!("{v:?} leaves the slip plane")));
        }
        let s = DMatrix::from_fn(2, vectors.len(), |i, j| vectors[j][i]);
        let sv = s.clone().svd(false, false).singular_values;
        let (hi, lo) = sv.iter().fold((0.0f64, f64::INFINITY), |(h, l), &x| (h.max(x), l.min(x)));
        if vectors.len() > 2 || lo <= 1e-12 * hi {
            return Err(Error::DegenerateBasis("slip vectors are linearly dependent".into()));
        }
        Ok(Self { vectors })
    }

    /// `s_i = e_i`, `i ≤ N`.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|i| { let mut v = [0.0; 3]; v[i] = 1.0; v }).collect())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(3, self.vectors.len(), |i, j| self.vectors[j][i])
    }

    /// `Σ_i s_i ⊗ C_i`, a `3×2` matrix.
    pub fn reconstruct(&self, c: &AffineSlip) -> Result<[[f64; 2]; 3]> {
        if c.dim() != self.dim() {
            return Err(Error::Domain(format!("expected {} rows, got {}", self.dim(), c.dim())));
        }
        let g = self.matrix() * c.matrix();
        Ok([[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]], [g[(2, 0)], g[(2, 1)]]])
    }
}

/// Coefficients `C` with `G = Σ_i s_i ⊗ C_i`.
pub fn basis_transform(g_phys: &[[f64; 2]; 3], basis: &SlipBasis) -> Result<AffineSlip> {
    let s = basis.matrix();
    let g = DMatrix::from_fn(3, 2, |i, j| g_phys[i][j]);
    let c = s.clone().svd(true, true).solve(&g, 1e-14).map_err(|e| Error::DegenerateBasis(e.to_string()))?;
    let resid = (&s * &c - &g).norm();
    if resid > 1e-10 * g.norm().max(1.0) {
        return Err(Error::OutOfSpan(format!("slip gradient leaves the span of the basis (residual {resid:.3e})")));
    }
    AffineSlip::from_matrix(&c)
}

/// `f(G) = g(C)` for physical slip gradients.
pub fn physical_density<G: SlipDensity + ?Sized>(g: &G, g_phys: &[[f64; 2]; 3], basis: &SlipBasis) -> Result<f64> {
    g.eval(&basis_transform(g_phys, basis)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MaterialCubic;

    fn frob(a: &AffineSlip) -> f64 {
        a.frobenius()
    }

    #[test]
    fn single_affine_cell() {
        let a = AffineSlip::new(vec![[0.3, -1.0], [2.0, 0.5]]).unwrap();
        let u = PiecewiseAffineSlip::affine([1.0, 1.0], [false, false], &a, &[0.0, 0.0]).unwrap();
        let e = self_energy(&u, &frob).unwrap();
        assert!((e.total - a.frobenius()).abs() < 1e-14);
        assert_eq!(e.jump, 0.0);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let u = PiecewiseAffineSlip::half_strip(2.0, &AffineSlip::zeros(2)).unwrap();
        assert_eq!(self_energy(&u, &frob).unwrap().total, 0.0);
    }

    #[test]
    fn half_strip_closed_form() {
        let a = AffineSlip::new(vec![[0.0, 1.0], [0.0, -2.0]]).unwrap();
        for l in [1.0, 2.0, 4.0] {
            let u = PiecewiseAffineSlip::half_strip(l, &a).unwrap();
            assert_eq!(u.edges().len(), 2);
            let e = self_energy(&u, &frob).unwrap();
            let jump = AffineSlip::new(vec![[1.0, 0.0], [-2.0, 0.0]]).unwrap();
            let expect = l * l / 2.0 * a.frobenius() + l * l * jump.frobenius();
            assert!((e.total - expect).abs() < 1e-12 * expect, "{} {}", e.total, expect);
        }
    }

    #[test]
    fn quadratic_density_is_rejected() {
        let u = PiecewiseAffineSlip::affine([1.0, 1.0], [true, true], &AffineSlip::diag(1.0, 1.0), &[0.0, 0.0]);
        let u = u.unwrap();
        let g = |a: &AffineSlip| a.frobenius().powi(2);
        assert!(matches!(self_energy(&u, &g), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn gaps_in_the_partition_are_rejected() {
        let cell = SlipCell { vertices: vec![[0.0, 0.0], [0.5, 0.0], [0.5, 1.0], [0.0, 1.0]], slip: vec![[0.0; 2]], offset: vec![0.0] };
        assert!(PiecewiseAffineSlip::new([1.0, 1.0], [true, true], vec![cell]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = AffineSlip::new(vec![[0.0, 1.5]]).unwrap();
        let u = PiecewiseAffineSlip::half_strip(1.0, &a).unwrap();
        let mut buf = Vec::new();
        u.write_json(&mut buf).unwrap();
        let v = PiecewiseAffineSlip::read_json(buf.as_slice()).unwrap();
        assert_eq!(v.cells, u.cells);
        assert_eq!(v.edges(), u.edges());
    }

    #[test]
    fn bulk_quadrature_of_constant_gradient() {
        let a = AffineSlip::diag(1.0, -1.0);
        let s = GradientSamples::from_fn([2.0, 2.0], 8, |_| a.clone()).unwrap();
        assert!((network_bulk_energy(&s, &frob).unwrap() - 4.0 * a.frobenius()).abs() < 1e-13);
        assert_eq!(network_bulk_energy(&s, &|_: &AffineSlip| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn limit_energy_of_zero_is_zero() {
        let k = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0).unwrap());
        let g = TorusGrid::zeros(1.0, 16, 2).unwrap();
        let e = limit_energy(&g, &frob, &k).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn limit_energy_splits_jumps_from_bulk() {
        let k = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0).unwrap());
        let a = AffineSlip::new(vec![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let u = PiecewiseAffineSlip::half_strip(1.0, &a).unwrap().to_grid(64).unwrap();
        let e = limit_energy(&u, &frob, &k).unwrap();
        // two vertical jump lines; the x2 seam also jumps on the periodic grid
        assert!(e.jump_count >= 128);
        assert!(e.theta_j >= 0.0);
        let t = limit_energy(&u.scaled(2.0), &frob, &k).unwrap();
        assert!((t.bulk + t.jump - 2.0 * (e.bulk + e.jump)).abs() < 1e-10);
        assert!((t.elastic - 4.0 * e.elastic).abs() < 1e-9 * t.elastic);
    }

    #[test]
    fn basis_transform_examples() {
        let id = SlipBasis::standard(2).unwrap();
        let g = [[1.0, 2.0], [3.0, 4.0], [0.0, 0.0]];
        assert_eq!(basis_transform(&g, &id).unwrap().rows(), &[[1.0, 2.0], [3.0, 4.0]]);
        let b = SlipBasis::new(vec![[2.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let c = basis_transform(&[[2.0, 0.0], [0.0, 0.0], [0.0, 0.0]], &b).unwrap();
        assert!((c.rows()[0][0] - 1.0).abs() < 1e-15 && c.rows()[1] == [0.0, 0.0]);
        assert!(matches!(SlipBasis::new(vec![[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]), Err(Error::DegenerateBasis(_))));
        let line = SlipBasis::new(vec![[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(basis_transform(&g, &line), Err(Error::OutOfSpan(_))));
    }
}

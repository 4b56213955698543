//! Fixed-topology periodic networks on the unit cell with movable nodes.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use super::{AffineSlip, WallDensity};
use crate::error::{Error, Result};
use crate::optimize::pattern_search;

/// A segment from `start` to `end + shift` (shift in whole periods).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicSegment {
    pub start: usize,
    pub end: usize,
    pub shift: [i64; 2],
    pub burgers: Vec<f64>,
}

/// A periodic network on `[0,1)²` whose walls carry the slip gradient `slip`.
///
/// The Burgers flux `Σ b ⊗ R(d)` over all segments, with `d` the segment
/// vector and `R(x) = (x₂, −x₁)`, must equal `A` (the cell has unit area); by
/// Frank's rule it does not depend on the node positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicNetworkTopology {
    pub nodes: Vec<[f64; 2]>,
    pub segments: Vec<PeriodicSegment>,
    pub slip: AffineSlip,
    /// Optional linear parametrization of node moves: the positions are
    /// `nodes + Σ t_k modes[k]`. Without modes every coordinate is free.
    pub modes: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkOptimum {
    /// Energy per unit area.
    pub energy: f64,
    pub positions: Vec<[f64; 2]>,
    /// Best energy after each pattern-search sweep (non-increasing).
    pub trace: Vec<f64>,
}

fn segment_vector(pos: &[[f64; 2]], s: &PeriodicSegment) -> [f64; 2] {
    let (p, q) = (pos[s.start], pos[s.end]);
    [q[0] + s.shift[0] as f64 - p[0], q[1] + s.shift[1] as f64 - p[1]]
}

impl PeriodicNetworkTopology {
    pub fn new(nodes: Vec<[f64; 2]>, segments: Vec<PeriodicSegment>, slip: AffineSlip) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if s.start >= nodes.len() || s.end >= nodes.len() {
                return Err(Error::InvalidNetwork(format!("segment {i} references a missing node")));
            }
            if s.burgers.len() != slip.dim() {
                return Err(Error::InvalidNetwork(format!("segment {i} has {} Burgers components, A has {} rows", s.burgers.len(), slip.dim())));
            }
        }
        Ok(Self { nodes, segments, slip, modes: None })
    }

    pub fn with_modes(mut self, modes: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        if modes.iter().any(|m| m.len() != self.nodes.len()) {
            return Err(Error::Domain("every mode needs one displacement per node".into()));
        }
        self.modes = Some(modes);
        Ok(self)
    }

    /// One node with a vertical wall carrying `Ae₁` and a horizontal wall carrying `−Ae₂`.
    pub fn grid(slip: &AffineSlip) -> Self {
        let segments = vec![
            PeriodicSegment { start: 0, end: 0, shift: [0, 1], burgers: slip.column(0) },
            PeriodicSegment { start: 0, end: 0, shift: [1, 0], burgers: slip.column(1).iter().map(|x| -x).collect() },
        ];
        Self { nodes: vec![[0.5, 0.5]], segments, slip: slip.clone(), modes: None }
    }

    /// The zig-zag: the two wall families of the grid overlap along a diagonal
    /// composite of horizontal projection `2δ`. `mirrored` runs the composite
    /// along `(1,−1)` instead of `(1,1)`. With `free_angle` both nodes move
    /// freely; otherwise only `δ` varies and the composite stays at 45°.
    pub fn zigzag(slip: &AffineSlip, delta: f64, mirrored: bool, free_angle: bool) -> Result<Self> {
        let c = 0.5;
        let sy = if mirrored { -1.0 } else { 1.0 };
        let nodes = vec![[c - delta, c - sy * delta], [c + delta, c + sy * delta]];
        let ys = if mirrored { -1 } else { 1 };
        let shape = [(0, 1, [0, 0], [1.0, 1.0]), (1, 0, [0, ys], [1.0, 0.0]), (1, 0, [1, 0], [0.0, 1.0])];
        // flux of the template in the abstract basis, then map onto A; by
        // Frank's rule it can be read off at coincident nodes, where it is exact
        let mut f = Matrix2::zeros();
        for &(_, _, sh, beta) in &shape {
            let d = [sh[0] as f64, sh[1] as f64];
            let r = [d[1], -d[0]];
            for i in 0..2 {
                for j in 0..2 {
                    f[(i, j)] += beta[i] * r[j];
                }
            }
        }
        let finv = f
            .try_inverse()
            .ok_or_else(|| Error::InfeasibleTopology(format!("zig-zag template is degenerate at delta = {delta}")))?;
        let a = slip.matrix();
        let t = &a * DMatrix::from_column_slice(2, 2, finv.as_slice());
        let segments = shape
            .iter()
            .map(|&(s, e, sh, beta)| PeriodicSegment {
                start: s,
                end: e,
                shift: sh,
                burgers: (0..slip.dim()).map(|i| t[(i, 0)] * beta[0] + t[(i, 1)] * beta[1]).collect(),
            })
            .collect();
        let top = Self::new(nodes, segments, slip.clone())?;
        if free_angle {
            Ok(top)
        } else {
            top.with_modes(vec![vec![[-1.0, -sy], [1.0, sy]]])
        }
    }

    pub fn n_params(&self) -> usize {
        self.modes.as_ref().map_or(2 * self.nodes.len(), |m| m.len())
    }

    pub fn positions(&self, params: &[f64]) -> Vec<[f64; 2]> {
        let mut pos = self.nodes.clone();
        match &self.modes {
            Some(modes) => {
                for (t, mode) in params.iter().zip(modes) {
                    for (p, m) in pos.iter_mut().zip(mode) {
                        p[0] += t * m[0];
                        p[1] += t * m[1];
                    }
                }
            }
            None => {
                for (i, p) in pos.iter_mut().enumerate() {
                    p[0] += params[2 * i];
                    p[1] += params[2 * i + 1];
                }
            }
        }
        pos
    }

    /// `Σ b ⊗ R(d)` at the given node positions.
    pub fn flux(&self, pos: &[[f64; 2]]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.slip.dim(), 2);
        for s in &self.segments {
            let d = segment_vector(pos, s);
            for (i, &b) in s.burgers.iter().enumerate() {
                m[(i, 0)] += b * d[1];
                m[(i, 1)] -= b * d[0];
            }
        }
        m
    }

    /// Burgers balance at every node and agreement of the flux with `A`.
    pub fn validate(&self) -> Result<()> {
        let dim = self.slip.dim();
        let scale = 1.0 + self.segments.iter().flat_map(|s| s.burgers.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        let mut bal = vec![vec![0.0; dim]; self.nodes.len()];
        for s in &self.segments {
            for k in 0..dim {
                bal[s.end][k] += s.burgers[k];
                bal[s.start][k] -= s.burgers[k];
            }
        }
        if let Some(i) = bal.iter().position(|b| b.iter().any(|x| x.abs() > 1e-9 * scale)) {
            return Err(Error::InfeasibleTopology(format!("Burgers vectors are not balanced at node {i}")));
        }
        let diff = (self.flux(&self.nodes) - self.slip.matrix()).amax();
        if diff > 1e-9 * scale {
            return Err(Error::InfeasibleTopology(format!("cut fluxes differ from A by {diff:.3e}")));
        }
        Ok(())
    }
}

/// Energy per unit area `Σ |d| ψ(b, R(d)/|d|)` of the network at `pos`.
pub fn periodic_network_energy<D: WallDensity + ?Sized>(top: &PeriodicNetworkTopology, pos: &[[f64; 2]], density: &D) -> f64 {
    top.segments
        .iter()
        .map(|s| {
            let d = segment_vector(pos, s);
            let len = d[0].hypot(d[1]);
            if len == 0.0 || s.burgers.iter().all(|&x| x == 0.0) {
                0.0
            } else {
                len * density.psi(&s.burgers, [d[1] / len, -d[0] / len])
            }
        })
        .sum()
}

/// Pattern search over node positions: initial step 1/8 of the cell, halved
/// on failure, stopping at `1e−6` or after `iters` sweeps.
pub fn periodic_network_optimize<D: WallDensity + ?Sized>(top: &PeriodicNetworkTopology, density: &D, iters: usize) -> Result<NetworkOptimum> {
    top.validate()?;
    let x0 = vec![0.0; top.n_params()];
    let out = pattern_search(|t| periodic_network_energy(top, &top.positions(t), density), &x0, 0.125, 1e-6, iters);
    Ok(NetworkOptimum { energy: out.value, positions: top.positions(&out.x), trace: out.trace })
}

//! Prelogarithmic line-tension factor and unrelaxed network energies.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{kernel_positivity, KernelOnCircle, MaterialCubic};
use crate::quadrature::{integrate, integrate_dyn};

/// Integer Burgers vector in the coordinates of the slip-lattice basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BurgersVector(pub Vec<i64>);

impl BurgersVector {
    pub fn new(components: Vec<i64>) -> Self {
        Self(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    pub fn scaled(&self, s: i64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1)
    }
}

impl From<Vec<i64>> for BurgersVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

pub(crate) fn check_unit(n: [f64; 2]) -> Result<()> {
    let r = n[0].hypot(n[1]);
    if (r - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("normal must be a unit vector, |n| = {r}")));
    }
    Ok(())
}

pub(crate) fn quad_form(q: &DMatrix<f64>, b: &[f64]) -> f64 {
    let n = b.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += b[i] * q[(i, j)] * b[j];
        }
    }
    s
}

/// Anything that provides the prelogarithmic factor `ψ₀(b, n) = bᵀ Q(n) b`.
pub trait Prelog: Send + Sync {
    fn dim(&self) -> usize;

    /// The matrix `Q(n)` with `ψ₀(b, n) = bᵀQ(n)b`; `n` is a unit normal.
    fn matrix(&self, n: [f64; 2]) -> DMatrix<f64>;

    fn psi0(&self, b: &[f64], n: [f64; 2]) -> f64 {
        quad_form(&self.matrix(n), b)
    }

    /// Energy unit reported alongside results (`μ/4π` for cubic materials).
    fn energy_unit(&self) -> f64 {
        1.0
    }
}

/// Closed-form prelogarithmic factor of an isotropic cubic crystal,
/// `(μ/4π)(|b|² + η (b·n)²)`.
#[derive(Debug, Clone, Copy)]
pub struct CubicPrelog(pub MaterialCubic);

impl Prelog for CubicPrelog {
    fn dim(&self) -> usize {
        2
    }

    fn matrix(&self, n: [f64; 2]) -> DMatrix<f64> {
        let c = self.0.mu_over_4pi();
        let eta = self.0.eta();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                c * (1.0 + eta * n[0] * n[0]),
                c * eta * n[0] * n[1],
                c * eta * n[0] * n[1],
                c * (1.0 + eta * n[1] * n[1]),
            ],
        )
    }

    fn psi0(&self, b: &[f64], n: [f64; 2]) -> f64 {
        let bn = b[0] * n[0] + b[1] * n[1];
        self.0.mu_over_4pi() * (b[0] * b[0] + b[1] * b[1] + self.0.eta() * bn * bn)
    }

    fn energy_unit(&self) -> f64 {
        self.0.mu_over_4pi()
    }
}

/// Prelogarithmic factor of an arbitrary kernel by quadrature of its angular part.
#[derive(Debug, Clone)]
pub struct KernelPrelog {
    pub kernel: KernelOnCircle,
    pub tol: f64,
}

impl KernelPrelog {
    pub fn new(kernel: KernelOnCircle, tol: f64) -> Result<Self> {
        kernel.validate(720)?;
        Ok(Self { kernel, tol })
    }
}

/// `Q(n) = 2 ∫ Γ(n + t n⊥) dt`, integrated after `t = tan θ`.
pub fn prelog_matrix(k: &KernelOnCircle, n: [f64; 2], tol: f64) -> Result<DMatrix<f64>> {
    let dim = k.dim();
    let nperp = [-n[1], n[0]];
    let v = integrate_dyn(
        |theta, out: &mut [f64]| {
            let (s, c) = theta.sin_cos();
            k.eval_into([c * n[0] + s * nperp[0], c * n[1] + s * nperp[1]], out);
            for x in out.iter_mut() {
                *x *= 2.0 * c;
            }
        },
        dim * dim,
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
        0.0,
    )?;
    Ok(DMatrix::from_row_slice(dim, dim, &v))
}

impl Prelog for KernelPrelog {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn matrix(&self, n: [f64; 2]) -> DMatrix<f64> {
        let m = prelog_matrix(&self.kernel, n, self.tol).expect("validated kernel integrates");
        0.5 * (&m + m.transpose())
    }

    fn energy_unit(&self) -> f64 {
        self.kernel.material().map_or(1.0, |m| m.mu_over_4pi())
    }
}

/// `ψ₀(b, n) = 2 ∫_ℝ Γ(n + t n⊥) b·b dt` by adaptive quadrature to relative tolerance `tol`.
pub fn psi0_quadrature(b: &[f64], n: [f64; 2], k: &KernelOnCircle, tol: f64) -> Result<f64> {
    check_unit(n)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if b.len() != k.dim() {
        return Err(Error::Domain(format!("Burgers vector has {} components, kernel has N = {}", b.len(), k.dim())));
    }
    kernel_positivity(k, 32)?;
    if b.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let dim = k.dim();
    let nperp = [-n[1], n[0]];
    let mut buf = vec![0.0; dim * dim];
    let cell = std::cell::RefCell::new(&mut buf);
    integrate(
        |theta| {
            let (s, c) = theta.sin_cos();
            let mut g = cell.borrow_mut();
            k.eval_into([c * n[0] + s * nperp[0], c * n[1] + s * nperp[1]], &mut g);
            let mut q = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    q += b[i] * g[i * dim + j] * b[j];
                }
            }
            2.0 * c * q
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        tol,
        0.0,
    )
}

/// `(μ/4π)(|b|² + η (b·n)²)` for a two-component Burgers vector.
pub fn psi0_cubic(b: &[f64], n: [f64; 2], mat: &MaterialCubic) -> Result<f64> {
    check_unit(n)?;
    if b.len() != 2 {
        return Err(Error::Domain(format!("cubic line energy needs N = 2, got {}", b.len())));
    }
    Ok(CubicPrelog(*mat).psi0(b, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub position: [f64; 2],
    /// Open ends (e.g. where a line leaves the sample) are exempt from Burgers balance.
    pub open_end: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub burgers: BurgersVector,
}

/// Polygonal dislocation network with integer Burgers vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DislocationNetwork {
    pub nodes: Vec<Node>,
    pub segments: Vec<Segment>,
}

impl DislocationNetwork {
    pub fn new(nodes: Vec<Node>, segments: Vec<Segment>) -> Result<Self> {
        let dim = segments.first().map(|s| s.burgers.dim());
        for (i, s) in segments.iter().enumerate() {
            if s.start >= nodes.len() || s.end >= nodes.len() {
                return Err(Error::InvalidNetwork(format!("segment {i} references a missing node")));
            }
            if Some(s.burgers.dim()) != dim {
                return Err(Error::InvalidNetwork(format!("segment {i} has a Burgers vector of different length")));
            }
            let (p, q) = (nodes[s.start].position, nodes[s.end].position);
            if (q[0] - p[0]).hypot(q[1] - p[1]) == 0.0 {
                return Err(Error::InvalidNetwork(format!("segment {i} has zero length")));
            }
        }
        Ok(Self { nodes, segments })
    }

    /// Build from bare positions; no node is an open end.
    pub fn from_positions(positions: &[[f64; 2]], segments: Vec<Segment>) -> Result<Self> {
        let nodes = positions.iter().map(|&p| Node { position: p, open_end: false }).collect();
        Self::new(nodes, segments)
    }

    /// Mark every node lying on the boundary of the box `[lo, hi]` as an open end.
    pub fn mark_open_on_box(&mut self, lo: [f64; 2], hi: [f64; 2], tol: f64) {
        for n in &mut self.nodes {
            let p = n.position;
            let on = (0..2).any(|k| (p[k] - lo[k]).abs() <= tol || (p[k] - hi[k]).abs() <= tol);
            if on {
                n.open_end = true;
            }
        }
    }

    pub fn burgers_dim(&self) -> Option<usize> {
        self.segments.first().map(|s| s.burgers.dim())
    }

    /// Unit normal `n = rot(tangent, −90°)` and length of a segment.
    pub fn segment_geometry(&self, i: usize) -> ([f64; 2], f64) {
        let s = &self.segments[i];
        let p = self.nodes[s.start].position;
        let q = self.nodes[s.end].position;
        let t = [q[0] - p[0], q[1] - p[1]];
        let len = t[0].hypot(t[1]);
        ([t[1] / len, -t[0] / len], len)
    }

    /// Write the node table (`id,x,y,open`) and segment table (`id,start,end,b1..bN`).
    pub fn write_csv<W1: Write, W2: Write>(&self, nodes: W1, segments: W2) -> Result<()> {
        let mut w = csv::Writer::from_writer(nodes);
        w.write_record(["id", "x", "y", "open"])?;
        for (i, n) in self.nodes.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{:.17e}", n.position[0]),
                format!("{:.17e}", n.position[1]),
                u8::from(n.open_end).to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_writer(segments);
        let dim = self.burgers_dim().unwrap_or(0);
        let mut header = vec!["id".to_string(), "start".into(), "end".into()];
        header.extend((1..=dim).map(|k| format!("b{k}")));
        w.write_record(&header)?;
        for (i, s) in self.segments.iter().enumerate() {
            let mut rec = vec![i.to_string(), s.start.to_string(), s.end.to_string()];
            rec.extend(s.burgers.0.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R1: Read, R2: Read>(nodes: R1, segments: R2) -> Result<Self> {
        let parse_err = |what: &str, row: usize| Error::Parse(format!("{what} table, row {row}"));
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(nodes);
        let mut node_rows: Vec<(usize, Node)> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let id: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("node", row))?;
            let x: f64 = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("node", row))?;
            let y: f64 = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("node", row))?;
            let open = rec.get(3).map(|s| s == "1" || s.eq_ignore_ascii_case("true")).unwrap_or(false);
            node_rows.push((id, Node { position: [x, y], open_end: open }));
        }
        node_rows.sort_by_key(|r| r.0);
        if node_rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(Error::Parse("node ids must be 0..n-1".into()));
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(segments);
        let mut segs: Vec<(usize, Segment)> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let nums: Vec<i64> = rec
                .iter()
                .map(|s| s.parse::<i64>().map_err(|_| parse_err("segment", row)))
                .collect::<Result<_>>()?;
            if nums.len() < 4 || nums[0] < 0 || nums[1] < 0 || nums[2] < 0 {
                return Err(parse_err("segment", row));
            }
            segs.push((
                nums[0] as usize,
                Segment { start: nums[1] as usize, end: nums[2] as usize, burgers: BurgersVector(nums[3..].to_vec()) },
            ));
        }
        segs.sort_by_key(|r| r.0);
        Self::new(node_rows.into_iter().map(|r| r.1).collect(), segs.into_iter().map(|r| r.1).collect())
    }
}

/// True iff at every non-open node the incoming Burgers vectors sum to the outgoing ones.
pub fn check_frank(net: &DislocationNetwork) -> bool {
    let Some(dim) = net.burgers_dim() else { return true };
    let mut balance = vec![vec![0i64; dim]; net.nodes.len()];
    for s in &net.segments {
        for k in 0..dim {
            balance[s.end][k] += s.burgers.0[k];
            balance[s.start][k] -= s.burgers.0[k];
        }
    }
    net.nodes
        .iter()
        .zip(&balance)
        .all(|(node, bal)| node.open_end || bal.iter().all(|&x| x == 0))
}

/// Unrelaxed line energy `Σ length · ψ(b, n)` of a Frank-balanced network.
pub fn network_line_energy<F>(net: &DislocationNetwork, psi: F) -> Result<f64>
where
    F: Fn(&[f64], [f64; 2]) -> f64,
{
    if !check_frank(net) {
        return Err(Error::InvalidNetwork("Burgers vectors are not conserved at every node".into()));
    }
    Ok((0..net.segments.len())
        .map(|i| {
            let (n, len) = net.segment_geometry(i);
            len * psi(&net.segments[i].burgers.to_f64(), n)
        })
        .sum())
}

//! Angular part of the singular slip-interaction kernel.
//!
//! The singular kernel is `Γ(z) = Γ̂(z/|z|) / |z|³` with `Γ̂ : S¹ → Sym(N)`. A
//! [`KernelOnCircle`] stores `Γ̂`, either in the closed form of an elastically
//! isotropic cubic crystal, as an angular table, or as an arbitrary closure.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Shear modulus and Poisson ratio of an elastically isotropic cubic crystal.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MaterialCubic {
    pub mu: f64,
    pub nu: f64,
}

impl MaterialCubic {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("shear modulus must be positive, got {mu}")));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(Error::Domain(format!("Poisson ratio must lie in (-1, 1/2), got {nu}")));
        }
        Ok(Self { mu, nu })
    }

    /// The normalization in which the screw prelogarithmic factor of a unit
    /// Burgers vector is exactly one (`μ = 4π`).
    pub fn normalized(nu: f64) -> Result<Self> {
        Self::new(4.0 * PI, nu)
    }

    /// `η = ν / (1 − ν)`, the edge/screw contrast of the line energy.
    pub fn eta(&self) -> f64 {
        self.nu / (1.0 - self.nu)
    }

    /// Inverse of [`eta`](Self::eta): `ν = η / (1 + η)`.
    pub fn nu_from_eta(eta: f64) -> f64 {
        eta / (1.0 + eta)
    }

    /// Energy unit `μ/4π` of the line-tension densities.
    pub fn mu_over_4pi(&self) -> f64 {
        self.mu / (4.0 * PI)
    }

    fn gamma_prefactor(&self) -> f64 {
        self.mu / (16.0 * PI * (1.0 - self.nu))
    }
}

/// The cubic singular kernel `Γ^cubic(z)`, homogeneous of degree −3.
pub fn gamma_cubic(z: [f64; 2], mat: &MaterialCubic) -> Result<Matrix2<f64>> {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if !(r2 > 0.0) {
        return Err(Error::Domain("kernel is singular at z = 0".into()));
    }
    let r = r2.sqrt();
    let pre = mat.gamma_prefactor() / (r2 * r);
    let nu = mat.nu;
    Ok(pre
        * Matrix2::new(
            nu + 1.0 - 3.0 * nu * z[1] * z[1] / r2,
            3.0 * nu * z[0] * z[1] / r2,
            3.0 * nu * z[0] * z[1] / r2,
            nu + 1.0 - 3.0 * nu * z[0] * z[0] / r2,
        ))
}

/// Matrix-valued function sampled at sorted angles in `[0, 2π)`, interpolated
/// linearly and periodically.
#[derive(Debug, Clone)]
pub struct AngularTable {
    dim: usize,
    angles: Vec<f64>,
    values: Vec<DMatrix<f64>>,
}

impl AngularTable {
    pub fn new(angles: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if angles.len() < 2 || angles.len() != values.len() {
            return Err(Error::Parse("angular table needs at least two rows".into()));
        }
        let dim = values[0].nrows();
        if values.iter().any(|v| v.nrows() != dim || v.ncols() != dim) {
            return Err(Error::Parse("angular table rows have inconsistent sizes".into()));
        }
        let mut rows: Vec<(f64, DMatrix<f64>)> = angles
            .into_iter()
            .map(|a| a.rem_euclid(2.0 * PI))
            .zip(values)
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[1].0 - w[0].0 <= 0.0) {
            return Err(Error::Parse("angular table has repeated angles".into()));
        }
        let (angles, values) = rows.into_iter().unzip();
        Ok(Self { dim, angles, values })
    }

    /// Sample `f` at `m` uniformly spaced angles.
    pub fn sample<F: Fn(f64) -> DMatrix<f64>>(m: usize, f: F) -> Result<Self> {
        let angles: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let values = angles.iter().map(|&t| f(t)).collect();
        Self::new(angles, values)
    }

    /// Parse CSV rows `theta, g11, g12, ..., gNN` (θ in radians, row-major entries).
    /// A header row is accepted if its first field is not numeric.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut angles = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.is_empty() {
                continue;
            }
            if line == 0 && rec[0].parse::<f64>().is_err() {
                continue;
            }
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", line + 1))))
                .collect::<Result<_>>()?;
            let k = nums.len() - 1;
            let n = (k as f64).sqrt().round() as usize;
            if n == 0 || n * n != k {
                return Err(Error::Parse(format!("row {}: expected 1 + N² columns, got {}", line + 1, nums.len())));
            }
            angles.push(nums[0]);
            values.push(DMatrix::from_row_slice(n, n, &nums[1..]));
        }
        Self::new(angles, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    fn eval_angle_into(&self, theta: f64, out: &mut [f64]) {
        let t = theta.rem_euclid(2.0 * PI);
        let n = self.angles.len();
        let hi = self.angles.partition_point(|&a| a <= t);
        let (i0, i1, a0, a1) = if hi == 0 || hi == n {
            (n - 1, 0, self.angles[n - 1] - 2.0 * PI, self.angles[0])
        } else {
            (hi - 1, hi, self.angles[hi - 1], self.angles[hi])
        };
        let (a0, a1) = if hi == n { (a0 + 2.0 * PI, a1 + 2.0 * PI) } else { (a0, a1) };
        let w = ((t - a0) / (a1 - a0)).clamp(0.0, 1.0);
        let (m0, m1) = (&self.values[i0], &self.values[i1]);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[r * self.dim + c] = (1.0 - w) * m0[(r, c)] + w * m1[(r, c)];
            }
        }
    }
}

type AngularFn = Arc<dyn Fn([f64; 2], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Cubic(MaterialCubic),
    Table(AngularTable),
    Func(AngularFn),
}

/// The angular profile `Γ̂ : S¹ → Sym(N)` of a kernel (or of any degree-0
/// matrix field on the circle, such as a Fourier symbol).
#[derive(Clone)]
pub struct KernelOnCircle {
    dim: usize,
    repr: Repr,
}

impl fmt::Debug for KernelOnCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Cubic(m) => write!(f, "KernelOnCircle::Cubic({m:?})"),
            Repr::Table(t) => write!(f, "KernelOnCircle::Table(N={}, {} angles)", t.dim, t.len()),
            Repr::Func(_) => write!(f, "KernelOnCircle::Func(N={})", self.dim),
        }
    }
}

impl KernelOnCircle {
    pub fn cubic(mat: MaterialCubic) -> Self {
        Self { dim: 2, repr: Repr::Cubic(mat) }
    }

    pub fn from_table(table: AngularTable) -> Self {
        Self { dim: table.dim(), repr: Repr::Table(table) }
    }

    /// Wrap a closure writing the row-major `N×N` matrix for a unit direction.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn([f64; 2], &mut [f64]) + Send + Sync + 'static,
    {
        Self { dim, repr: Repr::Func(Arc::new(f)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The cubic material, when the kernel is the closed cubic form.
    pub fn material(&self) -> Option<MaterialCubic> {
        match self.repr {
            Repr::Cubic(m) => Some(m),
            _ => None,
        }
    }

    /// Write `Γ̂(z)` for a unit vector `z` into `out` (row-major, length N²).
    pub fn eval_into(&self, z: [f64; 2], out: &mut [f64]) {
        match &self.repr {
            Repr::Cubic(mat) => {
                let pre = mat.gamma_prefactor();
                let nu = mat.nu;
                out[0] = pre * (nu + 1.0 - 3.0 * nu * z[1] * z[1]);
                out[1] = pre * 3.0 * nu * z[0] * z[1];
                out[2] = out[1];
                out[3] = pre * (nu + 1.0 - 3.0 * nu * z[0] * z[0]);
            }
            Repr::Table(t) => t.eval_angle_into(z[1].atan2(z[0]), out),
            Repr::Func(f) => f(z, out),
        }
    }

    /// `Γ̂(z)` for a unit vector `z`.
    pub fn eval(&self, z: [f64; 2]) -> DMatrix<f64> {
        let mut buf = vec![0.0; self.dim * self.dim];
        self.eval_into(z, &mut buf);
        DMatrix::from_row_slice(self.dim, self.dim, &buf)
    }

    pub fn eval_angle(&self, theta: f64) -> DMatrix<f64> {
        self.eval([theta.cos(), theta.sin()])
    }

    /// The full singular kernel `Γ(z) = Γ̂(z/|z|)/|z|³`.
    pub fn gamma(&self, z: [f64; 2]) -> Result<DMatrix<f64>> {
        let r = z[0].hypot(z[1]);
        if !(r > 0.0) {
            return Err(Error::Domain("kernel is singular at z = 0".into()));
        }
        Ok(self.eval([z[0] / r, z[1] / r]) / (r * r * r))
    }

    /// Check symmetry, evenness and uniform positivity at `m_ang` directions.
    pub fn validate(&self, m_ang: usize) -> Result<(f64, f64)> {
        let n = self.dim;
        for j in 0..m_ang {
            let t = 2.0 * PI * j as f64 / m_ang as f64;
            let g = self.eval_angle(t);
            let g_opp = self.eval_angle(t + PI);
            let scale = g.amax().max(f64::MIN_POSITIVE);
            if (&g - g.transpose()).amax() > 1e-10 * scale {
                return Err(Error::InadmissibleKernel(format!("not symmetric at θ = {t:.6}")));
            }
            if (&g - &g_opp).amax() > 1e-9 * scale {
                return Err(Error::InadmissibleKernel(format!("not even at θ = {t:.6}")));
            }
            debug_assert_eq!(g.nrows(), n);
        }
        kernel_positivity(self, m_ang)
    }
}

/// Extreme eigenvalues of `Γ̂` over `m_ang` uniformly spaced directions.
pub fn kernel_positivity(k: &KernelOnCircle, m_ang: usize) -> Result<(f64, f64)> {
    if m_ang < 8 {
        return Err(Error::Domain(format!("need at least 8 sample directions, got {m_ang}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..m_ang {
        let t = 2.0 * PI * j as f64 / m_ang as f64;
        let g = k.eval_angle(t);
        let sym = 0.5 * (&g + g.transpose());
        let eig = SymmetricEigen::new(sym).eigenvalues;
        let emin = eig.min();
        let emax = eig.max();
        if !(emin > 0.0) {
            return Err(Error::InadmissibleKernel(format!(
                "eigenvalue {emin:.6e} ≤ 0 at θ = {t:.6}"
            )));
        }
        lo = lo.min(emin);
        hi = hi.max(emax);
    }
    Ok((lo, hi))
}

/// `|ξ|·Γ̂(ξ/|ξ|)`, the zero matrix at `ξ = 0`.
pub fn spectral_multiplier(xi: [f64; 2], k: &KernelOnCircle) -> DMatrix<f64> {
    let r = xi[0].hypot(xi[1]);
    if r == 0.0 {
        return DMatrix::zeros(k.dim(), k.dim());
    }
    k.eval([xi[0] / r, xi[1] / r]) * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_prefactor(nu: f64) -> MaterialCubic {
        MaterialCubic::new(16.0 * PI * (1.0 - nu), nu).unwrap()
    }

    #[test]
    fn cubic_kernel_on_axes() {
        let mat = unit_prefactor(1.0 / 3.0);
        let g = gamma_cubic([1.0, 0.0], &mat).unwrap();
        assert_relative_eq!(g[(0, 0)], 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(g[(1, 1)], 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(g[(0, 1)], 0.0);
        let g2 = gamma_cubic([0.0, 2.0], &mat).unwrap();
        assert_relative_eq!(g2[(0, 0)], (1.0 / 8.0) * (1.0 / 3.0), epsilon = 1e-14);
        assert_relative_eq!(g2[(1, 1)], (1.0 / 8.0) * (4.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn cubic_kernel_rejects_origin() {
        let mat = MaterialCubic::normalized(0.3).unwrap();
        assert!(matches!(gamma_cubic([0.0, 0.0], &mat), Err(Error::Domain(_))));
    }

    #[test]
    fn cubic_kernel_even_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mat = MaterialCubic::new(2.5, 0.27).unwrap();
        for _ in 0..20 {
            let z = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let a = gamma_cubic(z, &mat).unwrap();
            let b = gamma_cubic([-z[0], -z[1]], &mat).unwrap();
            assert_eq!(a, b);
            let r: f64 = z[0].hypot(z[1]);
            let tr = mat.mu * (2.0 - mat.nu) / (16.0 * PI * (1.0 - mat.nu) * r.powi(3));
            assert_relative_eq!(a.trace(), tr, max_relative = 1e-13);
        }
    }

    #[test]
    fn closed_form_eval_matches_gamma_cubic() {
        let mat = MaterialCubic::new(1.7, -0.4).unwrap();
        let k = KernelOnCircle::cubic(mat);
        for j in 0..12 {
            let t = 0.37 * j as f64;
            let z = [t.cos(), t.sin()];
            let a = k.eval(z);
            let b = gamma_cubic(z, &mat).unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    assert_relative_eq!(a[(r, c)], b[(r, c)], max_relative = 1e-13, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn positivity_cubic() {
        let k = KernelOnCircle::cubic(unit_prefactor(1.0 / 3.0));
        let (lo, hi) = kernel_positivity(&k, 10_000).unwrap();
        assert_relative_eq!(lo, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 4.0 / 3.0, epsilon = 1e-12);

        let k0 = KernelOnCircle::cubic(MaterialCubic::new(16.0 * PI, 0.0).unwrap());
        let (lo, hi) = kernel_positivity(&k0, 64).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-14);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn positivity_rejects_indefinite() {
        let k = KernelOnCircle::from_fn(2, |_, out| {
            out.copy_from_slice(&[1.0, 0.0, 0.0, -0.5]);
        });
        assert!(matches!(kernel_positivity(&k, 16), Err(Error::InadmissibleKernel(_))));
        assert!(matches!(kernel_positivity(&k, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn validate_rejects_odd_kernel() {
        let k = KernelOnCircle::from_fn(1, |z, out| out[0] = 1.0 + 0.5 * z[0]);
        assert!(matches!(k.validate(32), Err(Error::InadmissibleKernel(_))));
    }

    #[test]
    fn multiplier_homogeneity() {
        let k = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0).unwrap());
        assert_eq!(spectral_multiplier([0.0, 0.0], &k), DMatrix::zeros(2, 2));
        let m = spectral_multiplier([2.0, 0.0], &k);
        assert_relative_eq!((m - 2.0 * k.eval([1.0, 0.0])).amax(), 0.0, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let xi = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let a = spectral_multiplier([2.0 * xi[0], 2.0 * xi[1]], &k);
            let b = spectral_multiplier(xi, &k) * 2.0;
            let c = spectral_multiplier([-xi[0], -xi[1]], &k);
            assert!((a - &b).amax() < 1e-13 * b.amax());
            assert!((c * 2.0 - b).amax() < 1e-13);
        }
    }

    #[test]
    fn table_roundtrip_and_interpolation() {
        let k = KernelOnCircle::cubic(MaterialCubic::normalized(0.25).unwrap());
        let table = AngularTable::sample(720, |t| k.eval_angle(t)).unwrap();
        let mut csv = String::from("theta,g11,g12,g21,g22\n");
        for (a, v) in table.angles.iter().zip(&table.values) {
            csv.push_str(&format!("{a:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]));
        }
        let parsed = AngularTable::from_csv_reader(csv.as_bytes()).unwrap();
        let tk = KernelOnCircle::from_table(parsed);
        assert_eq!(tk.dim(), 2);
        for j in 0..50 {
            let t = 0.1234 + 0.271 * j as f64;
            let err = (tk.eval_angle(t) - k.eval_angle(t)).amax();
            assert!(err < 1e-5, "interpolation error {err}");
        }
        tk.validate(720).unwrap();
    }

    #[test]
    fn table_csv_rejects_bad_width() {
        let bad = "0.0,1.0,2.0\n1.0,1.0,2.0\n";
        assert!(AngularTable::from_csv_reader(bad.as_bytes()).is_err());
    }
}

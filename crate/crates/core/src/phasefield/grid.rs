//! Periodic slip fields sampled at cell centres of an `M×M` grid.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// A slip field `u : (0,L)² → ℝᴺ` sampled at the cell centres `((i+½)h, (j+½)h)`, `h = L/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    l: f64,
    m: usize,
    n: usize,
    /// Row-major: component `c` of cell `(i₁, i₂)` sits at `(i₂·M + i₁)·N + c`.
    values: Vec<f64>,
}

impl TorusGrid {
    pub fn new(l: f64, m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("period must be positive, got {l}")));
        }
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::Domain(format!("M must be a power of two and at least 8, got {m}")));
        }
        if n == 0 {
            return Err(Error::Domain("N must be positive".into()));
        }
        if values.len() != m * m * n {
            return Err(Error::Domain(format!("expected {} values, got {}", m * m * n, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid values must be finite".into()));
        }
        Ok(Self { l, m, n, values })
    }

    pub fn zeros(l: f64, m: usize, n: usize) -> Result<Self> {
        Self::new(l, m, n, vec![0.0; m * m * n])
    }

    pub fn constant(l: f64, m: usize, v: &[f64]) -> Result<Self> {
        Self::new(l, m, v.len(), v.repeat(m * m))
    }

    /// Sample `f(x)` at every cell centre.
    pub fn from_fn<F: Fn([f64; 2]) -> Vec<f64>>(l: f64, m: usize, n: usize, f: F) -> Result<Self> {
        let h = l / m as f64;
        let mut values = Vec::with_capacity(m * m * n);
        for i2 in 0..m {
            for i1 in 0..m {
                let v = f([(i1 as f64 + 0.5) * h, (i2 as f64 + 0.5) * h]);
                if v.len() != n {
                    return Err(Error::Domain(format!("sampler returned {} components, expected {n}", v.len())));
                }
                values.extend(v);
            }
        }
        Self::new(l, m, n, values)
    }

    pub fn period(&self) -> f64 {
        self.l
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> &[f64] {
        let k = (i2 * self.m + i1) * self.n;
        &self.values[k..k + self.n]
    }

    /// Cell centre of `(i₁, i₂)`.
    pub fn centre(&self, i1: usize, i2: usize) -> [f64; 2] {
        let h = self.spacing();
        [(i1 as f64 + 0.5) * h, (i2 as f64 + 0.5) * h]
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { values: self.values.iter().map(|v| t * v).collect(), ..self.clone() }
    }

    /// Mean of each component over the torus.
    pub fn mean(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for cell in self.values.chunks(self.n) {
            for (a, b) in s.iter_mut().zip(cell) {
                *a += b;
            }
        }
        s.iter().map(|v| v / (self.m * self.m) as f64).collect()
    }

    /// Flat binary: `L` (f64), `M` (u64), `N` (u64), then the values, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.l.to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let m = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if m > 1 << 16 || n > 1 << 10 {
            return Err(Error::Parse(format!("implausible grid header M = {m}, N = {n}")));
        }
        let mut values = Vec::with_capacity(m * m * n);
        for _ in 0..m * m * n {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        Self::new(l, m, n, values)
    }

    /// CSV with columns `i1,i2,x1,x2,u1..uN`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["i1".to_string(), "i2".into(), "x1".into(), "x2".into()];
        header.extend((1..=self.n).map(|c| format!("u{c}")));
        w.write_record(&header)?;
        for i2 in 0..self.m {
            for i1 in 0..self.m {
                let x = self.centre(i1, i2);
                let mut rec = vec![i1.to_string(), i2.to_string(), format!("{:.17e}", x[0]), format!("{:.17e}", x[1])];
                rec.extend(self.at(i1, i2).iter().map(|v| format!("{v:.17e}")));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `u = b` on the strips `kL < x₁ < (k+½)L`, zero elsewhere.
pub fn build_sharp_dipole(l: f64, m: usize, b: &[f64]) -> Result<TorusGrid> {
    TorusGrid::from_fn(l, m, b.len(), |x| {
        let s = x[0].rem_euclid(l);
        if s < l / 2.0 {
            b.to_vec()
        } else {
            vec![0.0; b.len()]
        }
    })
}

/// Profile `max{0, 1 − dist(x₁, [0, L/2])/ε}` on the torus, times `b`.
pub(crate) fn dipole_profile(x1: f64, l: f64, eps: f64) -> f64 {
    let s = x1.rem_euclid(l);
    // periodic distance to the strip [0, L/2]
    let d = if s <= l / 2.0 { 0.0 } else { (s - l / 2.0).min(l - s) };
    (1.0 - d / eps).max(0.0)
}

/// The dipole with linear ramps of width `ε` on both sides of the strip.
pub fn build_regularized_dipole(l: f64, m: usize, eps: f64, b: &[f64]) -> Result<TorusGrid> {
    let h = l / m as f64;
    if !(eps >= 2.0 * h) {
        return Err(Error::Resolution(format!("ramp width {eps} is below two cells (h = {h})")));
    }
    if !(eps < l / 4.0) {
        return Err(Error::Domain(format!("eps must be below L/4, got {eps}")));
    }
    TorusGrid::from_fn(l, m, b.len(), |x| {
        let p = dipole_profile(x[0], l, eps);
        b.iter().map(|v| p * v).collect()
    })
}

/// `count` regularized dipoles shifted by `L/(2·count)` each: a staircase
/// rising by `b` per dislocation across the first half period and falling
/// across the second.
pub fn build_dipole_stack(l: f64, m: usize, eps: f64, b: &[f64], count: usize) -> Result<TorusGrid> {
    let h = l / m as f64;
    if !(eps >= 2.0 * h) {
        return Err(Error::Resolution(format!("ramp width {eps} is below two cells (h = {h})")));
    }
    if count == 0 {
        return Err(Error::Domain("stack needs at least one dipole".into()));
    }
    let step = l / (2.0 * count as f64);
    TorusGrid::from_fn(l, m, b.len(), |x| {
        let p: f64 = (0..count).map(|j| dipole_profile(x[0] - j as f64 * step, l, eps)).sum();
        b.iter().map(|v| p * v).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_dipole_values() {
        let g = build_sharp_dipole(1.0, 16, &[1.0, 2.0]).unwrap();
        // cell 3 has centre 7/32 ≈ L/4; cell 12 has centre 25/32 ≈ 3L/4
        assert_eq!(g.at(3, 5), &[1.0, 2.0]);
        assert_eq!(g.at(12, 0), &[0.0, 0.0]);
        assert_eq!(g.mean(), vec![0.5, 1.0]);
    }

    #[test]
    fn regularized_dipole_values() {
        let (l, eps) = (1.0, 0.125);
        assert_eq!(dipole_profile(0.25, l, eps), 1.0);
        assert!((dipole_profile(0.5 + eps / 2.0, l, eps) - 0.5).abs() < 1e-15);
        assert!((dipole_profile(-eps / 4.0, l, eps) - 0.75).abs() < 1e-15);
        assert_eq!(dipole_profile(0.75, l, eps), 0.0);
        let g = build_regularized_dipole(l, 64, eps, &[1.0]).unwrap();
        assert_eq!(g.at(16, 0), &[1.0]);
        assert!(matches!(build_regularized_dipole(1.0, 64, 1.0 / 64.0, &[1.0]), Err(Error::Resolution(_))));
    }

    #[test]
    fn regularized_tends_to_sharp_off_the_jumps() {
        let sharp = build_sharp_dipole(1.0, 256, &[1.0]).unwrap();
        let reg = build_regularized_dipole(1.0, 256, 2.0 / 256.0, &[1.0]).unwrap();
        let differ = sharp.values().iter().zip(reg.values()).filter(|(a, b)| a != b).count();
        // only the two cells inside each of the two ramps differ
        assert_eq!(differ, 4 * 256);
    }

    #[test]
    fn binary_roundtrip() {
        let g = build_regularized_dipole(2.0, 16, 0.3, &[1.0, -0.5]).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 16 * 2 * 8);
        assert_eq!(TorusGrid::read_binary(buf.as_slice()).unwrap(), g);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 256);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::zeros(1.0, 12, 1).is_err());
        assert!(TorusGrid::zeros(1.0, 4, 1).is_err());
        assert!(TorusGrid::zeros(0.0, 8, 1).is_err());
    }
}

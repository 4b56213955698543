//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel for a vector-valued integrand; returns (kronrod, |kronrod - gauss|).
fn panel<F>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [f64]) -> (Vec<f64>, f64)
where
    F: Fn(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        k[d] = WGK[7] * buf[d];
        g[d] = WG[3] * buf[d];
    }
    let mut other = vec![0.0; dim];
    for j in 0..7 {
        let dx = h * XGK[j];
        f(c - dx, buf);
        f(c + dx, &mut other);
        for d in 0..dim {
            let s = buf[d] + other[d];
            k[d] += WGK[j] * s;
            if j % 2 == 1 {
                g[d] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).abs());
    }
    (k, err)
}

/// Integrate a `dim`-component function (written into its output slice) over
/// `[a, b]` until the estimated error is below `rel_tol * max|I| + abs_tol`.
pub fn integrate_dyn<F>(f: F, dim: usize, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]),
{
    const MAX_PANELS: usize = 4000;
    let mut buf = vec![0.0; dim];
    let (v, e) = panel(&f, dim, a, b, &mut buf);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in &panels {
            for d in 0..dim {
                total[d] += p.2[d];
            }
            err += p.3;
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if err <= rel_tol * scale + abs_tol {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature: error {err:.3e} after {MAX_PANELS} panels"
            )));
        }
        // bisect the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = panel(&f, dim, pa, mid, &mut buf);
        let (v2, e2) = panel(&f, dim, mid, pb, &mut buf);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Fixed-size variant of [`integrate_dyn`].
pub fn integrate_vec<const D: usize, F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<[f64; D]>
where
    F: Fn(f64) -> [f64; D],
{
    let v = integrate_dyn(|x, out: &mut [f64]| out.copy_from_slice(&f(x)), D, a, b, rel_tol, abs_tol)?;
    let mut out = [0.0; D];
    out.copy_from_slice(&v);
    Ok(out)
}

/// Scalar convenience wrapper.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_dyn(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, rel_tol, abs_tol).map(|v| v[0])
}

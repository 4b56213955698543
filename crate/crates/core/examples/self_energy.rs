//! Self-energy of a piecewise affine slip field with jumps, and the change of
//! basis to physical slip coordinates.

use std::sync::Arc;

use slipcell::cell::{grid_energy, AffineSlip};
use slipcell::kernel::MaterialCubic;
use slipcell::limit::{basis_transform, self_energy, PiecewiseAffineSlip, SlipBasis};
use slipcell::linetension::CubicPrelog;
use slipcell::relax::{AsymptoticDensity, Relaxer};

fn main() -> slipcell::Result<()> {
    let relaxer = Relaxer::new(Arc::new(CubicPrelog(MaterialCubic::normalized(1.0 / 3.0)?)), 720)?;
    let walls = AsymptoticDensity::with_default_box(Arc::new(relaxer));
    let g = |a: &AffineSlip| grid_energy(a, &walls);

    // u = A x on the left half of the square, 0 on the right half
    let a = AffineSlip::new(vec![[0.0, 1.0], [0.0, 0.5]])?;
    for l in [1.0, 2.0, 4.0] {
        let u = PiecewiseAffineSlip::half_strip(l, &a)?;
        let e = self_energy(&u, &g)?;
        println!("L = {l}: bulk {:.6}, jumps {:.6}, E/L^2 = {:.6}", e.bulk, e.jump, e.total / (l * l));
    }

    let mut json = Vec::new();
    PiecewiseAffineSlip::half_strip(1.0, &a)?.write_json(&mut json)?;
    println!("{}", String::from_utf8_lossy(&json));

    // slip directions at 60 degrees
    let basis = SlipBasis::new(vec![[1.0, 0.0, 0.0], [0.5, 0.75f64.sqrt(), 0.0]])?;
    let phys = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
    let c = basis_transform(&phys, &basis)?;
    println!("coefficients of e1 (x) e1: {:?}, f = {:.6}", c.rows(), g(&c));
    Ok(())
}

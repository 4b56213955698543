//! Prelogarithmic factors ψ₀(b, n) of straight dislocations: the cubic closed
//! form against direct quadrature of the kernel, and a tabulated kernel.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use slipcell::kernel::{gamma_cubic, AngularTable, KernelOnCircle, MaterialCubic};
use slipcell::linetension::{psi0_cubic, psi0_quadrature};

fn main() -> slipcell::Result<()> {
    let mat = MaterialCubic::normalized(1.0 / 3.0)?;
    let kernel = KernelOnCircle::cubic(mat);
    println!("angle_deg, psi0(e1) cubic, psi0(e1) quadrature, psi0(e1+e2)");
    for deg in (0..=180).step_by(30) {
        let t = (deg as f64).to_radians();
        let n = [t.cos(), t.sin()];
        let closed = psi0_cubic(&[1.0, 0.0], n, &mat)?;
        let quad = psi0_quadrature(&[1.0, 0.0], n, &kernel, 1e-12)?;
        println!("{deg:>4}, {closed:.12}, {quad:.12}, {:.12}", psi0_cubic(&[1.0, 1.0], n, &mat)?);
    }

    // the same kernel sampled on 256 angles and interpolated
    let table = AngularTable::sample(256, |t| {
        let g = gamma_cubic([t.cos(), t.sin()], &mat).unwrap();
        DMatrix::from_column_slice(2, 2, g.as_slice())
    })?;
    let tab = KernelOnCircle::from_table(table);
    let n = [(PI / 5.0).cos(), (PI / 5.0).sin()];
    println!(
        "tabulated kernel at 36 deg: {:.10} (closed form {:.10})",
        psi0_quadrature(&[1.0, 0.0], n, &tab, 1e-10)?,
        psi0_cubic(&[1.0, 0.0], n, &mat)?
    );
    Ok(())
}

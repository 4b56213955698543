//! Phase-field energy of a dislocation dipole on the torus: sharp profile,
//! linear-ramp regularization, and gradient-flow relaxation of the core.

use slipcell::kernel::{KernelOnCircle, MaterialCubic};
use slipcell::phasefield::{build_regularized_dipole, build_sharp_dipole, minimize_energy, total_energy, PhaseFieldConfig};

fn main() -> slipcell::Result<()> {
    let (l, m, eps) = (1.0, 128, 1.0 / 32.0);
    let cfg = PhaseFieldConfig::new(eps, KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0)?), l / 4.0)?;
    let sharp = build_sharp_dipole(l, m, &[1.0, 0.0])?;
    let ramp = build_regularized_dipole(l, m, eps, &[1.0, 0.0])?;
    println!("sharp dipole: {:?}", total_energy(&sharp, &cfg));
    println!("ramp dipole:  {:?}", total_energy(&ramp, &cfg));

    let out = minimize_energy(&sharp, &cfg, 200, 0.01)?;
    println!("relaxed:      {:?} after {} accepted steps", total_energy(&out.grid, &cfg), out.accepted);
    println!("x1, u1 (profile through the lower core)");
    for i in (m / 2 - 12..m / 2 + 12).step_by(2) {
        println!("{:.4}, {:.5}", out.grid.centre(i, 0)[0], out.grid.at(i, 0)[0]);
    }
    Ok(())
}

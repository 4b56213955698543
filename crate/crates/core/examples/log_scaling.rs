//! Logarithmic growth of the dipole energy in 1/ε and quadratic growth of
//! stacked dipoles in their number.

use slipcell::kernel::{KernelOnCircle, MaterialCubic};
use slipcell::phasefield::{scaling_fit, stack_energies};

fn main() -> slipcell::Result<()> {
    let kernel = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0)?);
    let eps: Vec<f64> = (4..=7).map(|j| 2f64.powi(-j)).collect();
    let fit = scaling_fit(1.0, 1024, &eps, &[1.0, 0.0], &kernel)?;
    for r in &fit.rows {
        println!("eps = {:.6}  E = {:.6}", r.eps, r.total);
    }
    println!("slope {:.4} (R^2 {:.6}), without the coarsest point {:.4}", fit.slope, fit.r2, fit.slope_without_coarsest());

    for r in stack_energies(1.0, 1024, 2f64.powi(-9), &[1.0, 0.0], &[4, 8, 16, 32], &kernel)? {
        println!("{:>3} dipoles: E = {:10.3}  E(2M)/E(M) = {:.3}", r.count, r.total, r.ratio);
    }
    Ok(())
}

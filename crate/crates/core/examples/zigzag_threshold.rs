//! The zig-zag microstructure for A = diag(1, -1): energy against overlap δ,
//! its optimum, and the material thresholds for which it beats the grid.

use slipcell::cell::{eta_threshold, nu_threshold, zigzag_energy, zigzag_optimize, ZigzagConfig};
use slipcell::kernel::MaterialCubic;

fn main() -> slipcell::Result<()> {
    let mat = MaterialCubic::normalized(1.0 / 3.0)?;
    println!("delta, e/sigma^2");
    for j in 0..10 {
        let delta = 0.02 * j as f64;
        println!("{delta:.2}, {:.6}", zigzag_energy(&ZigzagConfig::new(1.0, delta, mat)?)?.cell);
    }
    let opt = zigzag_optimize(1.0, &mat)?;
    println!("optimum delta = {:.6}, energy per area {:.6} (grid {:.6})", opt.delta, opt.energy.per_area, opt.grid.per_area);
    println!("eta threshold {:.6} (sqrt2 - 1 = {:.6})", eta_threshold(0.2, 0.6, 1e-8)?, 2f64.sqrt() - 1.0);
    println!("nu threshold  {:.6} (1 - 1/sqrt2 = {:.6})", nu_threshold(0.1, 0.45, 1e-8)?, 1.0 - 0.5f64.sqrt());
    Ok(())
}

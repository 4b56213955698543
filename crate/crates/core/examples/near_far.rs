//! Real-space split of the elastic energy into short- and long-range parts.

use slipcell::kernel::{KernelOnCircle, MaterialCubic};
use slipcell::phasefield::{build_regularized_dipole, elastic_energy_spectral, near_far_split, PhaseFieldConfig};

fn main() -> slipcell::Result<()> {
    let kernel = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0)?);
    for eps in [1.0 / 16.0, 1.0 / 32.0] {
        let g = build_regularized_dipole(1.0, 64, eps, &[1.0, 0.0])?;
        let cfg = PhaseFieldConfig::new(eps, kernel.clone(), 0.25)?;
        let s = near_far_split(&g, &cfg, 0.25)?;
        println!(
            "eps = {eps:.5}: near {:.4}, far {:.4}, sum {:.4} vs spectral {:.4} (tolerance {:.4})",
            s.near,
            s.far,
            s.near + s.far,
            elastic_energy_spectral(&g, cfg.symbol()),
            s.tolerance
        );
    }
    Ok(())
}

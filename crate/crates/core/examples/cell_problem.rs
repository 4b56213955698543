//! Upper bounds for the cell-problem density g(A) from grids, laminates,
//! zig-zags and a user-supplied periodic network.

use std::sync::Arc;

use slipcell::cell::{g_upper, grid_energy, periodic_network_optimize, AffineSlip, GUpperParams, PeriodicNetworkTopology};
use slipcell::kernel::MaterialCubic;
use slipcell::linetension::CubicPrelog;
use slipcell::relax::{AsymptoticDensity, Relaxer};

fn main() -> slipcell::Result<()> {
    for nu in [1.0 / 3.0, 0.2] {
        let relaxer = Relaxer::new(Arc::new(CubicPrelog(MaterialCubic::normalized(nu)?)), 720)?;
        let walls = AsymptoticDensity::with_default_box(Arc::new(relaxer));
        for a in [AffineSlip::diag(1.0, -1.0), AffineSlip::diag(1.0, 1.0), AffineSlip::new(vec![[0.5, 1.0], [0.0, -0.25]])?] {
            let (g, wit) = g_upper(&a, &walls, &GUpperParams::default())?;
            println!("nu = {nu:.3}  A = {:?}: grid {:.6}, g_upper {:.6} ({wit:?})", a.rows(), grid_energy(&a, &walls), g);
        }
        let zz = PeriodicNetworkTopology::zigzag(&AffineSlip::diag(1.0, -1.0), 0.1, false, true)?;
        let best = periodic_network_optimize(&zz, &walls, 500)?;
        println!("nu = {nu:.3}  free-angle zig-zag after pattern search: {:.6}", best.energy);
    }
    Ok(())
}

//! Limit energy of a slip field sampled on a grid: bulk and jump parts of the
//! self-energy plus the long-range elastic term.

use slipcell::cell::AffineSlip;
use slipcell::kernel::{KernelOnCircle, MaterialCubic};
use slipcell::limit::{limit_energy, network_bulk_energy, GradientSamples};
use slipcell::phasefield::TorusGrid;

fn main() -> slipcell::Result<()> {
    let kernel = KernelOnCircle::cubic(MaterialCubic::normalized(1.0 / 3.0)?);
    let g = |a: &AffineSlip| a.rows().iter().flatten().map(|x| x.abs()).sum::<f64>();
    let k = 2.0 * std::f64::consts::PI;
    for m in [32, 64, 128] {
        let u = TorusGrid::from_fn(1.0, m, 2, |x| vec![0.1 * (k * x[0]).sin(), 0.0])?;
        let e = limit_energy(&u, &g, &kernel)?;
        let exact = GradientSamples::from_fn([1.0, 1.0], m, |x| AffineSlip::new(vec![[0.1 * k * (k * x[0]).cos(), 0.0], [0.0, 0.0]]).unwrap())?;
        println!(
            "M = {m:>3}: bulk {:.6} (exact gradient {:.6}), jump increments {}, elastic {:.6}",
            e.bulk,
            network_bulk_energy(&exact, &g)?,
            e.jump_count,
            e.elastic
        );
    }

    // a slip step: every non-zero increment is a jump
    let step = TorusGrid::from_fn(1.0, 64, 2, |x| vec![if x[0] < 0.5 { 1.0 } else { 0.0 }, 0.0])?;
    let e = limit_energy(&step, &g, &kernel)?;
    println!("step: bulk {:.6}, jump {:.6} over {} increments, theta_J {}", e.bulk, e.jump, e.jump_count, e.theta_j);
    Ok(())
}

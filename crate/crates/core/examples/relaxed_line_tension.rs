//! Relaxation of the line tension: facet envelopes, dissociation into parts,
//! and the large-Burgers-vector asymptote ψ∞.

use std::sync::Arc;

use slipcell::kernel::MaterialCubic;
use slipcell::linetension::{BurgersVector, CubicPrelog, Prelog};
use slipcell::relax::{AsymptoticDensity, RelaxParams, Relaxer};

fn main() -> slipcell::Result<()> {
    let prelog: Arc<dyn Prelog> = Arc::new(CubicPrelog(MaterialCubic::normalized(1.0 / 3.0)?));
    let relaxer = Arc::new(Relaxer::new(prelog.clone(), 720)?);
    let params = RelaxParams::default();

    let s = 0.5f64.sqrt();
    for (b, n) in [([1, 1], [s, -s]), ([1, 1], [1.0, 0.0]), ([2, 1], [0.6, 0.8]), ([3, 0], [0.0, 1.0])] {
        let bv = BurgersVector::new(b.to_vec());
        let (v, wit) = relaxer.psi_rel_upper_with_witness(&bv, n, &params)?;
        let parts: Vec<_> = wit.parts.iter().map(|p| p.burgers.clone()).collect();
        println!(
            "b = {b:?}, n = [{:.3}, {:.3}]: psi0 = {:.6}, psi_rel <= {v:.6} via {parts:?}",
            n[0],
            n[1],
            prelog.psi0(&bv.to_f64(), n)
        );
    }

    let env = relaxer.envelope(&[1, 0]);
    let w = env.eval([0.6, 0.8]);
    println!("faceting of e1 at n = (0.6, 0.8): {:.6} with normals {:?}, lengths {:?}", w.value, w.normals, w.lengths);

    let psi_inf = AsymptoticDensity::with_default_box(relaxer.clone());
    println!("psi_inf(e1+e2, (e1-e2)/sqrt2) = {:.10}", psi_inf.eval(&[1.0, 1.0], [s, -s]));
    println!("psi_inf(0.3 e1 - 0.7 e2, e1)  = {:.10}", psi_inf.eval(&[0.3, -0.7], [1.0, 0.0]));
    Ok(())
}

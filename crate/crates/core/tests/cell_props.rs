mod common;

use proptest::prelude::*;
use slipcell::cell::{g_upper, grid_energy, zigzag_optimize, AffineSlip, GUpperParams, PeriodicNetworkTopology};

use common::{cubic, walls};

fn quick() -> GUpperParams {
    GUpperParams { laminate_normals: 60, triple_normals: 12, iters: 200, ..GUpperParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn g_upper_is_homogeneous_and_below_grid(a in prop::collection::vec(-1.0..1.0f64, 4), t in 0.2..4.0f64) {
        let w = walls(1.0 / 3.0);
        let am = AffineSlip::new(vec![[a[0], a[1]], [a[2], a[3]]]).unwrap();
        prop_assume!(am.frobenius() > 0.05);
        let (g, _) = g_upper(&am, &w, &quick()).unwrap();
        let (gt, _) = g_upper(&am.scaled(t), &w, &quick()).unwrap();
        prop_assert!((gt - t * g).abs() <= 1e-9 * t * g, "{} vs {}", gt, t * g);
        prop_assert!(g <= grid_energy(&am, &w) + 1e-12);
        // linear growth: bounded above and below by multiples of |A|
        let f = am.frobenius();
        prop_assert!(g >= 0.5 * f && g <= 3.0 * f, "g = {} |A| = {}", g, f);
    }
}

#[test]
fn zero_slip_costs_nothing() {
    let (g, _) = g_upper(&AffineSlip::zeros(2), &walls(1.0 / 3.0), &quick()).unwrap();
    assert_eq!(g, 0.0);
}

#[test]
fn zigzag_network_reproduces_closed_form() {
    let w = walls(1.0 / 3.0);
    let opt = zigzag_optimize(1.0, &cubic(1.0 / 3.0)).unwrap();
    let top = PeriodicNetworkTopology::zigzag(&AffineSlip::diag(1.0, -1.0), opt.delta, false, false).unwrap();
    let e = slipcell::cell::periodic_network_energy(&top, &top.positions(&[0.0]), &w);
    assert!((e - opt.energy.per_area).abs() < 1e-9, "{e} vs {}", opt.energy.per_area);
}

#[test]
fn grid_topology_realizes_its_slip() {
    let a = AffineSlip::new(vec![[0.4, -1.0], [2.0, 0.3]]).unwrap();
    let top = PeriodicNetworkTopology::grid(&a);
    top.validate().unwrap();
    let e = slipcell::cell::periodic_network_energy(&top, &top.positions(&vec![0.0; top.n_params()]), &walls(0.3));
    assert!((e - grid_energy(&a, &walls(0.3))).abs() < 1e-12);
}

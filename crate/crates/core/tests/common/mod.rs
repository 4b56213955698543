#![allow(dead_code)]

use std::sync::Arc;

use slipcell::kernel::MaterialCubic;
use slipcell::linetension::{CubicPrelog, Prelog};
use slipcell::relax::{AsymptoticDensity, Relaxer};

pub fn cubic(nu: f64) -> MaterialCubic {
    MaterialCubic::normalized(nu).unwrap()
}

pub fn prelog(nu: f64) -> Arc<dyn Prelog> {
    Arc::new(CubicPrelog(cubic(nu)))
}

pub fn relaxer(nu: f64) -> Arc<Relaxer> {
    Arc::new(Relaxer::new(prelog(nu), 720).unwrap())
}

pub fn walls(nu: f64) -> AsymptoticDensity {
    AsymptoticDensity::with_default_box(relaxer(nu))
}

pub fn unit(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

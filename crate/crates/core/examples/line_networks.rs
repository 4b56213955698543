//! Line energy of a small dislocation network and Frank's rule at junctions.

use slipcell::kernel::MaterialCubic;
use slipcell::linetension::{check_frank, network_line_energy, psi0_cubic, BurgersVector, DislocationNetwork, Segment};

fn seg(start: usize, end: usize, b: [i64; 2]) -> Segment {
    Segment { start, end, burgers: BurgersVector::new(b.to_vec()) }
}

fn main() -> slipcell::Result<()> {
    let mat = MaterialCubic::normalized(1.0 / 3.0)?;
    let psi = |b: &[f64], n: [f64; 2]| psi0_cubic(b, n, &mat).unwrap();

    // an e1+e2 line splitting into e1 and e2 branches and recombining
    let pos = [[0.0, 0.0], [0.0, 1.0], [-0.3, 2.0], [0.3, 2.0], [0.0, 3.0], [0.0, 4.0]];
    let mut net = DislocationNetwork::from_positions(
        &pos,
        vec![seg(0, 1, [1, 1]), seg(1, 2, [1, 0]), seg(1, 3, [0, 1]), seg(2, 4, [1, 0]), seg(3, 4, [0, 1]), seg(4, 5, [1, 1])],
    )?;
    net.mark_open_on_box([-1.0, 0.0], [1.0, 4.0], 1e-12);
    println!("Frank balanced: {}", check_frank(&net));
    println!("split network energy: {:.6}", network_line_energy(&net, psi)?);

    let mut straight = DislocationNetwork::from_positions(&[[0.0, 0.0], [0.0, 4.0]], vec![seg(0, 1, [1, 1])])?;
    straight.mark_open_on_box([-1.0, 0.0], [1.0, 4.0], 1e-12);
    println!("straight e1+e2 line:  {:.6}", network_line_energy(&straight, psi)?);

    net.segments[2].burgers = BurgersVector::new(vec![0, 2]);
    if let Err(e) = network_line_energy(&net, psi) {
        println!("after breaking a junction: {e}");
    }
    Ok(())
}

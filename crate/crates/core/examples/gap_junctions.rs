//! Gap-junction exchange on a hand-written four-cell ring.
//!
//!     cargo run --release --example gap_junctions

use olive_sim::engine::{exchange, gap_junction_current};
use olive_sim::topology::Topology;

fn main() -> olive_sim::Result<()> {
    println!("  dv (mV)   current per junction");
    for dv in [-20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0] {
        println!("{dv:>9} {:>22.5}", gap_junction_current(dv, 0.05));
    }

    let ring = [(0, 1), (1, 2), (2, 3), (3, 0)];
    let topology = Topology::from_edges(4, ring.iter().flat_map(|&(a, b)| [(a, b), (b, a)]))?;
    let v_dend = [-60.0, -55.0, -62.0, -58.0];
    let currents = exchange(&v_dend, &topology, 0.05)?;
    println!("\ncell  V_dend  net junction current");
    for (i, (v, c)) in v_dend.iter().zip(&currents).enumerate() {
        println!("{i:>4} {v:>7} {c:>21.6}");
    }
    println!("sum of currents: {:e}", currents.iter().sum::<f64>());
    Ok(())
}

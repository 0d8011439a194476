//! Simulates a connected 4x4x4 network and writes the somatic voltage trace
//! plus its JSON sidecar.
//!
//!     cargo run --release --example simulate_network -- [out.csv]

use std::path::PathBuf;

use olive_sim::engine::{run, SimulationConfig};
use olive_sim::model::CellParameters;

fn main() -> olive_sim::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("olive_trace.csv"));
    let config = SimulationConfig {
        grid_dim: 4,
        connected: true,
        duration_ms: 500.0,
        ..SimulationConfig::default()
    };
    let params = CellParameters::uniform(config.neurons());
    let topology = config.topology()?;
    println!(
        "{} cells, {} directed gap junctions",
        config.neurons(),
        topology.edge_count()
    );

    let trace = run(&config, &params, &topology)?;
    trace.write_csv(&out)?;
    let col = trace.column(0);
    let (lo, hi) = col
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("{} samples written to {}", trace.samples(), out.display());
    println!("cell 0 oscillates between {lo:.2} and {hi:.2} mV");
    Ok(())
}

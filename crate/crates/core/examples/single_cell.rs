//! One isolated cell: gate steady states at rest, then the somatic response
//! to a dendritic current pulse.
//!
//!     cargo run --release --example single_cell

use olive_sim::engine::{run, SimulationConfig};
use olive_sim::model::kinetics::gate;
use olive_sim::model::{initial_state, row, CellParameters, GateInput, Pulse, StimulusSchedule};
use olive_sim::topology::Topology;

fn main() -> olive_sim::Result<()> {
    let pulse = Pulse {
        neuron: 0,
        start_ms: 50.0,
        end_ms: 55.0,
        amplitude: 10.0,
    };
    let params = CellParameters::uniform(1).with_stimuli(StimulusSchedule::new(vec![pulse])?);

    let rest = initial_state(&params, 1)?;
    println!("resting state:");
    for r in 0..rest.vars() {
        println!("  {:<8} {:>10.5}", row::NAMES[r], rest.get(r, 0));
    }
    let input = GateInput {
        v: -60.0,
        ca: params.rest.ca_rest,
    };
    let h = gate("axon_na_h").expect("gate table entry");
    println!(
        "axonal Na h at -60 mV: inf {:.4}, tau {:.4} ms",
        h.steady_state(input),
        h.time_constant(input)
    );

    let config = SimulationConfig {
        grid_dim: 1,
        connected: false,
        duration_ms: 150.0,
        ..SimulationConfig::default()
    };
    let trace = run(&config, &params, &Topology::unconnected(1))?;
    println!("\n t (ms)   V_soma (mV)");
    for s in (40..=100).step_by(2) {
        println!("{:>7} {:>12.3}", trace.times[s], trace.row(s)[0]);
    }
    Ok(())
}

//! Runs the same network in f64 and f32 and reports box-plot statistics of
//! the somatic voltage deviation over an early and a late window.
//!
//!     cargo run --release --example precision_validation -- [grid_dim] [duration_ms]

use olive_sim::analysis::{compare, Span};
use olive_sim::engine::{run, SimulationConfig};
use olive_sim::model::CellParameters;
use olive_sim::precision::Precision;

fn main() -> olive_sim::Result<()> {
    let mut args = std::env::args().skip(1);
    let grid_dim = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let duration: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let config = SimulationConfig {
        grid_dim,
        duration_ms: duration,
        ..SimulationConfig::default()
    };
    let params = CellParameters::uniform(config.neurons());
    let topology = config.topology()?;

    let reference = run(&config, &params, &topology)?;
    let test = run(
        &SimulationConfig {
            precision: Precision::F32,
            ..config
        },
        &params,
        &topology,
    )?;
    let window = (duration / 10.0).min(1000.0);
    let report = compare(
        &reference,
        &test,
        &[
            Span::new(0.0, window),
            Span::new(duration - window, duration),
        ],
    )?;
    println!("{}", report.to_json()?);
    Ok(())
}

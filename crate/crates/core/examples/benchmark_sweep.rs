//! A short benchmark sweep in both modes, printed as the plot table.
//!
//!     cargo run --release --example benchmark_sweep -- [max_grid_dim]

use olive_sim::bench::{bench, emit_plot_data, BenchMode, BenchOptions, SweepSpec};

fn main() -> olive_sim::Result<()> {
    let max: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);
    let spec = SweepSpec::new((4..=max).collect())?;
    let results = bench(&spec, &BenchMode::ALL, &BenchOptions::default())?;
    for r in &results {
        println!(
            "{:>11} d={:<3} setup {:.4} s, best run {:.4} s, {:.2}x real time",
            r.mode.to_string(),
            r.grid_dim,
            r.setup_seconds,
            r.run_seconds_min,
            r.realtime_factor
        );
    }
    println!("\n{}", emit_plot_data(&results)?);
    Ok(())
}

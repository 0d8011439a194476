//! Generates the gap-junction network for a 9x9x9 grid and summarises its
//! degree and distance distributions.
//!
//!     cargo run --release --example topology -- [seed]

use olive_sim::topology::{generate, DEFAULT_AVG_DEGREE, DEFAULT_R_MAX};

fn main() -> olive_sim::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let t = generate(9, DEFAULT_AVG_DEGREE, DEFAULT_R_MAX, seed)?;
    t.validate()?;
    println!(
        "{} cells, {} edges, mean degree {}",
        t.neurons(),
        t.edge_count(),
        t.mean_degree()
    );

    let offsets = t.target_offsets();
    let mut degrees: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
    degrees.sort_unstable();
    println!(
        "in-degree min {} median {} max {}",
        degrees[0],
        degrees[degrees.len() / 2],
        degrees[degrees.len() - 1]
    );

    let mut bins = [0usize; 4];
    for r in t.edge_distances().expect("generated topology") {
        bins[(r.floor() as usize).min(3)] += 1;
    }
    for (k, count) in bins.iter().enumerate() {
        println!("  distance [{k}, {}): {count}", k + 1);
    }
    Ok(())
}

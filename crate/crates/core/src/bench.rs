//! Benchmark harness: size sweeps, setup/run split and min-of-N timing.
//!
//! Wall-clock times come from [`std::time::Instant`], a monotonic clock;
//! reading it costs well under 1 µs. Entries run strictly one after another.

use std::fmt;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::engine::{build_engine, sample_run, SimulationConfig};
use crate::error::{Error, Result};
use crate::model::{initial_state, CellParameters, STATE_VARS};
use crate::precision::Precision;
use crate::topology::{self, Topology};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Timed runs per entry.
pub const DEFAULT_RUNS: usize = 5;

/// IO sizes marked in plot tables: (label, neurons).
pub const SCALE_MARKERS: [(&str, u64); 3] = [
    ("mouse", 10_000),
    ("human-low", 1_000_000),
    ("human-high", 10_000_000),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Unconnected,
    Connected,
}

impl BenchMode {
    pub const ALL: [BenchMode; 2] = [BenchMode::Unconnected, BenchMode::Connected];

    pub fn is_connected(self) -> bool {
        self == BenchMode::Connected
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMode::Unconnected => "unconnected",
            BenchMode::Connected => "connected",
        })
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconnected" => Ok(BenchMode::Unconnected),
            "connected" => Ok(BenchMode::Connected),
            _ => Err(Error::config(format!(
                "unknown mode `{s}` (unconnected, connected)"
            ))),
        }
    }
}

/// Grid dimensions to benchmark, strictly increasing, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SweepSpec {
    dims: Vec<usize>,
}

impl SweepSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::config(format!("grid dimension {d} is below 2")));
        }
        if dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "sweep dimensions must increase strictly: {dims:?}"
            )));
        }
        Ok(SweepSpec { dims })
    }

    /// d = 4..=20
    pub fn small() -> Self {
        SweepSpec {
            dims: (4..=20).collect(),
        }
    }

    /// d = 30, 40, ..., 100
    pub fn large() -> Self {
        SweepSpec {
            dims: (3..=10).map(|k| 10 * k).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchOptions {
    pub duration_ms: f64,
    pub dt_ms: f64,
    pub steps_per_sample: usize,
    pub precision: Precision,
    pub thread_count: usize,
    pub seed: u64,
    pub avg_degree: f64,
    pub r_max: f64,
    pub runs: usize,
    /// Entries whose predicted footprint exceeds this are skipped.
    pub memory_budget_bytes: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let sim = SimulationConfig::default();
        BenchOptions {
            duration_ms: 100.0,
            dt_ms: sim.dt_ms,
            steps_per_sample: sim.steps_per_sample,
            precision: Precision::F64,
            thread_count: 0,
            seed: sim.seed,
            avg_degree: topology::DEFAULT_AVG_DEGREE,
            r_max: topology::DEFAULT_R_MAX,
            runs: DEFAULT_RUNS,
            memory_budget_bytes: 4 << 30,
        }
    }
}

impl BenchOptions {
    fn config(&self, grid_dim: usize, mode: BenchMode) -> SimulationConfig {
        SimulationConfig {
            grid_dim,
            connected: mode.is_connected(),
            duration_ms: self.duration_ms,
            dt_ms: self.dt_ms,
            steps_per_sample: self.steps_per_sample,
            precision: self.precision,
            seed: self.seed,
            thread_count: self.thread_count,
            avg_degree: self.avg_degree,
            r_max: self.r_max,
            record_full_state: false,
        }
    }
}

/// Predicted bytes for two state buffers plus the directed edge list.
pub fn predicted_footprint(
    n_cells: usize,
    precision: Precision,
    mode: BenchMode,
    avg_degree: f64,
) -> u64 {
    let buffers = (STATE_VARS * n_cells * precision.width() * 2) as u64;
    let edges = if mode.is_connected() {
        let pairs = (avg_degree * n_cells as f64 / 2.0).floor() as u64;
        2 * pairs * 2 * std::mem::size_of::<u32>() as u64
    } else {
        0
    };
    buffers + edges
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub mode: BenchMode,
    pub grid_dim: usize,
    pub n_cells: usize,
    /// Topology generation, state initialisation and engine construction.
    pub setup_seconds: f64,
    pub run_seconds: Vec<f64>,
    pub run_seconds_min: f64,
    pub simulated_ms: f64,
    /// Simulated seconds per wall-clock second of the fastest run.
    pub realtime_factor: f64,
    pub precision: Precision,
    pub thread_count: usize,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
    /// Why the entry did not run, if it did not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl BenchResult {
    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Benchmarks one network size.
pub fn bench_one(grid_dim: usize, mode: BenchMode, opts: &BenchOptions) -> Result<BenchResult> {
    let config = opts.config(grid_dim, mode);
    let samples = config.sample_count()?;
    let n = config.neurons();
    let threads = match opts.thread_count {
        0 => rayon::current_num_threads(),
        t => t,
    };
    let mut result = BenchResult {
        mode,
        grid_dim,
        n_cells: n,
        setup_seconds: 0.0,
        run_seconds: Vec::new(),
        run_seconds_min: 0.0,
        simulated_ms: config.duration_ms,
        realtime_factor: 0.0,
        precision: opts.precision,
        thread_count: threads,
        timestamp: now(),
        version: VERSION.to_string(),
        skipped: None,
    };
    let footprint = predicted_footprint(n, opts.precision, mode, opts.avg_degree);
    if footprint > opts.memory_budget_bytes {
        result.skipped = Some(format!(
            "predicted footprint {footprint} bytes exceeds budget {} bytes",
            opts.memory_budget_bytes
        ));
        return Ok(result);
    }
    if opts.runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }

    let params = CellParameters::uniform(n);
    let setup = Instant::now();
    let topology = if mode.is_connected() {
        topology::generate(grid_dim, opts.avg_degree, opts.r_max, opts.seed)?
    } else {
        Topology::unconnected(n)
    };
    let initial = initial_state(&params, n)?;
    let mut sim = build_engine(
        opts.precision,
        &params,
        &topology,
        &initial,
        config.dt_ms,
        config.connected,
        opts.thread_count,
    )?;
    result.setup_seconds = setup.elapsed().as_secs_f64();

    for _ in 0..opts.runs {
        sim.reset(&initial)?;
        let start = Instant::now();
        let trace = sample_run(sim.as_mut(), samples, config.steps_per_sample, false)?;
        result.run_seconds.push(start.elapsed().as_secs_f64());
        std::hint::black_box(trace);
    }
    result.run_seconds_min = result
        .run_seconds
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    result.realtime_factor = if result.run_seconds_min > 0.0 {
        config.duration_ms / 1000.0 / result.run_seconds_min
    } else {
        f64::INFINITY
    };
    Ok(result)
}

/// Runs every size of `spec` in every mode of `modes`, one at a time.
pub fn bench(
    spec: &SweepSpec,
    modes: &[BenchMode],
    opts: &BenchOptions,
) -> Result<Vec<BenchResult>> {
    let mut out = Vec::new();
    for &d in spec.dims() {
        for &mode in modes {
            out.push(bench_one(d, mode, opts)?);
        }
    }
    Ok(out)
}

/// Plot table `n_cells,run_seconds_min,realtime_factor,mode`, sorted by
/// size then mode, followed by rows marking IO scales (empty timings,
/// mode `scale:<label>`). Skipped entries are left out.
pub fn emit_plot_data(results: &[BenchResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::contract("no benchmark results to tabulate"));
    }
    let mut rows: Vec<&BenchResult> = results.iter().filter(|r| !r.is_skipped()).collect();
    rows.sort_by(|a, b| a.n_cells.cmp(&b.n_cells).then(a.mode.cmp(&b.mode)));
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["n_cells", "run_seconds_min", "realtime_factor", "mode"])?;
    for r in rows {
        out.write_record([
            r.n_cells.to_string(),
            r.run_seconds_min.to_string(),
            r.realtime_factor.to_string(),
            r.mode.to_string(),
        ])?;
    }
    for (label, n) in SCALE_MARKERS {
        out.write_record([
            n.to_string(),
            String::new(),
            String::new(),
            format!("scale:{label}"),
        ])?;
    }
    let bytes = out.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> BenchOptions {
        BenchOptions {
            duration_ms: 2.0,
            runs: 3,
            ..BenchOptions::default()
        }
    }

    #[test]
    fn sweep_specs() {
        assert_eq!(SweepSpec::small().dims().len(), 17);
        assert_eq!(
            SweepSpec::large().dims(),
            &[30, 40, 50, 60, 70, 80, 90, 100]
        );
        assert!(SweepSpec::new(vec![4, 4]).is_err());
        assert!(SweepSpec::new(vec![5, 4]).is_err());
        assert!(SweepSpec::new(vec![1]).is_err());
        assert!(SweepSpec::new(vec![]).unwrap().dims().is_empty());
    }

    #[test]
    fn empty_sweep_gives_no_results() {
        let r = bench(&SweepSpec::new(vec![]).unwrap(), &BenchMode::ALL, &quick()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn one_entry_has_all_timings() {
        let r = bench_one(3, BenchMode::Connected, &quick()).unwrap();
        assert_eq!(r.n_cells, 27);
        assert_eq!(r.run_seconds.len(), 3);
        assert_eq!(
            r.run_seconds_min,
            r.run_seconds.iter().copied().fold(f64::INFINITY, f64::min)
        );
        assert!(r.realtime_factor > 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<BenchResult>(&json).unwrap(), r);
    }

    #[test]
    fn memory_guard_skips() {
        let opts = BenchOptions {
            memory_budget_bytes: 1000,
            ..quick()
        };
        let r = bench_one(4, BenchMode::Unconnected, &opts).unwrap();
        assert!(r.is_skipped());
        assert!(r.run_seconds.is_empty());
        assert_eq!(
            predicted_footprint(64, Precision::F64, BenchMode::Unconnected, 10.0),
            14 * 64 * 8 * 2
        );
        assert_eq!(
            predicted_footprint(64, Precision::F32, BenchMode::Connected, 10.0),
            14 * 64 * 4 * 2 + 640 * 8
        );
    }

    fn fake(n: usize, mode: BenchMode, t: f64) -> BenchResult {
        BenchResult {
            mode,
            grid_dim: 0,
            n_cells: n,
            setup_seconds: 0.0,
            run_seconds: vec![t],
            run_seconds_min: t,
            simulated_ms: 100.0,
            realtime_factor: 0.1 / t,
            precision: Precision::F64,
            thread_count: 1,
            timestamp: 0,
            version: VERSION.into(),
            skipped: None,
        }
    }

    #[test]
    fn plot_table_sorted_with_markers() {
        let results = [
            fake(125, BenchMode::Connected, 0.5),
            fake(64, BenchMode::Connected, 0.25),
            fake(64, BenchMode::Unconnected, 0.2),
        ];
        let table = emit_plot_data(&results).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "n_cells,run_seconds_min,realtime_factor,mode");
        assert_eq!(lines[1], "64,0.2,0.5,unconnected");
        assert_eq!(lines[2], "64,0.25,0.4,connected");
        assert_eq!(lines[3], "125,0.5,0.2,connected");
        assert_eq!(lines[4], "10000,,,scale:mouse");
        assert_eq!(lines.len(), 4 + SCALE_MARKERS.len());
        assert!(emit_plot_data(&[]).is_err());
    }

    #[test]
    fn timer_overhead_below_a_microsecond() {
        let reads = 10_000;
        let start = Instant::now();
        for _ in 0..reads {
            std::hint::black_box(Instant::now());
        }
        assert!(start.elapsed().as_secs_f64() / (reads as f64) < 1e-6);
    }

    #[test]
    fn zero_duration_run_is_cheaper_than_setup() {
        let r = bench_one(
            10,
            BenchMode::Connected,
            &BenchOptions {
                duration_ms: 0.0,
                ..quick()
            },
        )
        .unwrap();
        assert!(r.run_seconds_min < r.setup_seconds, "{r:?}");
    }
}

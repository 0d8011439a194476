//! Command-line front end. `olive-sim <subcommand> --help` lists every flag.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{self, Span, StressKnobs};
use crate::bench::{self, BenchMode, BenchOptions, SweepSpec};
use crate::engine::{self, SimulationConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::model::CellParameters;
use crate::precision::Precision;
use crate::topology;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "olive-sim",
    version,
    about = "Inferior-olive network simulator and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a network and write the somatic voltage trace as CSV.
    Simulate(SimulateArgs),
    /// Time network sizes and write results as JSON.
    Bench(BenchArgs),
    /// Compare a test trace against a reference trace.
    Validate(ValidateArgs),
    /// Run the stress scenario in every precision and compare against f64.
    Stress(StressArgs),
    /// Generate a gap-junction edge list.
    Topology(TopologyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Base configuration (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cell parameters (JSON); defaults to the uniform network.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Grid dimension d; the network has d^3 cells.
    #[arg(long)]
    size: Option<usize>,
    /// Couple cells by gap junctions.
    #[arg(long, conflicts_with = "unconnected")]
    connected: bool,
    /// Simulate isolated cells.
    #[arg(long)]
    unconnected: bool,
    #[arg(long)]
    duration_ms: Option<f64>,
    #[arg(long)]
    dt_ms: Option<f64>,
    /// Euler steps between recorded samples.
    #[arg(long)]
    steps_per_sample: Option<usize>,
    /// f64, f32 or f32-approx-exp.
    #[arg(long)]
    precision: Option<Precision>,
    /// Topology seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    /// Also write every sampled full state as JSON to this path.
    #[arg(long)]
    full_state_out: Option<PathBuf>,
    /// Trace CSV; a `.json` sidecar with the configuration is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Unconnected,
    Connected,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepArg {
    Small,
    Large,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated grid dimensions, e.g. 4,5,6.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
    sizes: Option<Vec<usize>>,
    /// Predefined sweep: small (d = 4..20) or large (d = 30..100).
    #[arg(long, value_enum)]
    sweep: Option<SweepArg>,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Biological time per timed run.
    #[arg(long, default_value_t = 100.0)]
    duration_ms: f64,
    #[arg(long, default_value_t = bench::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value = "f64")]
    precision: Precision,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Topology seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Skip sizes whose predicted footprint exceeds this many MiB.
    #[arg(long, default_value_t = 4096)]
    memory_budget_mib: u64,
    /// Results JSON (array of entries).
    #[arg(long)]
    out: PathBuf,
    /// Also write the plot table CSV here.
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Reference trace CSV.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Test trace CSV.
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated spans `start-end` in ms; defaults to the whole trace.
    #[arg(long, value_delimiter = ',')]
    spans: Vec<String>,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StressArgs {
    /// Knobs JSON; defaults to the committed 64-cell scenario.
    #[arg(long)]
    knobs: Option<PathBuf>,
    /// Scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jitter_sigma: Option<f64>,
    #[arg(long)]
    pulse_rate_hz: Option<f64>,
    #[arg(long)]
    pulse_amp: Option<f64>,
    #[arg(long)]
    pulse_width_ms: Option<f64>,
    #[arg(long)]
    duration_ms: Option<f64>,
    /// Divide dt (and multiply steps per sample) by this factor.
    #[arg(long, default_value_t = 1)]
    dt_divisor: usize,
    /// Topology seed.
    #[arg(long, default_value_t = 1)]
    topology_seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory: scenario.json, trace_<precision>.csv, report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TopologyArgs {
    /// Grid dimension d.
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = topology::DEFAULT_AVG_DEGREE)]
    avg_degree: f64,
    #[arg(long, default_value_t = topology::DEFAULT_R_MAX)]
    rmax: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge list CSV; metadata goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_CONTRACT,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => run_bench(a),
        Command::Validate(a) => validate(a),
        Command::Stress(a) => stress(a),
        Command::Topology(a) => make_topology(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &serde_json::to_string_pretty(value)?)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => serde_json::from_str(&read(path)?)?,
        None => SimulationConfig::default(),
    };
    if let Some(v) = a.size {
        config.grid_dim = v;
    }
    if a.connected {
        config.connected = true;
    }
    if a.unconnected {
        config.connected = false;
    }
    if let Some(v) = a.duration_ms {
        config.duration_ms = v;
    }
    if let Some(v) = a.dt_ms {
        config.dt_ms = v;
    }
    if let Some(v) = a.steps_per_sample {
        config.steps_per_sample = v;
    }
    if let Some(v) = a.precision {
        config.precision = v;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.threads {
        config.thread_count = v;
    }
    if let Some(v) = a.avg_degree {
        config.avg_degree = v;
    }
    if let Some(v) = a.rmax {
        config.r_max = v;
    }
    config.record_full_state = a.full_state_out.is_some();
    config.validate()?;
    let n = config.neurons();
    let params = match &a.params {
        Some(path) => CellParameters::from_json(&read(path)?, Some(n))?,
        None => CellParameters::uniform(n),
    };
    let topology = config.topology()?;
    let mut trace = engine::run(&config, &params, &topology)?;
    trace.write_csv(&a.out)?;
    write_json(&sidecar_path(&a.out), &trace.sidecar())?;
    if let Some(path) = &a.full_state_out {
        write_json(path, &trace.full_state.take().unwrap_or_default())?;
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let spec = match (&a.sizes, a.sweep) {
        (Some(dims), _) => SweepSpec::new(dims.clone())?,
        (None, Some(SweepArg::Large)) => SweepSpec::large(),
        (None, _) => SweepSpec::small(),
    };
    let modes: &[BenchMode] = match a.mode {
        ModeArg::Unconnected => &[BenchMode::Unconnected],
        ModeArg::Connected => &[BenchMode::Connected],
        ModeArg::Both => &BenchMode::ALL,
    };
    let opts = BenchOptions {
        duration_ms: a.duration_ms,
        precision: a.precision,
        thread_count: a.threads,
        seed: a.seed,
        runs: a.runs,
        memory_budget_bytes: a.memory_budget_mib << 20,
        ..BenchOptions::default()
    };
    let results = bench::bench(&spec, modes, &opts)?;
    write_json(&a.out, &results)?;
    if let Some(path) = &a.plot_out {
        write(path, &bench::emit_plot_data(&results)?)?;
    }
    Ok(())
}

fn parse_span(text: &str) -> Result<Span> {
    let bad = || Error::config(format!("span `{text}` is not of the form start-end"));
    let (a, b) = text.trim().split_once('-').ok_or_else(bad)?;
    Ok(Span::new(
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn validate(a: ValidateArgs) -> Result<()> {
    let reference = TraceRecord::read_csv(&a.reference)?;
    let test = TraceRecord::read_csv(&a.test)?;
    let spans = if a.spans.is_empty() {
        match (reference.times.first(), reference.times.last()) {
            (Some(&s), Some(&e)) => vec![Span::new(s, e)],
            _ => Vec::new(),
        }
    } else {
        a.spans
            .iter()
            .map(|s| parse_span(s))
            .collect::<Result<_>>()?
    };
    let report = analysis::compare(&reference, &test, &spans)?;
    match &a.out {
        Some(path) => write(path, &report.to_json()?),
        None => {
            println!("{}", report.to_json()?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct StressSummary {
    precision: Precision,
    spike_counts: Vec<usize>,
    spiking_fraction: f64,
    max_abs_v_mv: f64,
    nonfinite_count: usize,
    divergence: Option<engine::DivergenceMark>,
    deviation: Option<analysis::DeviationReport>,
}

fn stress(a: StressArgs) -> Result<()> {
    let mut knobs = match &a.knobs {
        Some(path) => serde_json::from_str(&read(path)?)?,
        None => StressKnobs::desk_default(),
    };
    if let Some(v) = a.seed {
        knobs.seed = v;
    }
    if let Some(v) = a.jitter_sigma {
        knobs.jitter_sigma = v;
    }
    if let Some(v) = a.pulse_rate_hz {
        knobs.pulse_rate_hz = v;
    }
    if let Some(v) = a.pulse_amp {
        knobs.pulse_amp = v;
    }
    if let Some(v) = a.pulse_width_ms {
        knobs.pulse_width_ms = v;
    }
    if let Some(v) = a.duration_ms {
        knobs.duration_ms = v;
    }
    let summaries = run_stress(
        &knobs,
        a.dt_divisor,
        a.topology_seed,
        a.threads,
        Some(&a.out),
    )?;
    write_json(&a.out.join("report.json"), &summaries)
}

/// Grid dimension of a cubic network with `n` cells.
fn cube_root(n: usize) -> Result<usize> {
    let d = (n as f64).cbrt().round() as usize;
    if d.pow(3) == n {
        Ok(d)
    } else {
        Err(Error::config(format!(
            "{n} neurons do not form a cubic grid"
        )))
    }
}

fn run_stress(
    knobs: &StressKnobs,
    dt_divisor: usize,
    topology_seed: u64,
    threads: usize,
    out_dir: Option<&Path>,
) -> Result<Vec<StressSummary>> {
    if dt_divisor == 0 {
        return Err(Error::config("dt_divisor must be at least 1"));
    }
    let d = cube_root(knobs.neurons)?;
    let scenario = analysis::build_stress_scenario(&CellParameters::uniform(knobs.neurons), knobs)?;
    let params = scenario.params()?;
    let base = SimulationConfig::default();
    let mut config = SimulationConfig {
        grid_dim: d,
        connected: true,
        duration_ms: knobs.duration_ms,
        dt_ms: base.dt_ms / dt_divisor as f64,
        steps_per_sample: base.steps_per_sample * dt_divisor,
        seed: topology_seed,
        thread_count: threads,
        ..base
    };
    let topology = config.topology()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        scenario.write(&dir.join("scenario.json"))?;
    }
    let mut reference: Option<TraceRecord> = None;
    let mut out = Vec::new();
    for precision in Precision::ALL {
        config.precision = precision;
        let trace = engine::run(&config, &params, &topology)?;
        if let Some(dir) = out_dir {
            trace.write_csv(&dir.join(format!("trace_{precision}.csv")))?;
        }
        let counts = analysis::spike_count(&trace, analysis::SPIKE_THRESHOLD_MV);
        let deviation = match &reference {
            Some(r) => {
                let (s, e) = (r.times[0], r.times[r.samples() - 1]);
                Some(analysis::compare(r, &trace, &[Span::new(s, e)])?)
            }
            None => None,
        };
        out.push(StressSummary {
            precision,
            spiking_fraction: analysis::spiking_fraction(&counts),
            spike_counts: counts,
            max_abs_v_mv: trace
                .values()
                .iter()
                .filter(|v| v.is_finite())
                .fold(0.0, |m: f64, v| m.max(v.abs())),
            nonfinite_count: trace.nonfinite_count(),
            divergence: trace.divergence,
            deviation,
        });
        if reference.is_none() {
            reference = Some(trace);
        }
    }
    Ok(out)
}

fn make_topology(a: TopologyArgs) -> Result<()> {
    let t = topology::generate(a.size, a.avg_degree, a.rmax, a.seed)?;
    t.write_csv(&a.out)?;
    t.write_sidecar(&sidecar_path(&a.out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_parse() {
        assert_eq!(parse_span("0-1000").unwrap(), Span::new(0.0, 1000.0));
        assert_eq!(
            parse_span(" 9000 - 10000 ").unwrap(),
            Span::new(9000.0, 10000.0)
        );
        assert!(parse_span("5").is_err());
        assert!(parse_span("a-b").is_err());
    }

    #[test]
    fn cube_roots() {
        assert_eq!(cube_root(64).unwrap(), 4);
        assert_eq!(cube_root(729).unwrap(), 9);
        assert!(cube_root(65).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli_main(["olive-sim", "simulate", "--bogus"]), EXIT_USAGE);
        assert_eq!(cli_main(["olive-sim"]), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::Divergence {
                sample: 1,
                time_ms: 1.0
            }),
            EXIT_DIVERGENCE
        );
        assert_eq!(exit_code(&Error::Contract("x".into())), EXIT_CONTRACT);
    }
}

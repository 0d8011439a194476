//! Network time stepping.
//!
//! Each Forward-Euler step has two phases separated by a barrier: the
//! gap-junction exchange over dendritic voltages, then the local update of
//! every neuron from the current buffer into the other one. Buffers swap
//! roles after every step; nothing is updated in place. A sample costs
//! `steps_per_sample` fused steps and a single copy of somatic voltages.
//!
//! Parallel work is cut into fixed chunks of neurons (and whole target
//! segments for the exchange), so results are bitwise identical for every
//! thread count.

pub mod exchange;
pub mod trace;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::cell::{load_column, neuron_rhs, upload_params, NeuronParams};
use crate::model::stimulus::StimulusEvent;
use crate::model::{initial_state, row, CellParameters, StateMatrix, STATE_VARS};
use crate::precision::{Arith, F32ApproxExp, Precision, F32, F64};
use crate::topology::{self, Topology};

pub use exchange::{exchange, gap_junction_current, SegmentedEdges};
pub use trace::{DivergenceMark, TraceRecord, TraceSidecar};

/// Neurons per parallel work item.
pub const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    /// Network is `grid_dim^3` neurons.
    pub grid_dim: usize,
    pub connected: bool,
    pub duration_ms: f64,
    pub dt_ms: f64,
    pub steps_per_sample: usize,
    pub precision: Precision,
    pub seed: u64,
    /// 0 picks the number of available cores.
    pub thread_count: usize,
    pub avg_degree: f64,
    pub r_max: f64,
    /// Keep the full 14-variable state at every sample.
    pub record_full_state: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            grid_dim: 4,
            connected: true,
            duration_ms: 100.0,
            dt_ms: 0.025,
            steps_per_sample: 40,
            precision: Precision::F64,
            seed: 1,
            thread_count: 0,
            avg_degree: topology::DEFAULT_AVG_DEGREE,
            r_max: topology::DEFAULT_R_MAX,
            record_full_state: false,
        }
    }
}

impl SimulationConfig {
    pub fn neurons(&self) -> usize {
        self.grid_dim.pow(3)
    }

    pub fn sample_interval_ms(&self) -> f64 {
        self.dt_ms * self.steps_per_sample as f64
    }

    /// Number of sampled intervals (the trace has one more row).
    pub fn sample_count(&self) -> Result<usize> {
        self.validate()?;
        Ok((self.duration_ms / self.sample_interval_ms()).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ms.is_finite() && self.dt_ms > 0.0) {
            return Err(Error::config(format!(
                "dt_ms must be positive, got {}",
                self.dt_ms
            )));
        }
        if self.steps_per_sample == 0 {
            return Err(Error::config("steps_per_sample must be at least 1"));
        }
        if self.grid_dim == 0 {
            return Err(Error::config("grid_dim must be at least 1"));
        }
        let interval = self.sample_interval_ms();
        let ratio = self.duration_ms / interval;
        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0)
            || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0)
        {
            return Err(Error::config(format!(
                "duration_ms ({}) must be a non-negative multiple of dt_ms * steps_per_sample ({interval})",
                self.duration_ms
            )));
        }
        Ok(())
    }

    /// The network topology this configuration describes: generated from
    /// `seed` when connected, empty otherwise.
    pub fn topology(&self) -> Result<Topology> {
        if self.connected {
            topology::generate(self.grid_dim, self.avg_degree, self.r_max, self.seed)
        } else {
            Ok(Topology::unconnected(self.neurons()))
        }
    }
}

/// Writes `next = cur + dt * rhs(cur)` for neurons `start..start + len`,
/// where `out[r]` is row `r` of `next` restricted to that range.
#[inline]
#[allow(clippy::too_many_arguments)]
fn integrate_range<A: Arith>(
    cur: &[A::F],
    n: usize,
    start: usize,
    out: &mut [&mut [A::F]; STATE_VARS],
    params: &[NeuronParams<A::F>],
    i_gj: &[A::F],
    i_app: &[A::F],
    dt: A::F,
) {
    let len = out[0].len();
    for local in 0..len {
        let i = start + local;
        let s = load_column(cur, n, i);
        let d = neuron_rhs::<A>(&s, &params[i], i_gj[i], i_app[i]);
        for (r, row) in out.iter_mut().enumerate() {
            row[local] = s[r] + dt * d[r];
        }
    }
}

/// Per-chunk views of the 14 rows of a `[14 x n]` buffer.
fn chunked_rows<F>(buf: &mut [F], n: usize, chunk: usize) -> Vec<[&mut [F]; STATE_VARS]> {
    let mut rows: Vec<_> = buf.chunks_mut(n).map(|r| r.chunks_mut(chunk)).collect();
    let chunks = n.div_ceil(chunk);
    (0..chunks)
        .map(|_| std::array::from_fn(|r| rows[r].next().expect("row chunk")))
        .collect()
}

/// Double-buffered network integrator in one precision.
pub struct Engine<A: Arith> {
    n: usize,
    params: Vec<NeuronParams<A::F>>,
    g_gj: A::F,
    edges: Option<SegmentedEdges>,
    buffers: [Vec<A::F>; 2],
    active: usize,
    i_gj: Vec<A::F>,
    i_app: Vec<A::F>,
    stimulus: Vec<StimulusEvent>,
    stimulus_cursor: usize,
    step: u64,
    dt_ms: f64,
    dt: A::F,
    pool: Option<rayon::ThreadPool>,
    parallel: bool,
}

impl<A: Arith> Engine<A> {
    /// Uploads parameters, topology and initial state once. With
    /// `connected == false` the topology is ignored.
    pub fn new(
        params: &CellParameters,
        topology: &Topology,
        initial: &StateMatrix,
        dt_ms: f64,
        connected: bool,
        thread_count: usize,
    ) -> Result<Self> {
        let n = params.len();
        params.validate()?;
        if initial.shape() != (STATE_VARS, n) {
            return Err(Error::contract(format!(
                "initial state has shape {:?}, expected ({STATE_VARS}, {n})",
                initial.shape()
            )));
        }
        if topology.neurons() != n {
            return Err(Error::contract(format!(
                "topology has {} neurons, parameters {n}",
                topology.neurons()
            )));
        }
        if !(dt_ms.is_finite() && dt_ms > 0.0) {
            return Err(Error::config("dt_ms must be positive"));
        }
        let edges = if connected {
            Some(SegmentedEdges::from_topology(topology)?)
        } else {
            None
        };
        let threads = if thread_count == 0 {
            rayon::current_num_threads()
        } else {
            thread_count
        };
        let parallel = threads > 1 && n >= 2 * CHUNK;
        let pool = if parallel && thread_count != 0 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(thread_count)
                    .build()
                    .map_err(|e| Error::config(format!("cannot start thread pool: {e}")))?,
            )
        } else {
            None
        };
        let first: Vec<A::F> = initial.as_slice().iter().map(|&x| A::lit(x)).collect();
        Ok(Engine {
            n,
            params: upload_params::<A>(params),
            g_gj: A::lit(params.g_gj),
            edges,
            buffers: [first.clone(), first],
            active: 0,
            i_gj: vec![A::F::zero(); n],
            i_app: vec![A::F::zero(); n],
            stimulus: params.stimuli.timeline(),
            stimulus_cursor: 0,
            step: 0,
            dt_ms,
            dt: A::lit(dt_ms),
            pool,
            parallel,
        })
    }

    pub fn neurons(&self) -> usize {
        self.n
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn time_ms(&self) -> f64 {
        self.step as f64 * self.dt_ms
    }

    pub fn state(&self) -> &[A::F] {
        &self.buffers[self.active]
    }

    pub fn state_matrix(&self) -> StateMatrix {
        let values = self.state().iter().map(|&x| A::to_f64(x)).collect();
        StateMatrix::from_vec(STATE_VARS, self.n, values).expect("engine buffer shape")
    }

    pub fn v_soma(&self) -> &[A::F] {
        &self.state()[row::V_SOMA * self.n..(row::V_SOMA + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.state()
            .iter()
            .all(|x| num_traits::Float::is_finite(*x))
    }

    /// Largest excursion of any integrated gate outside `[0, 1]`.
    pub fn gate_range_violation(&self) -> f64 {
        let buf = self.state();
        row::GATES
            .flat_map(|r| buf[r * self.n..(r + 1) * self.n].iter())
            .map(|&g| {
                let g = A::to_f64(g);
                (-g).max(g - 1.0).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn apply_stimulus(&mut self, t_ms: f64) {
        while let Some(ev) = self.stimulus.get(self.stimulus_cursor) {
            if ev.time_ms > t_ms {
                break;
            }
            self.i_app[ev.neuron] = A::lit(ev.value);
            self.stimulus_cursor += 1;
        }
    }

    fn step_once(&mut self) {
        let t_ms = self.time_ms();
        self.apply_stimulus(t_ms);
        let n = self.n;
        let chunk = self.parallel.then_some(CHUNK);
        let (lo, hi) = self.buffers.split_at_mut(1);
        let (cur, next) = if self.active == 0 {
            (&lo[0], &mut hi[0])
        } else {
            (&hi[0], &mut lo[0])
        };
        let params = &self.params;
        let i_gj = &mut self.i_gj;
        let i_app = &self.i_app;
        let edges = self.edges.as_ref();
        let g_gj = self.g_gj;
        let dt = self.dt;

        let mut work = move || {
            if let Some(edges) = edges {
                let v_dend = &cur[row::V_DEND * n..(row::V_DEND + 1) * n];
                exchange::exchange_into::<A>(v_dend, edges, g_gj, i_gj, chunk);
            }
            let i_gj = &*i_gj;
            match chunk {
                Some(c) => chunked_rows(next, n, c)
                    .into_par_iter()
                    .enumerate()
                    .for_each(|(k, mut out)| {
                        integrate_range::<A>(cur, n, k * c, &mut out, params, i_gj, i_app, dt)
                    }),
                None => {
                    let mut out = chunked_rows(next, n, n).pop().expect("one chunk");
                    integrate_range::<A>(cur, n, 0, &mut out, params, i_gj, i_app, dt);
                }
            }
        };
        match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        }
        self.active ^= 1;
        self.step += 1;
    }

    /// Restarts from `initial` at `t = 0`, keeping parameters and topology.
    pub fn reset(&mut self, initial: &StateMatrix) -> Result<()> {
        if initial.shape() != (STATE_VARS, self.n) {
            return Err(Error::contract(format!(
                "initial state has shape {:?}, expected ({STATE_VARS}, {})",
                initial.shape(),
                self.n
            )));
        }
        for (dst, &x) in self.buffers[0].iter_mut().zip(initial.as_slice()) {
            *dst = A::lit(x);
        }
        self.active = 0;
        self.step = 0;
        self.stimulus_cursor = 0;
        self.i_app.fill(A::F::zero());
        self.i_gj.fill(A::F::zero());
        Ok(())
    }

    /// Runs `steps` fused Forward-Euler steps.
    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step_once();
        }
    }
}

/// Precision-erased view of an [`Engine`].
pub trait Simulator: Send {
    fn precision(&self) -> Precision;
    fn neurons(&self) -> usize;
    fn time_ms(&self) -> f64;
    fn advance(&mut self, steps: usize);
    fn is_finite(&self) -> bool;
    fn v_soma_into(&self, out: &mut Vec<f64>);
    fn state_matrix(&self) -> StateMatrix;
    fn gate_range_violation(&self) -> f64;
    fn reset(&mut self, initial: &StateMatrix) -> Result<()>;
}

impl<A: Arith> Simulator for Engine<A> {
    fn precision(&self) -> Precision {
        A::MODE
    }

    fn neurons(&self) -> usize {
        self.n
    }

    fn time_ms(&self) -> f64 {
        Engine::time_ms(self)
    }

    fn advance(&mut self, steps: usize) {
        Engine::advance(self, steps)
    }

    fn is_finite(&self) -> bool {
        Engine::is_finite(self)
    }

    fn v_soma_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.v_soma().iter().map(|&x| A::to_f64(x)));
    }

    fn state_matrix(&self) -> StateMatrix {
        Engine::state_matrix(self)
    }

    fn gate_range_violation(&self) -> f64 {
        Engine::gate_range_violation(self)
    }

    fn reset(&mut self, initial: &StateMatrix) -> Result<()> {
        Engine::reset(self, initial)
    }
}

/// Builds an engine in the precision named by `precision`.
pub fn build_engine(
    precision: Precision,
    params: &CellParameters,
    topology: &Topology,
    initial: &StateMatrix,
    dt_ms: f64,
    connected: bool,
    thread_count: usize,
) -> Result<Box<dyn Simulator>> {
    Ok(match precision {
        Precision::F64 => Box::new(Engine::<F64>::new(
            params,
            topology,
            initial,
            dt_ms,
            connected,
            thread_count,
        )?),
        Precision::F32 => Box::new(Engine::<F32>::new(
            params,
            topology,
            initial,
            dt_ms,
            connected,
            thread_count,
        )?),
        Precision::F32ApproxExp => Box::new(Engine::<F32ApproxExp>::new(
            params,
            topology,
            initial,
            dt_ms,
            connected,
            thread_count,
        )?),
    })
}

/// Samples an engine `samples` times, `steps_per_sample` steps apart,
/// starting with the current state. Divergence aborts unless the engine
/// runs in reduced-precision-exponential mode, where it is only recorded.
pub fn sample_run(
    sim: &mut dyn Simulator,
    samples: usize,
    steps_per_sample: usize,
    record_full_state: bool,
) -> Result<TraceRecord> {
    let tolerant = sim.precision() == Precision::F32ApproxExp;
    let mut trace = TraceRecord::new(sim.neurons());
    let mut states = record_full_state.then(Vec::new);
    let mut row_buf = Vec::with_capacity(sim.neurons());
    for sample in 0..=samples {
        if sample > 0 {
            sim.advance(steps_per_sample);
        }
        if trace.divergence.is_none() && !sim.is_finite() {
            let mark = DivergenceMark {
                sample,
                time_ms: sim.time_ms(),
            };
            if !tolerant {
                return Err(Error::Divergence {
                    sample,
                    time_ms: mark.time_ms,
                });
            }
            trace.divergence = Some(mark);
        }
        sim.v_soma_into(&mut row_buf);
        trace.push(sim.time_ms(), &row_buf);
        if let Some(states) = states.as_mut() {
            states.push(sim.state_matrix());
        }
    }
    trace.full_state = states;
    Ok(trace)
}

/// Simulates `config.duration_ms` of network time from the resting state
/// and returns the somatic voltage trace, one row per sample including
/// `t = 0`.
pub fn run(
    config: &SimulationConfig,
    params: &CellParameters,
    topology: &Topology,
) -> Result<TraceRecord> {
    let samples = config.sample_count()?;
    let n = params.len();
    if config.connected && topology.neurons() != n {
        return Err(Error::contract(format!(
            "topology has {} neurons, parameters {n}",
            topology.neurons()
        )));
    }
    let initial = initial_state(params, n)?;
    let empty;
    let topology = if config.connected {
        topology
    } else {
        empty = Topology::unconnected(n);
        &empty
    };
    let mut sim = build_engine(
        config.precision,
        params,
        topology,
        &initial,
        config.dt_ms,
        config.connected,
        config.thread_count,
    )?;
    let mut trace = sample_run(
        sim.as_mut(),
        samples,
        config.steps_per_sample,
        config.record_full_state,
    )?;
    trace.config = Some(config.clone());
    Ok(trace)
}

/// One Forward-Euler step of the whole network from `state` at time `t_ms`,
/// in `f64`. Returns a fresh state; the input is untouched.
pub fn euler_step(
    state: &StateMatrix,
    params: &CellParameters,
    topology: &Topology,
    t_ms: f64,
    dt_ms: f64,
) -> Result<StateMatrix> {
    let n = params.len();
    if state.shape() != (STATE_VARS, n) || topology.neurons() != n {
        return Err(Error::contract(format!(
            "state {:?}, topology {} neurons, parameters {n}",
            state.shape(),
            topology.neurons()
        )));
    }
    if !(dt_ms.is_finite() && dt_ms > 0.0) {
        return Err(Error::config("dt_ms must be positive"));
    }
    let i_gj = exchange(state.row(row::V_DEND), topology, params.g_gj)?;
    let i_app: Vec<f64> = (0..n).map(|i| params.applied_current(i, t_ms)).collect();
    let uploaded = upload_params::<F64>(params);
    let mut next = StateMatrix::zeros(STATE_VARS, n);
    let mut out = chunked_rows(next.as_mut_slice(), n, n)
        .pop()
        .expect("one chunk");
    integrate_range::<F64>(
        state.as_slice(),
        n,
        0,
        &mut out,
        &uploaded,
        &i_gj,
        &i_app,
        dt_ms,
    );
    Ok(next)
}

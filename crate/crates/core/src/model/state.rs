//! Structure-of-arrays neuron state.

use serde::{Deserialize, Serialize};

use super::kinetics::{GateInput, GATES};
use super::params::CellParameters;
use crate::error::{Error, Result};

/// Row indices of the state matrix.
pub mod row {
    pub const V_SOMA: usize = 0;
    pub const V_DEND: usize = 1;
    pub const V_AXON: usize = 2;
    pub const SOMA_K: usize = 3;
    pub const SOMA_L: usize = 4;
    pub const SOMA_H: usize = 5;
    pub const SOMA_N: usize = 6;
    pub const SOMA_X: usize = 7;
    pub const AXON_H: usize = 8;
    pub const AXON_X: usize = 9;
    pub const DEND_R: usize = 10;
    pub const DEND_S: usize = 11;
    pub const DEND_Q: usize = 12;
    pub const CA: usize = 13;

    pub const GATES: std::ops::Range<usize> = SOMA_K..CA;

    pub const NAMES: [&str; super::STATE_VARS] = [
        "v_soma", "v_dend", "v_axon", "soma_k", "soma_l", "soma_h", "soma_n", "soma_x", "axon_h",
        "axon_x", "dend_r", "dend_s", "dend_q", "ca_conc",
    ];
}

/// State variables per neuron in the full model.
pub const STATE_VARS: usize = 14;

/// `[vars x neurons]` matrix stored row-major: each variable is contiguous
/// across all neurons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMatrix<F = f64> {
    vars: usize,
    neurons: usize,
    values: Vec<F>,
}

impl<F: Copy + Default> StateMatrix<F> {
    pub fn zeros(vars: usize, neurons: usize) -> Self {
        StateMatrix {
            vars,
            neurons,
            values: vec![F::default(); vars * neurons],
        }
    }

    pub fn from_vec(vars: usize, neurons: usize, values: Vec<F>) -> Result<Self> {
        if values.len() != vars * neurons {
            return Err(Error::contract(format!(
                "state buffer has {} values, expected {vars} x {neurons}",
                values.len()
            )));
        }
        Ok(StateMatrix {
            vars,
            neurons,
            values,
        })
    }
}

impl<F: Copy> StateMatrix<F> {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.vars, self.neurons)
    }

    pub fn row(&self, var: usize) -> &[F] {
        &self.values[var * self.neurons..(var + 1) * self.neurons]
    }

    pub fn row_mut(&mut self, var: usize) -> &mut [F] {
        &mut self.values[var * self.neurons..(var + 1) * self.neurons]
    }

    #[inline]
    pub fn get(&self, var: usize, neuron: usize) -> F {
        self.values[var * self.neurons + neuron]
    }

    #[inline]
    pub fn set(&mut self, var: usize, neuron: usize, value: F) {
        self.values[var * self.neurons + neuron] = value;
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.values
    }

    /// Values of one neuron, in row order.
    pub fn column(&self, neuron: usize) -> Vec<F> {
        (0..self.vars).map(|v| self.get(v, neuron)).collect()
    }

    pub fn map<G: Copy>(&self, f: impl FnMut(F) -> G) -> StateMatrix<G> {
        StateMatrix {
            vars: self.vars,
            neurons: self.neurons,
            values: self.values.iter().copied().map(f).collect(),
        }
    }
}

/// Resting point used to build initial states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestingState {
    /// Membrane voltage of all three compartments, mV.
    pub v_rest: f64,
    /// Dendritic calcium concentration.
    pub ca_rest: f64,
}

impl Default for RestingState {
    fn default() -> Self {
        RestingState {
            v_rest: -60.0,
            ca_rest: 3.7152,
        }
    }
}

/// Full-model state for `n` neurons at `rest`, with every integrated gate at
/// its steady state for the resting voltage.
pub fn initial_state_at(rest: RestingState, n: usize) -> Result<StateMatrix> {
    if n == 0 {
        return Err(Error::contract("initial_state needs at least one neuron"));
    }
    let mut state = StateMatrix::zeros(STATE_VARS, n);
    for r in [row::V_SOMA, row::V_DEND, row::V_AXON] {
        state.row_mut(r).fill(rest.v_rest);
    }
    state.row_mut(row::CA).fill(rest.ca_rest);
    let input = GateInput {
        v: rest.v_rest,
        ca: rest.ca_rest,
    };
    for gate in GATES.iter().filter(|g| !g.instantaneous) {
        let r = gate.row.expect("integrated gate has a row");
        state.row_mut(r).fill(gate.steady_state(input));
    }
    Ok(state)
}

/// Initial state for the neurons described by `params` (one column per
/// neuron), using the parameters' resting point.
pub fn initial_state(params: &CellParameters, n: usize) -> Result<StateMatrix> {
    if params.len() != n {
        return Err(Error::contract(format!(
            "parameters describe {} neurons, asked for {n}",
            params.len()
        )));
    }
    initial_state_at(params.rest, n)
}

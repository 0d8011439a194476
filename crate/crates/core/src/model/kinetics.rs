//! Channel kinetics: scalar building blocks and the gate table.
//!
//! The per-step kernel in [`super::cell`] hardcodes every expression for
//! speed. The table here describes the same gates with closed parameter sets
//! and is what [`super::state::initial_state`] uses to place gates at their
//! steady state, so the two descriptions are checked against each other.
//!
//! Kinetic forms and constants:
//!
//! ```text
//! soma  k   k_inf = 1/(1+exp(-(V+61)/4.2))            tau_k = 1
//! soma  l   l_inf = 1/(1+exp((V+85.5)/8.5))           tau_l = 20 exp((V+160)/30)/(1+exp((V+84)/7.3)) + 35
//! soma  m   m_inf = 1/(1+exp(-(V+30)/5.5))            instantaneous
//! soma  h   h_inf = 1/(1+exp((V+70)/5.8))             tau_h = 3 exp(-(V+40)/33)
//! soma  n   n_inf = 1/(1+exp(-(V+3)/10))              tau_n = 5 + 47 exp((V+50)/900)
//! soma  x   a = 0.13(V+25)/(1-exp(-(V+25)/10)), b = 1.69 exp(-0.0125(V+35)), x_inf = a/(a+b), tau = 1/(a+b)
//! axon  m   m_inf = 1/(1+exp(-(V+30)/5.5))            instantaneous
//! axon  h   h_inf = 1/(1+exp((V+60)/5.8))             tau_h = 1.5 exp(-(V+40)/33)
//! axon  x   as soma x
//! dend  r   a = 1.7/(1+exp(-(V-5)/13.9)), b = 0.02(V+8.5)/(exp((V+8.5)/5)-1), r_inf = a/(a+b), tau = 5/(a+b)
//! dend  s   a = min(2e-5 Ca, 0.01), b = 0.015, s_inf = a/(a+b), tau = 1/(a+b)
//! dend  q   q_inf = 1/(1+exp((V+80)/4))               tau_q = 1/(exp(-0.086V-14.6) + exp(0.070V-1.87))
//! calcium   dCa/dt = -3 I_CaH - 0.075 Ca
//! ```

use serde::{Deserialize, Serialize};

use super::state::row;

/// Steady states and time constant of the axonal sodium channel.
///
/// Returns `(m_inf, h_inf, tau_h)`.
#[inline]
pub fn na_axon_kinetics(v_axon: f64) -> (f64, f64, f64) {
    let m_inf = 1.0 / (1.0 + (-(v_axon + 30.0) / 5.5).exp());
    let h_inf = 1.0 / (1.0 + ((v_axon + 60.0) / 5.8).exp());
    let tau_h = 1.5 * (-(v_axon + 40.0) / 33.0).exp();
    (m_inf, h_inf, tau_h)
}

/// Ohmic channel current `g_bar * prod(gate^k) * (v - e_rev)`.
#[inline]
pub fn channel_current(g_bar: f64, gates: &[(f64, u32)], v: f64, e_rev: f64) -> f64 {
    let open: f64 = gates.iter().map(|&(n, k)| n.powi(k as i32)).product();
    g_bar * open * (v - e_rev)
}

/// Relaxation rate of a gating variable towards its steady state.
#[inline]
pub fn gate_derivative(n: f64, n_inf: f64, tau: f64) -> f64 {
    (n_inf - n) / tau
}

/// Resistive current flowing into compartment `self` from `other`.
#[inline]
pub fn compartment_current(g: f64, v_self: f64, v_other: f64) -> f64 {
    g * (v_other - v_self)
}

/// Inputs a gate may depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInput {
    /// Membrane voltage of the compartment hosting the channel, mV.
    pub v: f64,
    /// Dendritic calcium concentration.
    pub ca: f64,
}

/// `x / (1 - exp(-x / slope))` style rate with its removable singularity
/// resolved.
fn linoid(scale: f64, v_half: f64, slope: f64, v: f64) -> f64 {
    let w = (v - v_half) / slope;
    if w.abs() < 1e-9 {
        scale * slope * (1.0 + 0.5 * w)
    } else {
        scale * (v - v_half) / (1.0 - (-w).exp())
    }
}

/// A transition rate (1/ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Rate {
    Constant {
        value: f64,
    },
    /// `max / (1 + exp(-(V - v_half) / slope))`
    Sigmoid {
        max: f64,
        v_half: f64,
        slope: f64,
    },
    /// `scale (V - v_half) / (1 - exp(-(V - v_half) / slope))`
    Linoid {
        scale: f64,
        v_half: f64,
        slope: f64,
    },
    /// `scale exp(-(V - v_half) / slope)`
    Exponential {
        scale: f64,
        v_half: f64,
        slope: f64,
    },
    /// `min(per_conc * Ca, cap)`
    CalciumLinear {
        per_conc: f64,
        cap: f64,
    },
}

impl Rate {
    pub fn eval(&self, input: GateInput) -> f64 {
        let v = input.v;
        match *self {
            Rate::Constant { value } => value,
            Rate::Sigmoid { max, v_half, slope } => max / (1.0 + (-(v - v_half) / slope).exp()),
            Rate::Linoid {
                scale,
                v_half,
                slope,
            } => linoid(scale, v_half, slope, v),
            Rate::Exponential {
                scale,
                v_half,
                slope,
            } => scale * (-(v - v_half) / slope).exp(),
            Rate::CalciumLinear { per_conc, cap } => (per_conc * input.ca).min(cap),
        }
    }
}

/// Voltage-dependent time constant (ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TimeConstant {
    Constant {
        value: f64,
    },
    /// `offset + scale exp(-(V - v_half) / slope)`
    Exponential {
        offset: f64,
        scale: f64,
        v_half: f64,
        slope: f64,
    },
    /// `offset + scale exp(-(V - v_num)/k_num) / (1 + exp(-(V - v_den)/k_den))`
    Rational {
        offset: f64,
        scale: f64,
        v_num: f64,
        k_num: f64,
        v_den: f64,
        k_den: f64,
    },
    /// `1 / (exp(a1 V + b1) + exp(a2 V + b2))`
    InverseExpSum {
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
    },
}

impl TimeConstant {
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            TimeConstant::Constant { value } => value,
            TimeConstant::Exponential {
                offset,
                scale,
                v_half,
                slope,
            } => offset + scale * (-(v - v_half) / slope).exp(),
            TimeConstant::Rational {
                offset,
                scale,
                v_num,
                k_num,
                v_den,
                k_den,
            } => {
                offset + scale * (-(v - v_num) / k_num).exp() / (1.0 + (-(v - v_den) / k_den).exp())
            }
            TimeConstant::InverseExpSum { a1, b1, a2, b2 } => {
                1.0 / ((a1 * v + b1).exp() + (a2 * v + b2).exp())
            }
        }
    }
}

/// Steady state and relaxation speed of one gating variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Kinetics {
    /// `n_inf = 1 / (1 + exp(-(V - v_half) / slope))`; negative slope gives
    /// an inactivation curve.
    Boltzmann {
        v_half: f64,
        slope: f64,
        tau: TimeConstant,
    },
    /// `n_inf = a / (a + b)`, `tau = tau_scale / (a + b)`.
    AlphaBeta {
        alpha: Rate,
        beta: Rate,
        tau_scale: f64,
    },
}

/// Which compartment voltage drives a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compartment {
    Soma,
    Dendrite,
    Axon,
}

impl Compartment {
    pub fn voltage_row(self) -> usize {
        match self {
            Compartment::Soma => row::V_SOMA,
            Compartment::Dendrite => row::V_DEND,
            Compartment::Axon => row::V_AXON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateKinetics {
    pub name: &'static str,
    pub compartment: Compartment,
    pub kinetics: Kinetics,
    /// Power the gate is raised to in its channel current.
    pub exponent: u32,
    /// Gate is pinned to its steady state instead of integrated.
    pub instantaneous: bool,
    /// State row for integrated gates.
    pub row: Option<usize>,
}

impl GateKinetics {
    pub fn steady_state(&self, input: GateInput) -> f64 {
        match self.kinetics {
            Kinetics::Boltzmann { v_half, slope, .. } => {
                1.0 / (1.0 + (-(input.v - v_half) / slope).exp())
            }
            Kinetics::AlphaBeta { alpha, beta, .. } => {
                let a = alpha.eval(input);
                let b = beta.eval(input);
                a / (a + b)
            }
        }
    }

    pub fn time_constant(&self, input: GateInput) -> f64 {
        match self.kinetics {
            Kinetics::Boltzmann { tau, .. } => tau.eval(input.v),
            Kinetics::AlphaBeta {
                alpha,
                beta,
                tau_scale,
            } => tau_scale / (alpha.eval(input) + beta.eval(input)),
        }
    }
}

const fn sigmoid_gate(
    name: &'static str,
    compartment: Compartment,
    v_half: f64,
    slope: f64,
    tau: TimeConstant,
    exponent: u32,
    row: Option<usize>,
) -> GateKinetics {
    GateKinetics {
        name,
        compartment,
        kinetics: Kinetics::Boltzmann { v_half, slope, tau },
        exponent,
        instantaneous: row.is_none(),
        row,
    }
}

const POTASSIUM_X: Kinetics = Kinetics::AlphaBeta {
    alpha: Rate::Linoid {
        scale: 0.13,
        v_half: -25.0,
        slope: 10.0,
    },
    beta: Rate::Exponential {
        scale: 1.69,
        v_half: -35.0,
        slope: 80.0,
    },
    tau_scale: 1.0,
};

const INSTANT: TimeConstant = TimeConstant::Constant { value: 0.0 };

/// Every gate of the cell, integrated ones first in state-row order.
pub const GATES: [GateKinetics; 12] = [
    sigmoid_gate(
        "soma_cal_k",
        Compartment::Soma,
        -61.0,
        4.2,
        TimeConstant::Constant { value: 1.0 },
        3,
        Some(row::SOMA_K),
    ),
    sigmoid_gate(
        "soma_cal_l",
        Compartment::Soma,
        -85.5,
        -8.5,
        TimeConstant::Rational {
            offset: 35.0,
            scale: 20.0,
            v_num: -160.0,
            k_num: -30.0,
            v_den: -84.0,
            k_den: -7.3,
        },
        1,
        Some(row::SOMA_L),
    ),
    sigmoid_gate(
        "soma_na_h",
        Compartment::Soma,
        -70.0,
        -5.8,
        TimeConstant::Exponential {
            offset: 0.0,
            scale: 3.0,
            v_half: -40.0,
            slope: 33.0,
        },
        1,
        Some(row::SOMA_H),
    ),
    sigmoid_gate(
        "soma_kdr_n",
        Compartment::Soma,
        -3.0,
        10.0,
        TimeConstant::Exponential {
            offset: 5.0,
            scale: 47.0,
            v_half: -50.0,
            slope: -900.0,
        },
        4,
        Some(row::SOMA_N),
    ),
    GateKinetics {
        name: "soma_k_x",
        compartment: Compartment::Soma,
        kinetics: POTASSIUM_X,
        exponent: 4,
        instantaneous: false,
        row: Some(row::SOMA_X),
    },
    sigmoid_gate(
        "axon_na_h",
        Compartment::Axon,
        -60.0,
        -5.8,
        TimeConstant::Exponential {
            offset: 0.0,
            scale: 1.5,
            v_half: -40.0,
            slope: 33.0,
        },
        1,
        Some(row::AXON_H),
    ),
    GateKinetics {
        name: "axon_k_x",
        compartment: Compartment::Axon,
        kinetics: POTASSIUM_X,
        exponent: 4,
        instantaneous: false,
        row: Some(row::AXON_X),
    },
    GateKinetics {
        name: "dend_cah_r",
        compartment: Compartment::Dendrite,
        kinetics: Kinetics::AlphaBeta {
            alpha: Rate::Sigmoid {
                max: 1.7,
                v_half: 5.0,
                slope: 13.9,
            },
            beta: Rate::Linoid {
                scale: -0.02,
                v_half: -8.5,
                slope: -5.0,
            },
            tau_scale: 5.0,
        },
        exponent: 2,
        instantaneous: false,
        row: Some(row::DEND_R),
    },
    GateKinetics {
        name: "dend_kca_s",
        compartment: Compartment::Dendrite,
        kinetics: Kinetics::AlphaBeta {
            alpha: Rate::CalciumLinear {
                per_conc: 2e-5,
                cap: 0.01,
            },
            beta: Rate::Constant { value: 0.015 },
            tau_scale: 1.0,
        },
        exponent: 1,
        instantaneous: false,
        row: Some(row::DEND_S),
    },
    sigmoid_gate(
        "dend_h_q",
        Compartment::Dendrite,
        -80.0,
        -4.0,
        TimeConstant::InverseExpSum {
            a1: -0.086,
            b1: -14.6,
            a2: 0.070,
            b2: -1.87,
        },
        1,
        Some(row::DEND_Q),
    ),
    sigmoid_gate("soma_na_m", Compartment::Soma, -30.0, 5.5, INSTANT, 3, None),
    sigmoid_gate("axon_na_m", Compartment::Axon, -30.0, 5.5, INSTANT, 3, None),
];

pub fn gate(name: &str) -> Option<&'static GateKinetics> {
    GATES.iter().find(|g| g.name == name)
}

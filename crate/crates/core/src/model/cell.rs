//! Right-hand side of the cell equations.
//!
//! One fused kernel evaluates every channel, compartment and calcium term of
//! a neuron. It is generic over [`Arith`] so the same code runs in `f64`,
//! `f32` and reduced-precision-exponential `f32`.

use num_traits::{Float, One, Zero};

use super::params::CellParameters;
use super::state::{row, StateMatrix, STATE_VARS};
use crate::error::{Error, Result};
use crate::precision::{Arith, F64};

/// Parameters of one neuron in kernel precision, with the area-scaled
/// coupling conductances precomputed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeuronParams<F> {
    pub g_na_s: F,
    pub g_kdr_s: F,
    pub g_k_s: F,
    pub g_cal: F,
    pub g_ls: F,
    pub g_na_a: F,
    pub g_k_a: F,
    pub g_la: F,
    pub g_cah: F,
    pub g_kca: F,
    pub g_h: F,
    pub g_ld: F,
    pub e_na: F,
    pub e_k: F,
    pub e_ca: F,
    pub e_h: F,
    pub e_leak: F,
    pub c_soma: F,
    pub c_dend: F,
    pub c_axon: F,
    /// soma side of the soma-dendrite link, `g_int / p_soma_dend`
    pub g_soma_from_dend: F,
    /// dendrite side, `g_int / (1 - p_soma_dend)`
    pub g_dend_from_soma: F,
    /// soma side of the soma-axon link, `g_int / (1 - p_axon_soma)`
    pub g_soma_from_axon: F,
    /// axon side, `g_int / p_axon_soma`
    pub g_axon_from_soma: F,
    pub ca_influx: F,
    pub ca_decay: F,
}

impl<F: Float> NeuronParams<F> {
    /// Converts the parameters of neuron `i` to kernel precision.
    pub fn from_cell(params: &CellParameters, i: usize, conv: impl Fn(f64) -> F) -> Self {
        let c = &params.conductances;
        let e = &params.reversal_potentials;
        let cap = &params.capacitances;
        let k = &params.coupling;
        let g_int = k.g_int[i];
        let p1 = k.p_soma_dend[i];
        let p2 = k.p_axon_soma[i];
        NeuronParams {
            g_na_s: conv(c.na_soma[i]),
            g_kdr_s: conv(c.kdr_soma[i]),
            g_k_s: conv(c.k_soma[i]),
            g_cal: conv(c.cal_soma[i]),
            g_ls: conv(c.leak_soma[i]),
            g_na_a: conv(c.na_axon[i]),
            g_k_a: conv(c.k_axon[i]),
            g_la: conv(c.leak_axon[i]),
            g_cah: conv(c.cah_dend[i]),
            g_kca: conv(c.kca_dend[i]),
            g_h: conv(c.h_dend[i]),
            g_ld: conv(c.leak_dend[i]),
            e_na: conv(e.na[i]),
            e_k: conv(e.k[i]),
            e_ca: conv(e.ca[i]),
            e_h: conv(e.h[i]),
            e_leak: conv(e.leak[i]),
            c_soma: conv(cap.soma[i]),
            c_dend: conv(cap.dend[i]),
            c_axon: conv(cap.axon[i]),
            g_soma_from_dend: conv(g_int / p1),
            g_dend_from_soma: conv(g_int / (1.0 - p1)),
            g_soma_from_axon: conv(g_int / (1.0 - p2)),
            g_axon_from_soma: conv(g_int / p2),
            ca_influx: conv(params.calcium.influx[i]),
            ca_decay: conv(params.calcium.decay[i]),
        }
    }
}

/// Parameters of a whole network in kernel precision.
pub fn upload_params<A: Arith>(params: &CellParameters) -> Vec<NeuronParams<A::F>> {
    (0..params.len())
        .map(|i| NeuronParams::from_cell(params, i, A::lit))
        .collect()
}

/// Steady states and time constants of the ten integrated gates, in state
/// row order starting at `row::SOMA_K`, plus the two instantaneous sodium
/// activations.
#[derive(Debug, Clone, Copy)]
pub struct GateRates<F> {
    pub inf: [F; 10],
    pub tau: [F; 10],
    pub m_soma: F,
    pub m_axon: F,
}

#[inline(always)]
fn sigmoid<A: Arith>(x: A::F) -> A::F {
    let one = A::F::one();
    one / (one + A::exp(x))
}

/// Evaluates every gate's kinetics at the given compartment voltages and
/// calcium concentration.
#[inline(always)]
pub fn gate_rates<A: Arith>(v_soma: A::F, v_dend: A::F, v_axon: A::F, ca: A::F) -> GateRates<A::F> {
    let lit = A::lit;
    let one = A::F::one();

    // soma CaL: k, l
    let k_inf = sigmoid::<A>(-(v_soma + lit(61.0)) / lit(4.2));
    let tau_k = one;
    let l_inf = sigmoid::<A>((v_soma + lit(85.5)) / lit(8.5));
    let tau_l = lit(20.0) * A::exp((v_soma + lit(160.0)) / lit(30.0))
        / (one + A::exp((v_soma + lit(84.0)) / lit(7.3)))
        + lit(35.0);

    // soma Na: m (instantaneous), h
    let m_soma = sigmoid::<A>(-(v_soma + lit(30.0)) / lit(5.5));
    let h_inf_s = sigmoid::<A>((v_soma + lit(70.0)) / lit(5.8));
    let tau_h_s = lit(3.0) * A::exp(-(v_soma + lit(40.0)) / lit(33.0));

    // soma Kdr: n
    let n_inf = sigmoid::<A>(-(v_soma + lit(3.0)) / lit(10.0));
    let tau_n = lit(5.0) + lit(47.0) * A::exp((v_soma + lit(50.0)) / lit(900.0));

    let (x_inf_s, tau_x_s) = potassium_x::<A>(v_soma);

    // axon Na: m (instantaneous), h
    let m_axon = sigmoid::<A>(-(v_axon + lit(30.0)) / lit(5.5));
    let h_inf_a = sigmoid::<A>((v_axon + lit(60.0)) / lit(5.8));
    let tau_h_a = lit(1.5) * A::exp(-(v_axon + lit(40.0)) / lit(33.0));

    let (x_inf_a, tau_x_a) = potassium_x::<A>(v_axon);

    // dendrite CaH: r
    let alpha_r = lit(1.7) * sigmoid::<A>(-(v_dend - lit(5.0)) / lit(13.9));
    let beta_r = lit(0.1) * A::exprel_inv((v_dend + lit(8.5)) / lit(5.0));
    let sum_r = alpha_r + beta_r;
    let r_inf = alpha_r / sum_r;
    let tau_r = lit(5.0) / sum_r;

    // dendrite KCa: s
    let alpha_s = (lit(2e-5) * ca).min(lit(0.01));
    let beta_s = lit(0.015);
    let sum_s = alpha_s + beta_s;
    let s_inf = alpha_s / sum_s;
    let tau_s = one / sum_s;

    // dendrite h: q
    let q_inf = sigmoid::<A>((v_dend + lit(80.0)) / lit(4.0));
    let tau_q =
        one / (A::exp(lit(-0.086) * v_dend - lit(14.6)) + A::exp(lit(0.070) * v_dend - lit(1.87)));

    GateRates {
        inf: [
            k_inf, l_inf, h_inf_s, n_inf, x_inf_s, h_inf_a, x_inf_a, r_inf, s_inf, q_inf,
        ],
        tau: [
            tau_k, tau_l, tau_h_s, tau_n, tau_x_s, tau_h_a, tau_x_a, tau_r, tau_s, tau_q,
        ],
        m_soma,
        m_axon,
    }
}

/// Delayed-rectifier-like K gate shared by soma and axon.
#[inline(always)]
fn potassium_x<A: Arith>(v: A::F) -> (A::F, A::F) {
    let lit = A::lit;
    // 0.13 (V+25) / (1 - exp(-(V+25)/10)) = 1.3 u / (1 - exp(-u))
    let alpha = lit(1.3) * A::exprel_inv(-(v + lit(25.0)) / lit(10.0));
    let beta = lit(1.69) * A::exp(lit(-0.0125) * (v + lit(35.0)));
    let tau = A::F::one() / (alpha + beta);
    (alpha * tau, tau)
}

/// Time derivative of all 14 state variables of one neuron.
///
/// `i_gj` is the net gap-junction current flowing into the dendrite and
/// `i_app` the applied current; both are in µA/cm² and positive values
/// depolarize.
#[inline(always)]
pub fn neuron_rhs<A: Arith>(
    s: &[A::F; STATE_VARS],
    p: &NeuronParams<A::F>,
    i_gj: A::F,
    i_app: A::F,
) -> [A::F; STATE_VARS] {
    let vs = s[row::V_SOMA];
    let vd = s[row::V_DEND];
    let va = s[row::V_AXON];
    let ca = s[row::CA];
    let g = gate_rates::<A>(vs, vd, va, ca);

    let k = s[row::SOMA_K];
    let l = s[row::SOMA_L];
    let h_s = s[row::SOMA_H];
    let n = s[row::SOMA_N];
    let x_s = s[row::SOMA_X];
    let h_a = s[row::AXON_H];
    let x_a = s[row::AXON_X];
    let r = s[row::DEND_R];
    let s_kca = s[row::DEND_S];
    let q = s[row::DEND_Q];

    // outward channel currents
    let i_cal = p.g_cal * k * k * k * l * (vs - p.e_ca);
    let m3_s = g.m_soma * g.m_soma * g.m_soma;
    let i_na_s = p.g_na_s * m3_s * h_s * (vs - p.e_na);
    let n2 = n * n;
    let i_kdr = p.g_kdr_s * n2 * n2 * (vs - p.e_k);
    let x2_s = x_s * x_s;
    let i_k_s = p.g_k_s * x2_s * x2_s * (vs - p.e_k);
    let i_ls = p.g_ls * (vs - p.e_leak);

    let m3_a = g.m_axon * g.m_axon * g.m_axon;
    let i_na_a = p.g_na_a * m3_a * h_a * (va - p.e_na);
    let x2_a = x_a * x_a;
    let i_k_a = p.g_k_a * x2_a * x2_a * (va - p.e_k);
    let i_la = p.g_la * (va - p.e_leak);

    let i_cah = p.g_cah * r * r * (vd - p.e_ca);
    let i_kca = p.g_kca * s_kca * (vd - p.e_k);
    let i_h = p.g_h * q * (vd - p.e_h);
    let i_ld = p.g_ld * (vd - p.e_leak);

    // inward compartment currents
    let soma_in = p.g_soma_from_dend * (vd - vs) + p.g_soma_from_axon * (va - vs);
    let dend_in = p.g_dend_from_soma * (vs - vd);
    let axon_in = p.g_axon_from_soma * (vs - va);

    let mut d = [A::F::zero(); STATE_VARS];
    d[row::V_SOMA] = (soma_in - (i_cal + i_na_s + i_kdr + i_k_s + i_ls)) / p.c_soma;
    d[row::V_DEND] = (dend_in + i_gj + i_app - (i_cah + i_kca + i_h + i_ld)) / p.c_dend;
    d[row::V_AXON] = (axon_in - (i_na_a + i_k_a + i_la)) / p.c_axon;
    for (j, r) in row::GATES.enumerate() {
        d[r] = (g.inf[j] - s[r]) / g.tau[j];
    }
    d[row::CA] = -p.ca_influx * i_cah - p.ca_decay * ca;
    d
}

/// Loads the 14 values of neuron `i` from a row-major `[14 x n]` buffer.
#[inline(always)]
pub fn load_column<F: Copy + Default>(buf: &[F], n: usize, i: usize) -> [F; STATE_VARS] {
    let mut s = [F::default(); STATE_VARS];
    for (r, slot) in s.iter_mut().enumerate() {
        *slot = buf[r * n + i];
    }
    s
}

/// Derivative of every neuron in `state` (gap-junction currents excluded
/// from the cell itself and passed in as `i_gj`), evaluated at `t_ms` for
/// the applied-current schedule.
pub fn cell_derivatives(
    state: &StateMatrix,
    params: &CellParameters,
    i_gj: &[f64],
    t_ms: f64,
) -> Result<StateMatrix> {
    let mut out = StateMatrix::zeros(STATE_VARS, state.neurons());
    cell_derivatives_into(state, params, i_gj, t_ms, &mut out)?;
    Ok(out)
}

/// [`cell_derivatives`] writing into a caller-provided buffer.
pub fn cell_derivatives_into(
    state: &StateMatrix,
    params: &CellParameters,
    i_gj: &[f64],
    t_ms: f64,
    out: &mut StateMatrix,
) -> Result<()> {
    let n = state.neurons();
    if state.vars() != STATE_VARS {
        return Err(Error::contract(format!(
            "state has {} variables, the cell model needs {STATE_VARS}",
            state.vars()
        )));
    }
    if params.len() != n || i_gj.len() != n || out.shape() != state.shape() {
        return Err(Error::contract(format!(
            "dimension mismatch: state has {n} neurons, parameters {}, i_gj {}, output {:?}",
            params.len(),
            i_gj.len(),
            out.shape()
        )));
    }
    let buf = state.as_slice();
    let dst = out.as_mut_slice();
    for i in 0..n {
        let p = NeuronParams::from_cell(params, i, |x| x);
        let s = load_column(buf, n, i);
        let i_app = params.applied_current(i, t_ms);
        let d = neuron_rhs::<F64>(&s, &p, i_gj[i], i_app);
        for (r, v) in d.into_iter().enumerate() {
            dst[r * n + i] = v;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kinetics::{GateInput, GATES};
    use crate::model::state::initial_state;

    #[test]
    fn identical_neurons_identical_columns() {
        let p = CellParameters::uniform(6);
        let mut s = initial_state(&p, 6).unwrap();
        for i in 0..6 {
            s.set(row::V_SOMA, i, -52.0);
            s.set(row::DEND_R, i, 0.3);
        }
        let d = cell_derivatives(&s, &p, &[0.0; 6], 0.0).unwrap();
        let first = d.column(0);
        for i in 1..6 {
            assert_eq!(d.column(i), first);
        }
    }

    #[test]
    fn constructed_fixed_point_has_zero_derivative() {
        let mut p = CellParameters::uniform(1);
        for (_, g) in p.conductances.fields_mut() {
            g[0] = 0.0;
        }
        p.calcium.decay[0] = 0.0;
        let mut s = initial_state(&p, 1).unwrap();
        let v = s.get(row::V_SOMA, 0);
        let rates = gate_rates::<F64>(v, v, v, s.get(row::CA, 0));
        for (j, r) in row::GATES.enumerate() {
            s.set(r, 0, rates.inf[j]);
        }
        let d = cell_derivatives(&s, &p, &[0.0], 0.0).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 0.0), "{:?}", d.column(0));
    }

    #[test]
    fn kernel_agrees_with_gate_table() {
        for v in [-90.0, -61.0, -25.0, -8.5, 0.0, 35.0] {
            for ca in [0.5, 3.7, 800.0] {
                let rates = gate_rates::<F64>(v, v, v, ca);
                let input = GateInput { v, ca };
                for gate in GATES.iter().filter(|g| !g.instantaneous) {
                    let j = gate.row.unwrap() - row::SOMA_K;
                    let inf = gate.steady_state(input);
                    let tau = gate.time_constant(input);
                    assert!(
                        (rates.inf[j] - inf).abs() <= 1e-12,
                        "{} inf at {v}",
                        gate.name
                    );
                    assert!(
                        (rates.tau[j] - tau).abs() <= 1e-12 * tau,
                        "{} tau at {v}",
                        gate.name
                    );
                }
            }
        }
    }

    #[test]
    fn gap_junction_current_enters_dendrite_only() {
        let p = CellParameters::uniform(1);
        let s = initial_state(&p, 1).unwrap();
        let base = cell_derivatives(&s, &p, &[0.0], 0.0).unwrap();
        let fed = cell_derivatives(&s, &p, &[2.0], 0.0).unwrap();
        for r in 0..STATE_VARS {
            let delta = fed.get(r, 0) - base.get(r, 0);
            if r == row::V_DEND {
                assert!((delta - 2.0).abs() < 1e-12);
            } else {
                assert_eq!(delta, 0.0, "row {r}");
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = CellParameters::uniform(3);
        let s = initial_state(&p, 3).unwrap();
        assert!(matches!(
            cell_derivatives(&s, &p, &[0.0; 2], 0.0),
            Err(Error::Contract(_))
        ));
        let small = StateMatrix::<f64>::zeros(4, 3);
        assert!(cell_derivatives(&small, &p, &[0.0; 3], 0.0).is_err());
    }
}

//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use olive_sim::engine::gap_junction_current;
use olive_sim::model::{CellParameters, STATE_VARS};

pub struct Scalar {
    pub d: [f64; STATE_VARS],
    /// Largest magnitude among the terms summed into each derivative.
    pub scale: [f64; STATE_VARS],
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

pub fn scalar_oracle(
    s: &[f64; STATE_VARS],
    p: &CellParameters,
    i: usize,
    i_gj: f64,
    i_app: f64,
) -> Scalar {
    let (vs, vd, va) = (s[0], s[1], s[2]);
    let (k, l, h_s, n, x_s, h_a, x_a, r, ss, q, ca) = (
        s[3], s[4], s[5], s[6], s[7], s[8], s[9], s[10], s[11], s[12], s[13],
    );
    let g = &p.conductances;
    let e = &p.reversal_potentials;
    let c = &p.capacitances;
    let cp = &p.coupling;

    let k_inf = sig(-(vs + 61.0) / 4.2);
    let l_inf = sig((vs + 85.5) / 8.5);
    let tau_l = 20.0 * ((vs + 160.0) / 30.0).exp() / (1.0 + ((vs + 84.0) / 7.3).exp()) + 35.0;
    let m_s = sig(-(vs + 30.0) / 5.5);
    let h_s_inf = sig((vs + 70.0) / 5.8);
    let tau_h_s = 3.0 * (-(vs + 40.0) / 33.0).exp();
    let n_inf = sig(-(vs + 3.0) / 10.0);
    let tau_n = 5.0 + 47.0 * ((vs + 50.0) / 900.0).exp();
    let x_rates = |v: f64| {
        let a = 0.13 * (v + 25.0) / (1.0 - (-(v + 25.0) / 10.0).exp());
        let b = 1.69 * (-0.0125 * (v + 35.0)).exp();
        (a / (a + b), 1.0 / (a + b))
    };
    let (x_s_inf, tau_x_s) = x_rates(vs);
    let m_a = sig(-(va + 30.0) / 5.5);
    let h_a_inf = sig((va + 60.0) / 5.8);
    let tau_h_a = 1.5 * (-(va + 40.0) / 33.0).exp();
    let (x_a_inf, tau_x_a) = x_rates(va);
    let a_r = 1.7 / (1.0 + (-(vd - 5.0) / 13.9).exp());
    let b_r = 0.02 * (vd + 8.5) / (((vd + 8.5) / 5.0).exp() - 1.0);
    let (r_inf, tau_r) = (a_r / (a_r + b_r), 5.0 / (a_r + b_r));
    let a_s = (2e-5 * ca).min(0.01);
    let b_s = 0.015;
    let (s_inf, tau_s) = (a_s / (a_s + b_s), 1.0 / (a_s + b_s));
    let q_inf = sig((vd + 80.0) / 4.0);
    let tau_q = 1.0 / ((-0.086 * vd - 14.6).exp() + (0.070 * vd - 1.87).exp());

    let soma_terms = [
        cp.g_int[i] / cp.p_soma_dend[i] * (vd - vs),
        cp.g_int[i] / (1.0 - cp.p_axon_soma[i]) * (va - vs),
        -g.cal_soma[i] * k.powi(3) * l * (vs - e.ca[i]),
        -g.na_soma[i] * m_s.powi(3) * h_s * (vs - e.na[i]),
        -g.kdr_soma[i] * n.powi(4) * (vs - e.k[i]),
        -g.k_soma[i] * x_s.powi(4) * (vs - e.k[i]),
        -g.leak_soma[i] * (vs - e.leak[i]),
    ];
    let i_cah = g.cah_dend[i] * r * r * (vd - e.ca[i]);
    let dend_terms = [
        cp.g_int[i] / (1.0 - cp.p_soma_dend[i]) * (vs - vd),
        i_gj,
        i_app,
        -i_cah,
        -g.kca_dend[i] * ss * (vd - e.k[i]),
        -g.h_dend[i] * q * (vd - e.h[i]),
        -g.leak_dend[i] * (vd - e.leak[i]),
    ];
    let axon_terms = [
        cp.g_int[i] / cp.p_axon_soma[i] * (vs - va),
        -g.na_axon[i] * m_a.powi(3) * h_a * (va - e.na[i]),
        -g.k_axon[i] * x_a.powi(4) * (va - e.k[i]),
        -g.leak_axon[i] * (va - e.leak[i]),
    ];
    let sum = |t: &[f64]| t.iter().sum::<f64>();
    let big = |t: &[f64]| t.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let gates = [
        (k, k_inf, 1.0),
        (l, l_inf, tau_l),
        (h_s, h_s_inf, tau_h_s),
        (n, n_inf, tau_n),
        (x_s, x_s_inf, tau_x_s),
        (h_a, h_a_inf, tau_h_a),
        (x_a, x_a_inf, tau_x_a),
        (r, r_inf, tau_r),
        (ss, s_inf, tau_s),
        (q, q_inf, tau_q),
    ];
    let mut d = [0.0; STATE_VARS];
    let mut scale = [0.0; STATE_VARS];
    d[0] = sum(&soma_terms) / c.soma[i];
    scale[0] = big(&soma_terms) / c.soma[i];
    d[1] = sum(&dend_terms) / c.dend[i];
    scale[1] = big(&dend_terms) / c.dend[i];
    d[2] = sum(&axon_terms) / c.axon[i];
    scale[2] = big(&axon_terms) / c.axon[i];
    for (j, (x, inf, tau)) in gates.into_iter().enumerate() {
        d[3 + j] = (inf - x) / tau;
        scale[3 + j] = inf.abs().max(x.abs()) / tau;
    }
    let ca_terms = [-p.calcium.influx[i] * i_cah, -p.calcium.decay[i] * ca];
    d[13] = sum(&ca_terms);
    scale[13] = big(&ca_terms);
    Scalar { d, scale }
}

/// `I = Σ_e onehot(tgt_e) · f(onehot(src_e)·v − onehot(tgt_e)·v)`, with the
/// gather and scatter written as dense 0/1 matrices and edges visited in
/// (target, source) order.
pub fn dense_exchange(v: &[f64], edges: &[(u32, u32)], g: f64) -> Vec<f64> {
    let n = v.len();
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(|&(s, t)| (t, s));
    let onehot = |k: u32| {
        (0..n)
            .map(|j| if j == k as usize { 1.0 } else { 0.0 })
            .collect::<Vec<f64>>()
    };
    let dot = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0, |acc, (x, y)| if *x == 0.0 { acc } else { acc + x * y })
    };
    let mut out = vec![0.0; n];
    for (s, t) in sorted {
        let (gs, gt) = (onehot(s), onehot(t));
        let current = gap_junction_current(dot(&gs, v) - dot(&gt, v), g);
        for (o, w) in out.iter_mut().zip(&gt) {
            if *w == 1.0 {
                *o += current;
            }
        }
    }
    out
}

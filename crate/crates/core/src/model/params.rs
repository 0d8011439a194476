//! Per-neuron cell parameters and their JSON form.
//!
//! Every parameter is stored as one array with one entry per neuron, so
//! heterogeneous networks cost nothing extra. In JSON a group member may be a
//! scalar (broadcast to all neurons) or an array of length `N`:
//!
//! ```json
//! {
//!   "neurons": 2,
//!   "conductances": { "cal_soma": [0.68, 0.9], "h_dend": 0.125 },
//!   "reversal_potentials": { "na": 55 },
//!   "capacitances": { "soma": 1 },
//!   "coupling": { "g_int": 0.13, "g_gj": 0.05 },
//!   "stimuli": [ { "neuron": 0, "start_ms": 10, "end_ms": 15, "amplitude": 6 } ]
//! }
//! ```
//!
//! Members left out take the defaults of [`CellParameters::uniform`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::state::RestingState;
use super::stimulus::{Pulse, StimulusSchedule};
use crate::error::{Error, Result};

macro_rules! param_group {
    (
        $(#[$meta:meta])*
        $name:ident { $( $(#[$fmeta:meta])* $field:ident = $default:expr ),* $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            $( $(#[$fmeta])* pub $field: Vec<f64>, )*
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn uniform(n: usize) -> Self {
                $name { $( $field: vec![$default; n], )* }
            }

            pub fn fields(&self) -> Vec<(&'static str, &Vec<f64>)> {
                vec![$( (stringify!($field), &self.$field), )*]
            }

            pub fn fields_mut(&mut self) -> Vec<(&'static str, &mut Vec<f64>)> {
                vec![$( (stringify!($field), &mut self.$field), )*]
            }
        }
    };
}

param_group! {
    /// Maximal channel conductances, mS/cm².
    Conductances {
        na_soma = 150.0,
        kdr_soma = 9.0,
        k_soma = 5.0,
        cal_soma = 0.68,
        leak_soma = 0.016,
        na_axon = 240.0,
        k_axon = 20.0,
        leak_axon = 0.016,
        cah_dend = 4.5,
        kca_dend = 35.0,
        h_dend = 0.125,
        leak_dend = 0.016,
    }
}

param_group! {
    /// Reversal potentials, mV.
    ReversalPotentials {
        na = 55.0,
        k = -75.0,
        ca = 120.0,
        h = -43.0,
        leak = 10.0,
    }
}

param_group! {
    /// Membrane capacitance per compartment, µF/cm².
    Capacitances {
        soma = 1.0,
        dend = 1.0,
        axon = 1.0,
    }
}

param_group! {
    /// Inter-compartment coupling. The soma-dendrite and soma-axon currents
    /// use `g_int` scaled by the membrane-area ratios `p_soma_dend` and
    /// `p_axon_soma`, e.g. the dendrite sees `g_int / (1 - p_soma_dend)` and
    /// the soma `g_int / p_soma_dend`.
    Coupling {
        g_int = 0.13,
        p_soma_dend = 0.25,
        p_axon_soma = 0.15,
    }
}

param_group! {
    /// Dendritic calcium: `dCa/dt = -influx * I_CaH - decay * Ca`.
    CalciumDynamics {
        influx = 3.0,
        decay = 0.075,
    }
}

/// Default gap-junction conductance, mS/cm².
pub const DEFAULT_G_GJ: f64 = 0.05;

type FieldList<'a> = Vec<(&'static str, &'a Vec<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct CellParameters {
    n: usize,
    pub conductances: Conductances,
    pub reversal_potentials: ReversalPotentials,
    pub capacitances: Capacitances,
    pub coupling: Coupling,
    pub calcium: CalciumDynamics,
    /// Network-wide gap-junction conductance, mS/cm².
    pub g_gj: f64,
    pub stimuli: StimulusSchedule,
    pub rest: RestingState,
}

impl CellParameters {
    /// `n` identical neurons with the default parameter set and no stimuli.
    pub fn uniform(n: usize) -> Self {
        CellParameters {
            n,
            conductances: Conductances::uniform(n),
            reversal_potentials: ReversalPotentials::uniform(n),
            capacitances: Capacitances::uniform(n),
            coupling: Coupling::uniform(n),
            calcium: CalciumDynamics::uniform(n),
            g_gj: DEFAULT_G_GJ,
            stimuli: StimulusSchedule::empty(),
            rest: RestingState::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn with_stimuli(mut self, stimuli: StimulusSchedule) -> Self {
        self.stimuli = stimuli;
        self
    }

    fn groups(&self) -> [(&'static str, FieldList<'_>); 5] {
        [
            ("conductances", self.conductances.fields()),
            ("reversal_potentials", self.reversal_potentials.fields()),
            ("capacitances", self.capacitances.fields()),
            ("coupling", self.coupling.fields()),
            ("calcium", self.calcium.fields()),
        ]
    }

    /// Applied current of `neuron` at `t_ms`, µA/cm².
    pub fn applied_current(&self, neuron: usize, t_ms: f64) -> f64 {
        self.stimuli.current_at(neuron, t_ms)
    }

    /// Checks array lengths, signs and stimulus targets.
    pub fn validate(&self) -> Result<()> {
        for (group, fields) in self.groups() {
            for (name, values) in fields {
                if values.len() != self.n {
                    return Err(Error::contract(format!(
                        "{group}.{name} has {} entries, expected {}",
                        values.len(),
                        self.n
                    )));
                }
                if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::config(format!("{group}.{name} contains {bad}")));
                }
            }
        }
        let non_negative = self
            .conductances
            .fields()
            .into_iter()
            .chain(self.capacitances.fields())
            .chain([("g_int", &self.coupling.g_int)]);
        for (name, values) in non_negative {
            if values.iter().any(|&v| v < 0.0) {
                return Err(Error::config(format!("{name} must be non-negative")));
            }
        }
        if self
            .capacitances
            .fields()
            .iter()
            .any(|(_, c)| c.contains(&0.0))
        {
            return Err(Error::config("capacitances must be positive"));
        }
        for (name, ratios) in [
            ("p_soma_dend", &self.coupling.p_soma_dend),
            ("p_axon_soma", &self.coupling.p_axon_soma),
        ] {
            if ratios.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                return Err(Error::config(format!("coupling.{name} must lie in (0, 1)")));
            }
        }
        if !(self.g_gj.is_finite() && self.g_gj >= 0.0) {
            return Err(Error::config(
                "coupling.g_gj must be finite and non-negative",
            ));
        }
        if let Some(max) = self.stimuli.max_neuron() {
            if max >= self.n {
                return Err(Error::contract(format!(
                    "stimulus targets neuron {max} but only {} neurons exist",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Reorders neurons so that new neuron `i` is old neuron `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::contract(
                "permutation length differs from neuron count",
            ));
        }
        let mut out = self.clone();
        let apply = |values: &mut Vec<f64>| {
            let old = values.clone();
            for (slot, &src) in values.iter_mut().zip(perm) {
                *slot = old[src];
            }
        };
        for (_, v) in out.conductances.fields_mut() {
            apply(v);
        }
        for (_, v) in out.reversal_potentials.fields_mut() {
            apply(v);
        }
        for (_, v) in out.capacitances.fields_mut() {
            apply(v);
        }
        for (_, v) in out.coupling.fields_mut() {
            apply(v);
        }
        for (_, v) in out.calcium.fields_mut() {
            apply(v);
        }
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let pulses = self
            .stimuli
            .pulses()
            .iter()
            .map(|p| Pulse {
                neuron: inverse[p.neuron],
                ..*p
            })
            .collect();
        out.stimuli = StimulusSchedule::new(pulses)?;
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    /// Parses the JSON form. `n` fixes the neuron count when the document
    /// does not carry a `neurons` key and has no arrays to infer it from.
    pub fn from_json(text: &str, n: Option<usize>) -> Result<Self> {
        let doc: ParamsDoc = serde_json::from_str(text)?;
        Self::from_doc(doc, n)
    }

    fn to_doc(&self) -> ParamsDoc {
        let group = |fields: Vec<(&'static str, &Vec<f64>)>| {
            fields
                .into_iter()
                .map(|(name, values)| (name.to_string(), Broadcast::compact(values)))
                .collect::<BTreeMap<_, _>>()
        };
        let mut coupling = group(self.coupling.fields());
        coupling.insert("g_gj".into(), Broadcast::Scalar(self.g_gj));
        ParamsDoc {
            neurons: Some(self.n),
            conductances: group(self.conductances.fields()),
            reversal_potentials: group(self.reversal_potentials.fields()),
            capacitances: group(self.capacitances.fields()),
            coupling,
            calcium: group(self.calcium.fields()),
            rest: Some(self.rest),
            stimuli: self.stimuli.pulses().to_vec(),
        }
    }

    fn from_doc(mut doc: ParamsDoc, n: Option<usize>) -> Result<Self> {
        let inferred = [
            &doc.conductances,
            &doc.reversal_potentials,
            &doc.capacitances,
            &doc.coupling,
            &doc.calcium,
        ]
        .iter()
        .flat_map(|g| g.values())
        .find_map(|b| match b {
            Broadcast::Array(v) => Some(v.len()),
            Broadcast::Scalar(_) => None,
        });
        let n = match (doc.neurons, n, inferred) {
            (Some(a), Some(b), _) if a != b => {
                return Err(Error::contract(format!(
                    "parameter file describes {a} neurons, network has {b}"
                )))
            }
            (Some(a), _, _) | (None, Some(a), _) | (None, None, Some(a)) => a,
            (None, None, None) => {
                return Err(Error::config(
                    "cannot infer neuron count: add a `neurons` key or pass a network size",
                ))
            }
        };
        let mut params = CellParameters::uniform(n);
        match doc.coupling.remove("g_gj") {
            Some(Broadcast::Scalar(g)) => params.g_gj = g,
            Some(Broadcast::Array(_)) => {
                return Err(Error::config("coupling.g_gj must be a scalar"))
            }
            None => {}
        }
        fill_group(
            "conductances",
            doc.conductances,
            params.conductances.fields_mut(),
            n,
        )?;
        fill_group(
            "reversal_potentials",
            doc.reversal_potentials,
            params.reversal_potentials.fields_mut(),
            n,
        )?;
        fill_group(
            "capacitances",
            doc.capacitances,
            params.capacitances.fields_mut(),
            n,
        )?;
        fill_group("coupling", doc.coupling, params.coupling.fields_mut(), n)?;
        fill_group("calcium", doc.calcium, params.calcium.fields_mut(), n)?;
        if let Some(rest) = doc.rest {
            params.rest = rest;
        }
        params.stimuli = StimulusSchedule::new(doc.stimuli)?;
        params.validate()?;
        Ok(params)
    }
}

fn fill_group(
    group: &str,
    mut given: BTreeMap<String, Broadcast>,
    fields: Vec<(&'static str, &mut Vec<f64>)>,
    n: usize,
) -> Result<()> {
    for (name, slot) in fields {
        if let Some(value) = given.remove(name) {
            *slot = value.expand(n).map_err(|len| {
                Error::contract(format!("{group}.{name} has {len} entries, expected {n}"))
            })?;
        }
    }
    if let Some(unknown) = given.keys().next() {
        return Err(Error::config(format!(
            "unknown parameter {group}.{unknown}"
        )));
    }
    Ok(())
}

/// A scalar applied to every neuron, or one value per neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Broadcast {
    Scalar(f64),
    Array(Vec<f64>),
}

impl Broadcast {
    fn compact(values: &[f64]) -> Self {
        match values.first() {
            Some(&first) if values.iter().all(|v| v.to_bits() == first.to_bits()) => {
                Broadcast::Scalar(first)
            }
            _ => Broadcast::Array(values.to_vec()),
        }
    }

    fn expand(self, n: usize) -> std::result::Result<Vec<f64>, usize> {
        match self {
            Broadcast::Scalar(x) => Ok(vec![x; n]),
            Broadcast::Array(v) if v.len() == n => Ok(v),
            Broadcast::Array(v) => Err(v.len()),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    neurons: Option<usize>,
    conductances: BTreeMap<String, Broadcast>,
    reversal_potentials: BTreeMap<String, Broadcast>,
    capacitances: BTreeMap<String, Broadcast>,
    coupling: BTreeMap<String, Broadcast>,
    calcium: BTreeMap<String, Broadcast>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rest: Option<RestingState>,
    stimuli: Vec<Pulse>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_defaults_validate() {
        let p = CellParameters::uniform(8);
        p.validate().unwrap();
        assert_eq!(p.conductances.na_axon, vec![240.0; 8]);
        assert_eq!(Conductances::NAMES.len(), 12);
    }

    #[test]
    fn json_round_trip_heterogeneous() {
        let mut p = CellParameters::uniform(3);
        p.conductances.cal_soma = vec![0.5, 0.68, 1.1];
        p.g_gj = 0.04;
        p.stimuli = StimulusSchedule::new(vec![Pulse {
            neuron: 2,
            start_ms: 1.0,
            end_ms: 3.5,
            amplitude: 4.0,
        }])
        .unwrap();
        let text = p.to_json().unwrap();
        let back = CellParameters::from_json(&text, None).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn scalars_broadcast() {
        let text = r#"{"conductances": {"h_dend": 0.2}, "coupling": {"g_gj": 0.01}}"#;
        let p = CellParameters::from_json(text, Some(4)).unwrap();
        assert_eq!(p.conductances.h_dend, vec![0.2; 4]);
        assert_eq!(p.g_gj, 0.01);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn neuron_count_inferred_from_arrays() {
        let text = r#"{"capacitances": {"soma": [1, 1.1]}}"#;
        assert_eq!(CellParameters::from_json(text, None).unwrap().len(), 2);
        assert!(CellParameters::from_json("{}", None).is_err());
    }

    #[test]
    fn rejects_bad_documents() {
        let wrong_len = r#"{"conductances": {"h_dend": [0.1, 0.2]}}"#;
        assert!(matches!(
            CellParameters::from_json(wrong_len, Some(3)),
            Err(Error::Contract(_))
        ));
        let unknown = r#"{"conductances": {"nav1": 1.0}}"#;
        assert!(CellParameters::from_json(unknown, Some(1)).is_err());
        let negative = r#"{"conductances": {"kdr_soma": -1.0}}"#;
        assert!(CellParameters::from_json(negative, Some(1)).is_err());
        let bad_target =
            r#"{"stimuli": [{"neuron": 5, "start_ms": 0, "end_ms": 1, "amplitude": 1}]}"#;
        assert!(CellParameters::from_json(bad_target, Some(2)).is_err());
        let vector_gj = r#"{"coupling": {"g_gj": [0.1]}}"#;
        assert!(CellParameters::from_json(vector_gj, Some(1)).is_err());
        let top_level = r#"{"synapses": {}}"#;
        assert!(CellParameters::from_json(top_level, Some(1)).is_err());
    }

    #[test]
    fn permutation_moves_columns_and_stimuli() {
        let mut p = CellParameters::uniform(3);
        p.conductances.cal_soma = vec![1.0, 2.0, 3.0];
        p.stimuli = StimulusSchedule::new(vec![Pulse {
            neuron: 0,
            start_ms: 0.0,
            end_ms: 1.0,
            amplitude: 1.0,
        }])
        .unwrap();
        let q = p.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(q.conductances.cal_soma, vec![3.0, 1.0, 2.0]);
        assert_eq!(q.stimuli.pulses()[0].neuron, 1);
    }
}

//! Stress scenarios: heterogeneous conductances and random input pulses.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellParameters, Conductances, Pulse, StimulusSchedule};

/// Knobs of the committed 64-cell stress scenario.
pub const DEFAULT_SCENARIO: &str = include_str!("../../scenarios/stress64.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressKnobs {
    pub neurons: usize,
    pub seed: u64,
    /// σ of the lognormal (median 1) conductance factors.
    pub jitter_sigma: f64,
    /// Mean pulse rate per neuron.
    pub pulse_rate_hz: f64,
    /// µA/cm², into the dendrite.
    pub pulse_amp: f64,
    pub pulse_width_ms: f64,
    /// Pulses are drawn over `[0, duration_ms)`.
    pub duration_ms: f64,
}

impl StressKnobs {
    /// The committed desk scenario.
    pub fn desk_default() -> Self {
        serde_json::from_str(DEFAULT_SCENARIO).expect("committed stress knobs parse")
    }

    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::config("stress scenario needs at least one neuron"));
        }
        for (name, v) in [
            ("jitter_sigma", self.jitter_sigma),
            ("pulse_rate_hz", self.pulse_rate_hz),
            ("pulse_amp", self.pulse_amp),
            ("pulse_width_ms", self.pulse_width_ms),
            ("duration_ms", self.duration_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.pulse_rate_hz > 0.0 && self.pulse_width_ms <= 0.0 {
            return Err(Error::config(
                "pulse_width_ms must be positive when pulses are enabled",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressScenario {
    pub knobs: StressKnobs,
    pub base: CellParameters,
    /// Multiplicative factor per conductance and neuron.
    pub jitter: Conductances,
    pub stimuli: StimulusSchedule,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    knobs: StressKnobs,
    base: serde_json::Value,
    jitter: BTreeMap<String, Vec<f64>>,
    stimuli: Vec<Pulse>,
}

/// Draws a stress scenario on top of `base` (which must describe
/// `knobs.neurons` neurons). Any stimuli already in `base` are kept.
///
/// Random draws come from one ChaCha8 stream seeded with `knobs.seed`:
/// first one lognormal factor per conductance and neuron (conductance-major),
/// then each neuron's pulse onsets as a Poisson process.
pub fn build_stress_scenario(base: &CellParameters, knobs: &StressKnobs) -> Result<StressScenario> {
    knobs.validate()?;
    let n = knobs.neurons;
    if base.len() != n {
        return Err(Error::contract(format!(
            "base parameters describe {} neurons, scenario wants {n}",
            base.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(knobs.seed);
    let mut jitter = Conductances::uniform(n);
    for (_, factors) in jitter.fields_mut() {
        factors.fill(1.0);
        if knobs.jitter_sigma > 0.0 {
            let dist = LogNormal::new(0.0, knobs.jitter_sigma)
                .map_err(|e| Error::config(format!("jitter distribution: {e}")))?;
            for f in factors.iter_mut() {
                *f = dist.sample(&mut rng);
            }
        }
    }
    let mut pulses = Vec::new();
    if knobs.pulse_rate_hz > 0.0 && knobs.pulse_amp > 0.0 {
        let gaps = Exp::new(knobs.pulse_rate_hz / 1000.0)
            .map_err(|e| Error::config(format!("pulse interval distribution: {e}")))?;
        for neuron in 0..n {
            let mut t: f64 = gaps.sample(&mut rng);
            while t < knobs.duration_ms {
                pulses.push(Pulse {
                    neuron,
                    start_ms: t,
                    end_ms: t + knobs.pulse_width_ms,
                    amplitude: knobs.pulse_amp,
                });
                t += gaps.sample(&mut rng);
            }
        }
    }
    Ok(StressScenario {
        knobs: *knobs,
        base: base.clone(),
        jitter,
        stimuli: StimulusSchedule::new(pulses)?,
    })
}

impl StressScenario {
    /// Base parameters with jittered conductances and the scenario pulses
    /// added to the base schedule.
    pub fn params(&self) -> Result<CellParameters> {
        let mut p = self.base.clone();
        for ((_, g), (_, f)) in p
            .conductances
            .fields_mut()
            .into_iter()
            .zip(self.jitter.fields())
        {
            for (g, f) in g.iter_mut().zip(f) {
                *g *= f;
            }
        }
        let mut pulses = p.stimuli.pulses().to_vec();
        pulses.extend_from_slice(self.stimuli.pulses());
        p.stimuli = StimulusSchedule::new(pulses)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ScenarioDoc {
            knobs: self.knobs,
            base: serde_json::from_str(&self.base.to_json()?)?,
            jitter: self
                .jitter
                .fields()
                .into_iter()
                .map(|(name, f)| (name.to_string(), f.clone()))
                .collect(),
            stimuli: self.stimuli.pulses().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;
        doc.knobs.validate()?;
        let n = doc.knobs.neurons;
        let base = CellParameters::from_json(&doc.base.to_string(), Some(n))?;
        let mut jitter = Conductances::uniform(n);
        let mut given = doc.jitter;
        for (name, slot) in jitter.fields_mut() {
            let f = given
                .remove(name)
                .ok_or_else(|| Error::config(format!("scenario jitter lacks {name}")))?;
            if f.len() != n {
                return Err(Error::contract(format!(
                    "jitter.{name} has {} entries, expected {n}",
                    f.len()
                )));
            }
            *slot = f;
        }
        if let Some(unknown) = given.keys().next() {
            return Err(Error::config(format!("unknown jitter entry {unknown}")));
        }
        Ok(StressScenario {
            knobs: doc.knobs,
            base,
            jitter,
            stimuli: StimulusSchedule::new(doc.stimuli)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knobs(n: usize) -> StressKnobs {
        StressKnobs {
            neurons: n,
            seed: 7,
            jitter_sigma: 0.1,
            pulse_rate_hz: 20.0,
            pulse_amp: 5.0,
            pulse_width_ms: 3.0,
            duration_ms: 500.0,
        }
    }

    #[test]
    fn zero_knobs_reproduce_base() {
        let base = CellParameters::uniform(8);
        let k = StressKnobs {
            jitter_sigma: 0.0,
            pulse_rate_hz: 0.0,
            ..knobs(8)
        };
        let s = build_stress_scenario(&base, &k).unwrap();
        assert!(s.stimuli.is_empty());
        assert_eq!(s.params().unwrap(), base);
    }

    #[test]
    fn same_seed_same_bytes() {
        let base = CellParameters::uniform(16);
        let a = build_stress_scenario(&base, &knobs(16))
            .unwrap()
            .to_json()
            .unwrap();
        let b = build_stress_scenario(&base, &knobs(16))
            .unwrap()
            .to_json()
            .unwrap();
        assert_eq!(a, b);
        let c = build_stress_scenario(
            &base,
            &StressKnobs {
                seed: 8,
                ..knobs(16)
            },
        )
        .unwrap();
        assert_ne!(a, c.to_json().unwrap());
    }

    #[test]
    fn json_round_trip_is_bytewise() {
        let s = build_stress_scenario(&CellParameters::uniform(16), &knobs(16)).unwrap();
        let text = s.to_json().unwrap();
        let back = StressScenario::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn jitter_is_positive_and_pulses_in_window() {
        let s = build_stress_scenario(&CellParameters::uniform(32), &knobs(32)).unwrap();
        let p = s.params().unwrap();
        for (_, g) in p.conductances.fields() {
            assert!(g.iter().all(|&g| g >= 0.0));
        }
        assert!(!s.stimuli.is_empty());
        for pulse in s.stimuli.pulses() {
            assert!(pulse.start_ms >= 0.0 && pulse.start_ms < 500.0);
            assert!((pulse.end_ms - pulse.start_ms - 3.0).abs() < 1e-9);
        }
        // 32 neurons * 20 Hz * 0.5 s = 320 expected pulses
        let count = s.stimuli.pulses().len() as f64;
        assert!((count - 320.0).abs() < 5.0 * 320f64.sqrt(), "{count}");
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(build_stress_scenario(&CellParameters::uniform(4), &knobs(5)).is_err());
        assert!(build_stress_scenario(
            &CellParameters::uniform(4),
            &StressKnobs {
                pulse_amp: -1.0,
                ..knobs(4)
            }
        )
        .is_err());
    }

    #[test]
    fn committed_knobs_parse() {
        let k = StressKnobs::desk_default();
        assert_eq!(k.neurons, 64);
        k.validate().unwrap();
    }
}

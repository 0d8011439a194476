//! Applied-current pulse schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular current pulse on one neuron, active on `[start_ms, end_ms)`.
/// Positive amplitudes depolarize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub neuron: usize,
    pub start_ms: f64,
    pub end_ms: f64,
    /// µA/cm²
    pub amplitude: f64,
}

impl Pulse {
    #[inline]
    pub fn active_at(&self, t_ms: f64) -> bool {
        self.start_ms <= t_ms && t_ms < self.end_ms
    }
}

/// Applied current of every neuron as a sum of pulses. Overlapping pulses
/// add up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StimulusSchedule {
    // canonical order: (neuron, start, end, amplitude)
    pulses: Vec<Pulse>,
}

impl StimulusSchedule {
    pub fn new(mut pulses: Vec<Pulse>) -> Result<Self> {
        for p in &pulses {
            if !(p.start_ms.is_finite() && p.end_ms.is_finite() && p.amplitude.is_finite()) {
                return Err(Error::config(format!("non-finite stimulus pulse {p:?}")));
            }
            if p.start_ms >= p.end_ms {
                return Err(Error::config(format!(
                    "stimulus pulse on neuron {} must start before it ends ({} >= {})",
                    p.neuron, p.start_ms, p.end_ms
                )));
            }
        }
        pulses.sort_by(|a, b| {
            a.neuron
                .cmp(&b.neuron)
                .then(a.start_ms.total_cmp(&b.start_ms))
                .then(a.end_ms.total_cmp(&b.end_ms))
                .then(a.amplitude.total_cmp(&b.amplitude))
        });
        Ok(StimulusSchedule { pulses })
    }

    pub fn empty() -> Self {
        StimulusSchedule::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn max_neuron(&self) -> Option<usize> {
        self.pulses.last().map(|p| p.neuron)
    }

    fn for_neuron(&self, neuron: usize) -> &[Pulse] {
        let lo = self.pulses.partition_point(|p| p.neuron < neuron);
        let hi = self.pulses.partition_point(|p| p.neuron <= neuron);
        &self.pulses[lo..hi]
    }

    /// Applied current of `neuron` at `t_ms`.
    pub fn current_at(&self, neuron: usize, t_ms: f64) -> f64 {
        self.for_neuron(neuron)
            .iter()
            .filter(|p| p.active_at(t_ms))
            .fold(0.0, |acc, p| acc + p.amplitude)
    }

    /// Flattens the schedule into time-ordered value changes so a stepping
    /// loop can track `I_app` without rescanning pulses. The value recorded
    /// at each breakpoint is exactly `current_at(neuron, time)`.
    pub fn timeline(&self) -> Vec<StimulusEvent> {
        let mut events = Vec::new();
        let mut i = 0;
        while i < self.pulses.len() {
            let neuron = self.pulses[i].neuron;
            let pulses = self.for_neuron(neuron);
            let mut times: Vec<f64> = pulses.iter().flat_map(|p| [p.start_ms, p.end_ms]).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            events.extend(times.into_iter().map(|time_ms| StimulusEvent {
                time_ms,
                neuron,
                value: self.current_at(neuron, time_ms),
            }));
            i += pulses.len();
        }
        events.sort_by(|a, b| {
            a.time_ms
                .total_cmp(&b.time_ms)
                .then(a.neuron.cmp(&b.neuron))
        });
        events
    }
}

/// From `time_ms` on, the applied current of `neuron` is `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulusEvent {
    pub time_ms: f64,
    pub neuron: usize,
    pub value: f64,
}

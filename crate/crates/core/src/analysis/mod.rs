//! Trace comparison, spike counting and stress scenarios.

pub mod compare;
pub mod spikes;
pub mod stress;

pub use compare::{box_stats, compare, deviations_in, DeviationReport, Span, SpanStats};
pub use spikes::{spike_count, spiking_fraction, SPIKE_THRESHOLD_MV};
pub use stress::{build_stress_scenario, StressKnobs, StressScenario};

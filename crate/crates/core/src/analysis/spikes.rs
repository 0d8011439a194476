use crate::engine::TraceRecord;

/// Somatic threshold used to call a spike, mV.
pub const SPIKE_THRESHOLD_MV: f64 = 0.0;

/// Upward threshold crossings per neuron: a sample below `threshold`
/// followed by one at or above it.
pub fn spike_count(trace: &TraceRecord, threshold: f64) -> Vec<usize> {
    let n = trace.neurons();
    let mut counts = vec![0; n];
    for s in 1..trace.samples() {
        let (prev, cur) = (trace.row(s - 1), trace.row(s));
        for i in 0..n {
            if prev[i] < threshold && cur[i] >= threshold {
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Fraction of neurons with at least one spike.
pub fn spiking_fraction(counts: &[usize]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    counts.iter().filter(|&&c| c > 0).count() as f64 / counts.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(values: &[f64]) -> TraceRecord {
        let mut t = TraceRecord::new(1);
        for (s, &v) in values.iter().enumerate() {
            t.push(s as f64, &[v]);
        }
        t
    }

    #[test]
    fn constant_trace_has_no_spikes() {
        assert_eq!(spike_count(&single(&[-60.0; 20]), 0.0), vec![0]);
        assert_eq!(spike_count(&single(&[10.0; 20]), 0.0), vec![0]);
    }

    #[test]
    fn triangular_pulses() {
        let one = [-60.0, -30.0, 0.0, 30.0, 0.0, -30.0, -60.0];
        assert_eq!(spike_count(&single(&one), 0.0), vec![1]);
        let two: Vec<f64> = one.iter().chain(one.iter()).copied().collect();
        assert_eq!(spike_count(&single(&two), 0.0), vec![2]);
    }

    #[test]
    fn per_neuron_counts() {
        let mut t = TraceRecord::new(3);
        t.push(0.0, &[-60.0, -60.0, -60.0]);
        t.push(1.0, &[20.0, -60.0, 5.0]);
        t.push(2.0, &[-60.0, -60.0, -70.0]);
        t.push(3.0, &[20.0, -60.0, -70.0]);
        let counts = spike_count(&t, 0.0);
        assert_eq!(counts, vec![2, 0, 1]);
        assert!((spiking_fraction(&counts) - 2.0 / 3.0).abs() < 1e-15);
    }
}

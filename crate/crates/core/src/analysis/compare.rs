//! Deviation statistics between a reference and a test trace.

use serde::{Deserialize, Serialize};

use crate::engine::TraceRecord;
use crate::error::{Error, Result};

/// Closed time window `[start_ms, end_ms]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start_ms: f64,
    pub end_ms: f64,
}

impl Span {
    pub fn new(start_ms: f64, end_ms: f64) -> Self {
        Span { start_ms, end_ms }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start_ms <= t && t <= self.end_ms
    }
}

/// Box-plot statistics of `test - reference` over one span, in mV.
/// Whiskers follow the 1.5 IQR convention: the most extreme deviations
/// still within 1.5 IQR of the quartiles, never inside the box. Quantiles interpolate linearly
/// between order statistics. Non-finite deviations are counted but excluded
/// from the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanStats {
    pub start_ms: f64,
    pub end_ms: f64,
    pub count: usize,
    pub max_abs_mv: f64,
    pub mean_mv: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lo_whisker: f64,
    pub hi_whisker: f64,
    pub nonfinite_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub spans: Vec<SpanStats>,
    /// Largest finite |deviation| over the whole trace.
    pub global_max_abs_mv: f64,
    /// Non-finite deviations over the whole trace.
    pub nonfinite_count: usize,
}

impl DeviationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Box-plot statistics of a sample of deviations.
pub fn box_stats(span: Span, deviations: &[f64]) -> SpanStats {
    let mut finite: Vec<f64> = deviations
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .collect();
    let nonfinite_count = deviations.len() - finite.len();
    finite.sort_by(f64::total_cmp);
    if finite.is_empty() {
        return SpanStats {
            start_ms: span.start_ms,
            end_ms: span.end_ms,
            count: 0,
            max_abs_mv: 0.0,
            mean_mv: 0.0,
            q1: 0.0,
            median: 0.0,
            q3: 0.0,
            lo_whisker: 0.0,
            hi_whisker: 0.0,
            nonfinite_count,
        };
    }
    let q1 = quantile(&finite, 0.25);
    let median = quantile(&finite, 0.5);
    let q3 = quantile(&finite, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let lo_whisker = finite
        .iter()
        .copied()
        .find(|&d| d >= lo_fence)
        .map_or(q1, |d| d.min(q1));
    let hi_whisker = finite
        .iter()
        .rev()
        .copied()
        .find(|&d| d <= hi_fence)
        .map_or(q3, |d| d.max(q3));
    SpanStats {
        start_ms: span.start_ms,
        end_ms: span.end_ms,
        count: finite.len(),
        max_abs_mv: finite.iter().fold(0.0, |m, d| m.max(d.abs())),
        mean_mv: finite.iter().sum::<f64>() / finite.len() as f64,
        q1,
        median,
        q3,
        lo_whisker,
        hi_whisker,
        nonfinite_count,
    }
}

/// Signed deviations `test - reference` for every sample whose time lies
/// in any of `spans`.
pub fn deviations_in(reference: &TraceRecord, test: &TraceRecord, spans: &[Span]) -> Vec<f64> {
    let mut out = Vec::new();
    for (s, &t) in reference.times.iter().enumerate() {
        if spans.iter().any(|sp| sp.contains(t)) {
            out.extend(test.row(s).iter().zip(reference.row(s)).map(|(a, b)| a - b));
        }
    }
    out
}

/// Compares somatic voltages of `test` against `reference` over `spans`.
pub fn compare(
    reference: &TraceRecord,
    test: &TraceRecord,
    spans: &[Span],
) -> Result<DeviationReport> {
    if !reference.same_grid(test) {
        return Err(Error::contract(format!(
            "traces differ in shape: reference {} samples x {} neurons, test {} x {}",
            reference.samples(),
            reference.neurons(),
            test.samples(),
            test.neurons()
        )));
    }
    let (first, last) = match (reference.times.first(), reference.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    for span in spans {
        let ordered =
            span.start_ms.is_finite() && span.end_ms.is_finite() && span.start_ms <= span.end_ms;
        if !ordered || span.start_ms < first || span.end_ms > last {
            return Err(Error::contract(format!(
                "span {}..{} ms lies outside the trace ({first}..{last} ms)",
                span.start_ms, span.end_ms
            )));
        }
    }
    let stats = spans
        .iter()
        .map(|&span| box_stats(span, &deviations_in(reference, test, &[span])))
        .collect();
    let all: Vec<f64> = test
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| a - b)
        .collect();
    Ok(DeviationReport {
        spans: stats,
        global_max_abs_mv: all
            .iter()
            .filter(|d| d.is_finite())
            .fold(0.0, |m, d| m.max(d.abs())),
        nonfinite_count: all.iter().filter(|d| !d.is_finite()).count(),
    })
}

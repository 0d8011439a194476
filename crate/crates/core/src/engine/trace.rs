//! Sampled somatic voltage traces and their CSV form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimulationConfig;
use crate::error::{Error, Result};
use crate::model::StateMatrix;

/// First sample at which non-finite state was seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMark {
    pub sample: usize,
    pub time_ms: f64,
}

/// Somatic voltages of every neuron at every sample instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub times: Vec<f64>,
    neurons: usize,
    /// Row-major `[samples x neurons]`, mV.
    v_soma: Vec<f64>,
    pub config: Option<SimulationConfig>,
    pub divergence: Option<DivergenceMark>,
    /// Full state at every sample, when requested.
    pub full_state: Option<Vec<StateMatrix>>,
}

impl TraceRecord {
    pub fn new(neurons: usize) -> Self {
        TraceRecord {
            times: Vec::new(),
            neurons,
            v_soma: Vec::new(),
            config: None,
            divergence: None,
            full_state: None,
        }
    }

    pub fn from_rows(times: Vec<f64>, neurons: usize, v_soma: Vec<f64>) -> Result<Self> {
        if v_soma.len() != times.len() * neurons {
            return Err(Error::contract(format!(
                "{} voltages do not form {} rows of {neurons}",
                v_soma.len(),
                times.len()
            )));
        }
        Ok(TraceRecord {
            times,
            neurons,
            v_soma,
            config: None,
            divergence: None,
            full_state: None,
        })
    }

    pub fn push(&mut self, time_ms: f64, row: &[f64]) {
        assert_eq!(row.len(), self.neurons, "sample row width");
        self.times.push(time_ms);
        self.v_soma.extend_from_slice(row);
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn samples(&self) -> usize {
        self.times.len()
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.v_soma[sample * self.neurons..(sample + 1) * self.neurons]
    }

    pub fn values(&self) -> &[f64] {
        &self.v_soma
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.v_soma
    }

    /// Voltage trace of one neuron.
    pub fn column(&self, neuron: usize) -> Vec<f64> {
        (0..self.samples())
            .map(|s| self.v_soma[s * self.neurons + neuron])
            .collect()
    }

    pub fn nonfinite_count(&self) -> usize {
        self.v_soma.iter().filter(|v| !v.is_finite()).count()
    }

    /// Same sampling grid and neuron count, compared bitwise on times.
    pub fn same_grid(&self, other: &TraceRecord) -> bool {
        self.neurons == other.neurons
            && self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Bitwise equality of times and voltages.
    pub fn bitwise_eq(&self, other: &TraceRecord) -> bool {
        self.same_grid(other)
            && self.v_soma.len() == other.v_soma.len()
            && self
                .v_soma
                .iter()
                .zip(&other.v_soma)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// CSV with header `time_ms,v0,...,v{N-1}`; numbers in shortest
    /// round-trip form.
    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.neurons + 1);
        header.push("time_ms".to_string());
        header.extend((0..self.neurons).map(|i| format!("v{i}")));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.neurons + 1);
        for s in 0..self.samples() {
            record.clear();
            record.push(self.times[s].to_string());
            record.extend(self.row(s).iter().map(f64::to_string));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(BufWriter::new(file))
    }

    pub fn read_csv_from<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        if header.get(0) != Some("time_ms") {
            return Err(Error::Parse(
                "trace CSV must start with a `time_ms` column".into(),
            ));
        }
        let neurons = header.len() - 1;
        for (i, name) in header.iter().skip(1).enumerate() {
            if name != format!("v{i}") {
                return Err(Error::Parse(format!("unexpected trace column `{name}`")));
            }
        }
        let mut trace = TraceRecord::new(neurons);
        let mut row = Vec::with_capacity(neurons);
        for record in reader.records() {
            let record = record?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
            };
            let time = parse(&record[0])?;
            row.clear();
            for field in record.iter().skip(1) {
                row.push(parse(field)?);
            }
            trace.push(time, &row);
        }
        Ok(trace)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(BufReader::new(file))
    }

    /// JSON sidecar echoing the configuration and divergence status.
    pub fn sidecar(&self) -> TraceSidecar {
        TraceSidecar {
            config: self.config.clone(),
            samples: self.samples(),
            neurons: self.neurons,
            divergence: self.divergence,
            nonfinite_count: self.nonfinite_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub config: Option<SimulationConfig>,
    pub samples: usize,
    pub neurons: usize,
    pub divergence: Option<DivergenceMark>,
    pub nonfinite_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = TraceRecord::new(3);
        t.push(0.0, &[-60.0, 0.1 + 0.2, f64::MIN_POSITIVE]);
        t.push(1.0, &[-59.123456789012345, 1e300, -0.0]);
        let mut buf = Vec::new();
        t.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_ms,v0,v1,v2\n"));
        let back = TraceRecord::read_csv_from(buf.as_slice()).unwrap();
        assert!(back.bitwise_eq(&t));
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(TraceRecord::read_csv_from("t,v0\n0,1\n".as_bytes()).is_err());
        assert!(TraceRecord::read_csv_from("time_ms,v1\n0,1\n".as_bytes()).is_err());
        assert!(TraceRecord::read_csv_from("time_ms,v0\n0,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn columns_and_counts() {
        let t = TraceRecord::from_rows(vec![0.0, 1.0], 2, vec![1.0, 2.0, f64::NAN, 4.0]).unwrap();
        assert_eq!(t.column(1), vec![2.0, 4.0]);
        assert_eq!(t.nonfinite_count(), 1);
        assert!(TraceRecord::from_rows(vec![0.0], 2, vec![1.0]).is_err());
    }
}

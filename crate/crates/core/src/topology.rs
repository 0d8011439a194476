//! Gap-junction connectivity on a 3-D wrap-around grid.
//!
//! Neurons sit on a `d x d x d` torus. Every unordered pair closer than
//! `r_max` is a candidate with weight `exp(-r^2) - exp(-r_max^2)`; exactly
//! `floor(avg_degree * N / 2)` pairs are drawn without replacement in
//! proportion to their weights, and each is emitted in both directions.
//! Enumerating candidates neuron by neuron accounts for the number of
//! neighbours at each distance, so no explicit shell-density factor is
//! applied.
//!
//! Weighted sampling without replacement uses exponential keys
//! (Efraimidis-Spirakis): candidate `i` gets `ln(u_i) / w_i` with `u_i`
//! uniform on `(0, 1]`, and the largest keys win. Candidates are visited in
//! ascending `(a, b)` order and `u_i` is `1 - x` for the `i`-th `f64` drawn
//! from [`rand_chacha::ChaCha8Rng`] seeded through `seed_from_u64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier stored with every generated topology.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/es-keys-v1";

pub const DEFAULT_AVG_DEGREE: f64 = 10.0;
pub const DEFAULT_R_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl GridPoint {
    pub fn new(x: usize, y: usize, z: usize) -> Self {
        GridPoint { x, y, z }
    }

    pub fn from_index(index: usize, d: usize) -> Self {
        GridPoint {
            x: index % d,
            y: (index / d) % d,
            z: index / (d * d),
        }
    }

    pub fn index(&self, d: usize) -> usize {
        (self.z * d + self.y) * d + self.x
    }
}

/// Euclidean distance on the torus: each axis uses the shorter way round.
pub fn torus_distance(a: GridPoint, b: GridPoint, d: usize) -> f64 {
    let axis = |p: usize, q: usize| {
        let delta = p.abs_diff(q);
        delta.min(d - delta) as f64
    };
    let (dx, dy, dz) = (axis(a.x, b.x), axis(a.y, b.y), axis(a.z, b.z));
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Unnormalized probability of connecting two neurons `r` apart.
pub fn connection_weight(r: f64, r_max: f64) -> f64 {
    if r <= 0.0 || r >= r_max {
        0.0
    } else {
        (-r * r).exp() - (-r_max * r_max).exp()
    }
}

/// Generation settings echoed alongside an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyMeta {
    pub grid_dim: usize,
    pub avg_degree: f64,
    pub r_max: f64,
    pub seed: u64,
    pub rng_algorithm: String,
}

/// Directed gap-junction edges sorted by `(tgt, src)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    neurons: usize,
    src: Vec<u32>,
    tgt: Vec<u32>,
    meta: Option<TopologyMeta>,
}

impl Topology {
    /// No junctions at all.
    pub fn unconnected(neurons: usize) -> Self {
        Topology {
            neurons,
            src: Vec::new(),
            tgt: Vec::new(),
            meta: None,
        }
    }

    /// Builds a topology from explicit directed edges, sorting them by
    /// target. Only index bounds are checked; see [`Topology::validate`]
    /// for the full invariants of generated networks.
    pub fn from_edges(neurons: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut edges: Vec<(u32, u32)> = edges.into_iter().collect();
        if let Some(&(s, t)) = edges
            .iter()
            .find(|&&(s, t)| s as usize >= neurons || t as usize >= neurons)
        {
            return Err(Error::contract(format!(
                "edge {s}->{t} out of range for {neurons} neurons"
            )));
        }
        edges.sort_unstable_by_key(|&(s, t)| (t, s));
        let (src, tgt) = edges.into_iter().unzip();
        Ok(Topology {
            neurons,
            src,
            tgt,
            meta: None,
        })
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn src(&self) -> &[u32] {
        &self.src
    }

    pub fn tgt(&self) -> &[u32] {
        &self.tgt
    }

    pub fn meta(&self) -> Option<&TopologyMeta> {
        self.meta.as_ref()
    }

    pub fn grid_dim(&self) -> Option<usize> {
        self.meta.as_ref().map(|m| m.grid_dim)
    }

    pub fn mean_degree(&self) -> f64 {
        if self.neurons == 0 {
            0.0
        } else {
            self.edge_count() as f64 / self.neurons as f64
        }
    }

    pub fn is_sorted_by_target(&self) -> bool {
        self.tgt
            .iter()
            .zip(&self.src)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| (w[0].0, w[0].1) <= (w[1].0, w[1].1))
    }

    /// Start offset of every target's edge segment, length `N + 1`.
    pub fn target_offsets(&self) -> Vec<usize> {
        let mut offsets = vec![0usize; self.neurons + 1];
        for &t in &self.tgt {
            offsets[t as usize + 1] += 1;
        }
        for i in 0..self.neurons {
            offsets[i + 1] += offsets[i];
        }
        offsets
    }

    /// Distances of all edges on the generating grid.
    pub fn edge_distances(&self) -> Option<Vec<f64>> {
        let d = self.grid_dim()?;
        Some(
            self.src
                .iter()
                .zip(&self.tgt)
                .map(|(&s, &t)| {
                    torus_distance(
                        GridPoint::from_index(s as usize, d),
                        GridPoint::from_index(t as usize, d),
                        d,
                    )
                })
                .collect(),
        )
    }

    /// Checks bounds, sort order, absence of self-junctions and that every
    /// junction appears once in each direction; for generated topologies
    /// also that every edge is shorter than `r_max`.
    pub fn validate(&self) -> Result<()> {
        if self.src.len() != self.tgt.len() {
            return Err(Error::contract("src and tgt differ in length"));
        }
        if self
            .src
            .iter()
            .chain(&self.tgt)
            .any(|&i| i as usize >= self.neurons)
        {
            return Err(Error::contract("edge index out of range"));
        }
        if !self.is_sorted_by_target() {
            return Err(Error::contract("edges are not sorted by target"));
        }
        if self.src.iter().zip(&self.tgt).any(|(s, t)| s == t) {
            return Err(Error::contract("self-junction present"));
        }
        let mut forward: Vec<(u32, u32)> = self
            .src
            .iter()
            .copied()
            .zip(self.tgt.iter().copied())
            .collect();
        let mut backward: Vec<(u32, u32)> = forward.iter().map(|&(s, t)| (t, s)).collect();
        forward.sort_unstable();
        backward.sort_unstable();
        if forward != backward || forward.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::contract(
                "every junction must appear exactly once in each direction",
            ));
        }
        if let (Some(meta), Some(distances)) = (&self.meta, self.edge_distances()) {
            if distances.iter().any(|&r| r >= meta.r_max) {
                return Err(Error::contract("edge longer than r_max"));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = csv::Writer::from_writer(BufWriter::new(file));
        out.write_record(["src", "tgt"])?;
        for (s, t) in self.src.iter().zip(&self.tgt) {
            out.write_record([s.to_string(), t.to_string()])?;
        }
        out.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let meta = self
            .meta
            .as_ref()
            .ok_or_else(|| Error::contract("topology was not generated; no metadata to write"))?;
        let mut file = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        serde_json::to_writer_pretty(&mut file, meta)?;
        writeln!(file).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads an edge list written by [`Topology::write_csv`].
    pub fn read_csv(path: &Path, neurons: usize, meta: Option<TopologyMeta>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(BufReader::new(file));
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["src", "tgt"] {
            return Err(Error::Parse(format!(
                "{}: expected header `src,tgt`",
                path.display()
            )));
        }
        let mut edges = Vec::new();
        for record in reader.deserialize() {
            let (s, t): (u32, u32) = record?;
            edges.push((s, t));
        }
        let mut topology = Topology::from_edges(neurons, edges)?;
        topology.meta = meta;
        Ok(topology)
    }
}

/// Every unordered pair `(a, b)`, `a < b`, with `0 < r < r_max`, in
/// ascending order, together with its distance.
pub fn candidate_pairs(d: usize, r_max: f64) -> Vec<(u32, u32, f64)> {
    let n = d * d * d;
    let reach = (r_max.ceil() as usize).min(d / 2) as isize;
    let di = d as isize;
    let mut pairs = Vec::new();
    let mut neighbours = Vec::new();
    for a in 0..n {
        let pa = GridPoint::from_index(a, d);
        neighbours.clear();
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let wrap = |c: usize, off: isize| (c as isize + off).rem_euclid(di) as usize;
                    let pb = GridPoint::new(wrap(pa.x, dx), wrap(pa.y, dy), wrap(pa.z, dz));
                    let b = pb.index(d);
                    if b > a {
                        neighbours.push(b);
                    }
                }
            }
        }
        neighbours.sort_unstable();
        neighbours.dedup();
        for &b in &neighbours {
            let r = torus_distance(pa, GridPoint::from_index(b, d), d);
            if r < r_max {
                pairs.push((a as u32, b as u32, r));
            }
        }
    }
    pairs
}

/// Samples a gap-junction network on a `d^3` torus.
pub fn generate(d: usize, avg_degree: f64, r_max: f64, seed: u64) -> Result<Topology> {
    if d < 2 {
        return Err(Error::config(format!(
            "grid size must be at least 2, got {d}"
        )));
    }
    if !(avg_degree.is_finite() && avg_degree >= 0.0) {
        return Err(Error::config(format!(
            "average degree must be non-negative, got {avg_degree}"
        )));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::config(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    let n = d
        .checked_pow(3)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::config(format!("grid size {d} overflows the neuron index type")))?;
    let wanted = (avg_degree * n as f64 / 2.0).floor() as usize;
    let meta = TopologyMeta {
        grid_dim: d,
        avg_degree,
        r_max,
        seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
    };
    if wanted == 0 {
        return Ok(Topology {
            meta: Some(meta),
            ..Topology::unconnected(n)
        });
    }

    let candidates = candidate_pairs(d, r_max);
    if wanted > candidates.len() {
        let max_degree = 2.0 * candidates.len() as f64 / n as f64;
        return Err(Error::config(format!(
            "average degree {avg_degree} is infeasible for r_max = {r_max} on a {d}^3 grid; \
             at most {max_degree:.3} is achievable"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, &(_, _, r))| {
            let u = 1.0 - rng.random::<f64>();
            (u.ln() / connection_weight(r, r_max), i)
        })
        .collect();
    keyed.select_nth_unstable_by(wanted - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(wanted);

    let mut edges = Vec::with_capacity(2 * wanted);
    for &(_, i) in &keyed {
        let (a, b, _) = candidates[i];
        edges.push((a, b));
        edges.push((b, a));
    }
    let mut topology = Topology::from_edges(n, edges)?;
    topology.meta = Some(meta);
    Ok(topology)
}

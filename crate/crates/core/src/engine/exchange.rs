//! Gap-junction exchange: gather dendritic voltages over the edge list,
//! apply the Connexin-36 current law per edge, scatter-add into targets.
//!
//! Edges are sorted by target, so the scatter is a segmented reduction: each
//! target owns a contiguous run of edges and sums them in ascending edge
//! order. Splitting work by whole target segments keeps every sum's order
//! fixed regardless of how many threads run it.

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::precision::{Arith, F64};
use crate::topology::Topology;

/// Current through one junction for a voltage difference `dv` (source
/// minus target), flowing into the target.
#[inline(always)]
pub fn junction_current<A: Arith>(dv: A::F, g_gj: A::F) -> A::F {
    g_gj * dv * (A::lit(0.2) + A::lit(0.8) * A::exp(-(dv * dv) / A::lit(100.0)))
}

/// `g_gj * dv * (0.2 + 0.8 exp(-dv^2 / 100))` in `f64`.
pub fn gap_junction_current(dv: f64, g_gj: f64) -> f64 {
    junction_current::<F64>(dv, g_gj)
}

/// Edge list in target-segmented form.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedEdges {
    pub src: Vec<u32>,
    /// `offsets[t]..offsets[t + 1]` are the edges into target `t`.
    pub offsets: Vec<usize>,
}

impl SegmentedEdges {
    pub fn from_topology(topology: &Topology) -> Result<Self> {
        let n = topology.neurons();
        if topology
            .src()
            .iter()
            .chain(topology.tgt())
            .any(|&i| i as usize >= n)
        {
            return Err(Error::contract("edge index out of range"));
        }
        if !topology.is_sorted_by_target() {
            return Err(Error::contract("edge list must be sorted by target"));
        }
        Ok(SegmentedEdges {
            src: topology.src().to_vec(),
            offsets: topology.target_offsets(),
        })
    }

    pub fn neurons(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }
}

/// Fills `out[j]` with the net junction current into target
/// `first_target + j`.
#[inline]
pub(crate) fn exchange_segment<A: Arith>(
    v_dend: &[A::F],
    edges: &SegmentedEdges,
    g_gj: A::F,
    first_target: usize,
    out: &mut [A::F],
) {
    for (j, slot) in out.iter_mut().enumerate() {
        let t = first_target + j;
        let v_t = v_dend[t];
        let mut acc = A::F::zero();
        for &s in &edges.src[edges.offsets[t]..edges.offsets[t + 1]] {
            acc = acc + junction_current::<A>(v_dend[s as usize] - v_t, g_gj);
        }
        *slot = acc;
    }
}

/// Exchange over all targets, parallel in chunks of whole targets when
/// `parallel` is set. Results are identical either way.
pub(crate) fn exchange_into<A: Arith>(
    v_dend: &[A::F],
    edges: &SegmentedEdges,
    g_gj: A::F,
    out: &mut [A::F],
    parallel: Option<usize>,
) {
    match parallel {
        Some(chunk) => out
            .par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(c, seg)| exchange_segment::<A>(v_dend, edges, g_gj, c * chunk, seg)),
        None => exchange_segment::<A>(v_dend, edges, g_gj, 0, out),
    }
}

/// Net gap-junction current into every neuron's dendrite.
pub fn exchange(v_dend: &[f64], topology: &Topology, g_gj: f64) -> Result<Vec<f64>> {
    if v_dend.len() != topology.neurons() {
        return Err(Error::contract(format!(
            "{} voltages for a {}-neuron topology",
            v_dend.len(),
            topology.neurons()
        )));
    }
    let edges = SegmentedEdges::from_topology(topology)?;
    let mut out = vec![0.0; v_dend.len()];
    exchange_into::<F64>(v_dend, &edges, g_gj, &mut out, None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn junction_current_examples() {
        assert_eq!(gap_junction_current(0.0, 0.7), 0.0);
        let i = gap_junction_current(10.0, 1.0);
        assert!((i - 10.0 * (0.2 + 0.8 * (-1f64).exp())).abs() < 1e-12);
        assert!((i - 4.943036).abs() < 1e-6);
        for dv in [1000.0, -1000.0] {
            let ratio = gap_junction_current(dv, 2.0) / (2.0 * dv);
            assert!((ratio - 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn junction_current_is_odd() {
        for dv in [0.3, 4.0, 17.5] {
            assert_eq!(
                gap_junction_current(-dv, 0.05),
                -gap_junction_current(dv, 0.05)
            );
        }
    }

    #[test]
    fn empty_and_uniform() {
        let empty = Topology::unconnected(4);
        assert_eq!(
            exchange(&[1.0, 2.0, 3.0, 4.0], &empty, 0.05).unwrap(),
            vec![0.0; 4]
        );
        let ring = Topology::from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        assert_eq!(exchange(&[-60.0; 3], &ring, 0.05).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn current_flows_downhill() {
        let pair = Topology::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        let i = exchange(&[-50.0, -60.0], &pair, 0.05).unwrap();
        assert!(i[1] > 0.0 && i[0] < 0.0);
        assert_eq!(i[0], -i[1]);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let pair = Topology::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert!(matches!(
            exchange(&[0.0; 3], &pair, 0.05),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn parallel_chunks_match_serial() {
        let edges: Vec<(u32, u32)> = (0..50u32)
            .flat_map(|i| [(i, (i * 7 + 3) % 50), ((i * 7 + 3) % 50, i)])
            .filter(|(a, b)| a != b)
            .collect();
        let topo = Topology::from_edges(50, edges).unwrap();
        let seg = SegmentedEdges::from_topology(&topo).unwrap();
        let v: Vec<f64> = (0..50).map(|i| -70.0 + (i as f64 * 1.37) % 30.0).collect();
        let mut serial = vec![0.0; 50];
        let mut par = vec![0.0; 50];
        exchange_into::<F64>(&v, &seg, 0.05, &mut serial, None);
        exchange_into::<F64>(&v, &seg, 0.05, &mut par, Some(7));
        assert_eq!(serial, par);
    }
}

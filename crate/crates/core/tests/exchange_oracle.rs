//! Gather/scatter exchange against a dense one-hot matrix formulation.

use olive_sim::engine::{exchange, gap_junction_current};
use olive_sim::topology::Topology;
use proptest::prelude::*;

mod common;
use common::dense_exchange;

fn graph() -> impl Strategy<Value = (Vec<f64>, Vec<(u32, u32)>, f64)> {
    (1usize..=32).prop_flat_map(|n| {
        (
            prop::collection::vec(-80.0..20.0f64, n),
            prop::collection::btree_set((0..n as u32, 0..n as u32), 0..=(n * n).min(160)),
            0.0..0.2f64,
        )
            .prop_map(|(v, e, g)| (v, e.into_iter().filter(|(s, t)| s != t).collect(), g))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exchange_equals_dense((v, edges, g) in graph()) {
        let topo = Topology::from_edges(v.len(), edges.iter().copied()).unwrap();
        let got = exchange(&v, &topo, g).unwrap();
        let want = dense_exchange(&v, &edges, g);
        for (a, b) in got.iter().zip(&want) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn symmetric_graphs_conserve_current((v, edges, g) in graph()) {
        let both: Vec<(u32, u32)> = edges.iter().flat_map(|&(s, t)| [(s, t), (t, s)]).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let topo = Topology::from_edges(v.len(), both).unwrap();
        let total: f64 = exchange(&v, &topo, g).unwrap().iter().sum();
        let scale: f64 = exchange(&v, &topo, g).unwrap().iter().map(|x| x.abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * scale.max(1.0));
    }
}

#[test]
fn known_values() {
    assert_eq!(gap_junction_current(0.0, 0.05), 0.0);
    let i = gap_junction_current(10.0, 0.05);
    assert!((i - 0.05 * 10.0 * (0.2 + 0.8 * (-1.0f64).exp())).abs() < 1e-15);
    assert_eq!(gap_junction_current(-10.0, 0.05), -i);
    let topo = Topology::from_edges(2, [(0, 1), (1, 0)]).unwrap();
    let out = exchange(&[-60.0, -50.0], &topo, 0.05).unwrap();
    assert_eq!(out, vec![i, -i]);
}

#[test]
fn mismatched_lengths_are_rejected() {
    let topo = Topology::from_edges(3, [(0, 1)]).unwrap();
    assert!(exchange(&[0.0, 1.0], &topo, 0.05).is_err());
}

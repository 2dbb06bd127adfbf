use trifree_core::adversary::{oblivious_bipartite_trace, validate_trace};
use trifree_core::graph::{DynamicGraph, UpdateKind};

/// Final edge count of the n = 2000, Δ = 64, T = 10^5, 70% insert trace at
/// seed 7, measured once and frozen.
const STEADY_EDGES_SEED7: usize = 39_570;

#[test]
fn oblivious_final_edge_count_fixture() {
    let trace = oblivious_bipartite_trace(2000, 64, 100_000, 0.7, 7).unwrap();
    assert!(validate_trace(&trace, 2000, 64).is_clean());
    let mut g = DynamicGraph::new(2000, 64).unwrap();
    let (mut inserts, mut deletes) = (0usize, 0usize);
    for up in trace.steps.iter().flatten() {
        g.apply(up.kind, up.u, up.v).unwrap();
        match up.kind {
            UpdateKind::Insert => inserts += 1,
            UpdateKind::Delete => deletes += 1,
        }
    }
    assert_eq!(trace.noop_count(), 0);
    assert_eq!(g.edge_count(), inserts - deletes);
    assert_eq!(g.edge_count(), STEADY_EDGES_SEED7);
    assert!(g.max_degree() <= 64);
}

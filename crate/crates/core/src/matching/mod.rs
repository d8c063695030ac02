//! Value graphs, maximum matchings, and matching-based edge filtering.

mod augment;
mod filter;
mod graph;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

pub(crate) use augment::extend_to_cover;
pub use augment::{compute_maximum_matching, matching_covering_x, MatchWrite, Matching, NoCovering};
pub use filter::{remove_edges_from_g, unsupported_edges};
pub use graph::{add_edges, Edge, EdgeList, ValueGraph};

use crate::domain::VariableId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchingError {
    #[error("variable {0} is not covered by the matching")]
    UncoveredVariable(VariableId),
    #[error("edge ({}, {}) is not in the graph", .0.var, .0.value)]
    UnknownEdge(Edge),
}

/// Removes `edges` from `g`, dropping any of them that are matched from `m`.
///
/// Returns true iff at least one matched edge was removed. Fails without
/// modifying anything if some edge is absent from `g`.
pub fn remove_edges(g: &mut ValueGraph, m: &mut Matching, edges: &[Edge]) -> Result<bool, MatchingError> {
    if let Some(e) = edges.iter().find(|e| !g.contains(**e)) {
        return Err(MatchingError::UnknownEdge(*e));
    }
    m.fit(g);
    let mut damaged = false;
    let mut sink = Vec::new();
    for e in edges {
        let x = g.var_slot(e.var).expect("checked");
        let a = g.value_slot(e.value).expect("checked");
        if m.is_matched_edge(x, a) {
            m.unassign_var(x, &mut sink);
            damaged = true;
        }
        g.delete_edge(x, a);
    }
    Ok(damaged)
}

/// Order-independent digest of the vertex sets, edge set, and matched pairs.
pub fn graph_checksum(g: &ValueGraph, m: &Matching) -> u64 {
    let mut vars = g.vars().to_vec();
    vars.sort_unstable();
    let mut values = g.values().to_vec();
    values.sort_unstable();
    let mut edges = g.edges();
    edges.sort_unstable();
    let mut pairs = m.pairs(g);
    pairs.sort_unstable();

    let mut h = DefaultHasher::new();
    vars.hash(&mut h);
    values.hash(&mut h);
    edges.hash(&mut h);
    pairs.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counters::OpCounters;
    use crate::domain::{FiniteDomain, ValueId};

    fn e(x: u32, v: u32) -> Edge {
        Edge::new(VariableId(x), ValueId(v))
    }

    fn build(doms: &[&[u32]]) -> ValueGraph {
        let doms: Vec<FiniteDomain> = doms.iter().map(|d| d.iter().map(|&v| ValueId(v)).collect()).collect();
        ValueGraph::build(doms.iter().enumerate().map(|(i, d)| (VariableId(i as u32), d)))
    }

    #[test]
    fn remove_unmatched_edge_keeps_matching() {
        let mut g = build(&[&[0, 1], &[1, 2]]);
        let mut m = compute_maximum_matching(&g, &mut OpCounters::default());
        let before = m.clone();
        assert!(!remove_edges(&mut g, &mut m, &[e(0, 1)]).unwrap());
        assert_eq!(m, before);
        assert_eq!(g.num_edges(), 3);
    }

    #[test]
    fn remove_matched_edge_uncovers() {
        let mut g = build(&[&[0, 1], &[1, 2]]);
        let mut m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert!(remove_edges(&mut g, &mut m, &[e(0, 0)]).unwrap());
        assert_eq!(m.mate_of_var(0), None);
        assert!(m.is_valid_for(&g));
    }

    #[test]
    fn remove_mixed_list() {
        // Matching is X0-0, X1-1, X2-2.
        let mut g = build(&[&[0, 1, 2], &[1, 2], &[2, 0]]);
        let mut m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert_eq!(m.len(), 3);
        let matched = m.pairs(&g)[1];
        assert_eq!(matched, e(1, 1));
        assert!(remove_edges(&mut g, &mut m, &[e(0, 1), matched, e(2, 0)]).unwrap());
        assert_eq!(m.len(), 2);
        assert_eq!(g.num_edges(), 4);
    }

    #[test]
    fn remove_unknown_edge_fails_cleanly() {
        let mut g = build(&[&[0]]);
        let mut m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert_eq!(
            remove_edges(&mut g, &mut m, &[e(0, 0), e(0, 4)]),
            Err(MatchingError::UnknownEdge(e(0, 4)))
        );
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn checksum_is_order_independent() {
        let mut g1 = ValueGraph::new();
        add_edges(&mut g1, &[e(0, 0), e(0, 1), e(1, 1)]);
        let mut g2 = ValueGraph::new();
        add_edges(&mut g2, &[e(1, 1), e(0, 1), e(0, 0)]);
        let m1 = Matching::empty_for(&g1);
        let m2 = Matching::empty_for(&g2);
        assert_eq!(graph_checksum(&g1, &m1), graph_checksum(&g2, &m2));

        let mut m = Matching::empty_for(&g1);
        remove_edges(&mut g1, &mut m, &[e(0, 1)]).unwrap();
        assert_ne!(graph_checksum(&g1, &m), graph_checksum(&g2, &m2));
    }
}

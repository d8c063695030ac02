//! Removal of edges that belong to no maximum matching.
//!
//! Given a matching covering every variable, orient matched edges
//! value -> variable and unmatched edges variable -> value. An unmatched edge
//! `(x, a)` belongs to some maximum matching iff `x` and `a` lie in the same
//! strongly connected component (an even alternating cycle) or `a` can reach
//! a free value (an even alternating path from a free vertex). Matched edges
//! are always kept.

use std::collections::VecDeque;

use super::{Edge, EdgeList, Matching, MatchingError, ValueGraph};
use crate::counters::OpCounters;

const UNSET: usize = usize::MAX;

/// Slot pairs `(x, a)` of edges in no maximum matching, ordered by variable
/// slot then value slot. Does not modify the graph.
pub fn unsupported_edges(
    g: &ValueGraph,
    m: &Matching,
    counters: &mut OpCounters,
) -> Result<Vec<(usize, usize)>, MatchingError> {
    let p = g.num_vars();
    let d = g.num_values();
    for x in 0..p {
        if m.mate_of_var(x).is_none() {
            return Err(MatchingError::UncoveredVariable(g.var_id(x)));
        }
    }
    let n = p + d;

    // Successors in the oriented graph. Variables are nodes 0..p, values p..p+d.
    let mut succ: Vec<Vec<usize>> = Vec::with_capacity(n);
    for x in 0..p {
        let mate = m.mate_of_var(x);
        succ.push(g.var_neighbors(x).filter(|&a| Some(a) != mate).map(|a| p + a).collect());
    }
    for a in 0..d {
        succ.push(m.mate_of_value(a).into_iter().collect());
    }

    // Vertices that can reach a free value: reverse search from free values.
    let mut reaches_free = vec![false; n];
    let mut queue = VecDeque::new();
    for a in 0..d {
        if m.mate_of_value(a).is_none() {
            reaches_free[p + a] = true;
            queue.push_back(p + a);
        }
    }
    while let Some(v) = queue.pop_front() {
        counters.filter_visits += 1;
        if v < p {
            let a = m.mate_of_var(v).expect("covered");
            if !reaches_free[p + a] {
                reaches_free[p + a] = true;
                queue.push_back(p + a);
            }
        } else {
            let a = v - p;
            for x in g.value_neighbors(a) {
                if m.mate_of_var(x) != Some(a) && !reaches_free[x] {
                    reaches_free[x] = true;
                    queue.push_back(x);
                }
            }
        }
    }

    let comp = strongly_connected_components(&succ, counters);

    let mut out = Vec::new();
    for x in 0..p {
        let mate = m.mate_of_var(x);
        for a in g.var_neighbors(x) {
            if Some(a) == mate || reaches_free[p + a] || comp[x] == comp[p + a] {
                continue;
            }
            out.push((x, a));
        }
    }
    Ok(out)
}

/// Component label per node, by iterative Tarjan.
fn strongly_connected_components(succ: &[Vec<usize>], counters: &mut OpCounters) -> Vec<usize> {
    let n = succ.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut comp = vec![UNSET; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        counters.filter_visits += 1;

        while let Some(&mut (v, ref mut child)) = calls.last_mut() {
            if let Some(&w) = succ[v].get(*child) {
                *child += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    counters.filter_visits += 1;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(u, _)) = calls.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Removes from `g` exactly the edges that belong to no maximum matching,
/// given a matching `m` covering all variables. Returns the removed edges.
pub fn remove_edges_from_g(
    g: &mut ValueGraph,
    m: &Matching,
    counters: &mut OpCounters,
) -> Result<EdgeList, MatchingError> {
    let doomed = unsupported_edges(g, m, counters)?;
    let mut removed = Vec::with_capacity(doomed.len());
    for (x, a) in doomed {
        g.delete_edge(x, a);
        removed.push(Edge::new(g.var_id(x), g.value_id(a)));
    }
    Ok(removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FiniteDomain, ValueId, VariableId};
    use crate::matching::compute_maximum_matching;

    fn graph(doms: &[&[u32]]) -> ValueGraph {
        let doms: Vec<FiniteDomain> = doms.iter().map(|d| d.iter().map(|&v| ValueId(v)).collect()).collect();
        ValueGraph::build(doms.iter().enumerate().map(|(i, d)| (VariableId(i as u32), d)))
    }

    fn filter(doms: &[&[u32]]) -> Vec<(u32, u32)> {
        let mut g = graph(doms);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        let removed = remove_edges_from_g(&mut g, &m, &mut OpCounters::default()).unwrap();
        removed.iter().map(|e| (e.var.0, e.value.0)).collect()
    }

    #[test]
    fn three_vars_filter() {
        assert_eq!(filter(&[&[0, 1], &[0, 1], &[0, 1, 2]]), vec![(2, 0), (2, 1)]);
    }

    #[test]
    fn symmetric_square_keeps_everything() {
        assert!(filter(&[&[0, 1], &[0, 1]]).is_empty());
    }

    #[test]
    fn free_value_path_keeps_edges() {
        // X2 needs b, so X1-b is unsupported.
        assert_eq!(filter(&[&[0, 1], &[1]]), vec![(0, 1)]);
        // X1 in {a,b,c}, X2 in {a,b}: c free, everything supported.
        assert!(filter(&[&[0, 1, 2], &[0, 1]]).is_empty());
    }

    #[test]
    fn uncovered_variable_is_an_error() {
        let mut g = graph(&[&[0], &[0]]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert_eq!(
            remove_edges_from_g(&mut g, &m, &mut OpCounters::default()),
            Err(MatchingError::UncoveredVariable(VariableId(1)))
        );
    }

    #[test]
    fn tarjan_small_cycle() {
        let succ = vec![vec![1], vec![2], vec![0], vec![0]];
        let comp = strongly_connected_components(&succ, &mut OpCounters::default());
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[3], comp[0]);
    }
}

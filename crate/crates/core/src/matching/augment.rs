//! Maximum matching by Hopcroft-Karp phases.
//!
//! The same phase loop serves both from-scratch construction and extension of
//! an existing matching: only free variables seed the layered search, so
//! extending a matching with `k` uncovered variables costs `O(m * sqrt(k))`.

use std::collections::VecDeque;

use super::{Edge, ValueGraph};
use crate::counters::OpCounters;
use crate::domain::{ValueId, VariableId};

/// A set of vertex-disjoint edges of a [`ValueGraph`], addressed by slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    var_mate: Vec<Option<usize>>,
    val_mate: Vec<Option<usize>>,
}

/// A single slot write, recorded so that matching changes can be undone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchWrite {
    Var { slot: usize, prev: Option<usize> },
    Val { slot: usize, prev: Option<usize> },
}

impl Matching {
    /// Empty matching sized for `g`.
    pub fn empty_for(g: &ValueGraph) -> Self {
        Self {
            var_mate: vec![None; g.num_vars()],
            val_mate: vec![None; g.num_values()],
        }
    }

    /// Grows or truncates the slot tables to the dimensions of `g`.
    pub fn fit(&mut self, g: &ValueGraph) {
        self.var_mate.resize(g.num_vars(), None);
        self.val_mate.resize(g.num_values(), None);
    }

    pub fn len(&self) -> usize {
        self.var_mate.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn var_slots(&self) -> usize {
        self.var_mate.len()
    }

    pub fn mate_of_var(&self, x: usize) -> Option<usize> {
        self.var_mate.get(x).copied().flatten()
    }

    pub fn mate_of_value(&self, a: usize) -> Option<usize> {
        self.val_mate.get(a).copied().flatten()
    }

    pub fn value_of(&self, g: &ValueGraph, var: VariableId) -> Option<ValueId> {
        let x = g.var_slot(var)?;
        self.mate_of_var(x).map(|a| g.value_id(a))
    }

    pub fn is_matched_edge(&self, x: usize, a: usize) -> bool {
        self.mate_of_var(x) == Some(a)
    }

    /// True if every variable slot is matched.
    pub fn covers_all(&self) -> bool {
        self.var_mate.iter().all(Option::is_some)
    }

    /// Matched pairs as edges, ordered by variable slot.
    pub fn pairs(&self, g: &ValueGraph) -> Vec<Edge> {
        self.var_mate
            .iter()
            .enumerate()
            .filter_map(|(x, m)| m.map(|a| Edge::new(g.var_id(x), g.value_id(a))))
            .collect()
    }

    /// Mutually inverse tables and every pair an edge of `g`.
    pub fn is_valid_for(&self, g: &ValueGraph) -> bool {
        if self.var_mate.len() != g.num_vars() || self.val_mate.len() != g.num_values() {
            return false;
        }
        let vars_ok = self.var_mate.iter().enumerate().all(|(x, m)| match *m {
            Some(a) => self.val_mate[a] == Some(x) && g.has_edge_slots(x, a),
            None => true,
        });
        let vals_ok = self
            .val_mate
            .iter()
            .enumerate()
            .all(|(a, m)| m.is_none_or(|x| self.var_mate[x] == Some(a)));
        vars_ok && vals_ok
    }

    fn write_var(&mut self, x: usize, v: Option<usize>, log: &mut Vec<MatchWrite>) {
        log.push(MatchWrite::Var {
            slot: x,
            prev: self.var_mate[x],
        });
        self.var_mate[x] = v;
    }

    fn write_val(&mut self, a: usize, v: Option<usize>, log: &mut Vec<MatchWrite>) {
        log.push(MatchWrite::Val {
            slot: a,
            prev: self.val_mate[a],
        });
        self.val_mate[a] = v;
    }

    /// Pairs `x` with `a`. Any previous partners are left for the caller to
    /// re-pair, as happens along an augmenting path.
    pub(crate) fn assign(&mut self, x: usize, a: usize, log: &mut Vec<MatchWrite>) {
        self.write_var(x, Some(a), log);
        self.write_val(a, Some(x), log);
    }

    /// Unmatches `x` and its partner, if any.
    pub(crate) fn unassign_var(&mut self, x: usize, log: &mut Vec<MatchWrite>) {
        if let Some(a) = self.var_mate[x] {
            self.write_val(a, None, log);
            self.write_var(x, None, log);
        }
    }

    pub(crate) fn undo(&mut self, w: MatchWrite) {
        match w {
            MatchWrite::Var { slot, prev } => self.var_mate[slot] = prev,
            MatchWrite::Val { slot, prev } => self.val_mate[slot] = prev,
        }
    }
}

const UNREACHED: usize = usize::MAX;

/// Runs Hopcroft-Karp phases on `m` until no augmenting path remains.
/// Every slot write is appended to `log`.
pub(crate) fn augment_to_maximum(
    g: &ValueGraph,
    m: &mut Matching,
    counters: &mut OpCounters,
    log: &mut Vec<MatchWrite>,
) {
    m.fit(g);
    let p = g.num_vars();
    let d = g.num_values();
    let mut dist = vec![UNREACHED; p];
    let mut value_seen = vec![false; d];
    let mut used = vec![false; p];
    let mut queue = VecDeque::new();
    loop {
        dist.fill(UNREACHED);
        value_seen.fill(false);
        queue.clear();
        for (x, slot) in dist.iter_mut().enumerate() {
            if m.mate_of_var(x).is_none() {
                *slot = 0;
                queue.push_back(x);
            }
        }
        if queue.is_empty() {
            return;
        }
        counters.augment_searches += 1;

        // Layered BFS; stops expanding past the first layer that reaches a free value.
        let mut free_layer = UNREACHED;
        while let Some(x) = queue.pop_front() {
            counters.augment_visits += 1;
            if dist[x] >= free_layer {
                continue;
            }
            for a in g.var_neighbors(x) {
                if !value_seen[a] {
                    value_seen[a] = true;
                    counters.augment_visits += 1;
                }
                match m.mate_of_value(a) {
                    None => free_layer = free_layer.min(dist[x] + 1),
                    Some(y) if dist[y] == UNREACHED => {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                    Some(_) => {}
                }
            }
        }
        if free_layer == UNREACHED {
            return;
        }

        used.fill(false);
        let mut grew = false;
        for x in 0..p {
            if m.mate_of_var(x).is_none() && augment_from(g, m, x, &dist, free_layer, &mut used, counters, log) {
                grew = true;
            }
        }
        if !grew {
            return;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn augment_from(
    g: &ValueGraph,
    m: &mut Matching,
    x: usize,
    dist: &[usize],
    free_layer: usize,
    used: &mut [bool],
    counters: &mut OpCounters,
    log: &mut Vec<MatchWrite>,
) -> bool {
    used[x] = true;
    counters.augment_visits += 1;
    for a in g.var_neighbors(x) {
        let next = match m.mate_of_value(a) {
            None => dist[x] + 1 == free_layer,
            Some(y) => {
                !used[y] && dist[y] == dist[x] + 1 && augment_from(g, m, y, dist, free_layer, used, counters, log)
            }
        };
        if next {
            m.assign(x, a, log);
            return true;
        }
    }
    false
}

/// Computes a maximum matching of `g` from scratch.
pub fn compute_maximum_matching(g: &ValueGraph, counters: &mut OpCounters) -> Matching {
    let mut m = Matching::empty_for(g);
    augment_to_maximum(g, &mut m, counters, &mut Vec::new());
    m
}

/// No matching of the graph covers every variable vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no matching covers all variables")]
pub struct NoCovering;

/// Extends `m` in place by augmenting from its uncovered variables only.
/// Returns whether the result covers every variable vertex.
pub(crate) fn extend_to_cover(
    g: &ValueGraph,
    m: &mut Matching,
    counters: &mut OpCounters,
    log: &mut Vec<MatchWrite>,
) -> bool {
    m.fit(g);
    if m.covers_all() {
        return true;
    }
    augment_to_maximum(g, m, counters, log);
    m.covers_all()
}

/// Extends a valid matching to one covering every variable vertex, if such
/// a matching exists. Covered variables stay covered.
pub fn matching_covering_x(g: &ValueGraph, m: &Matching, counters: &mut OpCounters) -> Result<Matching, NoCovering> {
    let mut out = m.clone();
    if extend_to_cover(g, &mut out, counters, &mut Vec::new()) {
        Ok(out)
    } else {
        Err(NoCovering)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FiniteDomain;
    use crate::matching::add_edges;

    fn graph(doms: &[&[u32]]) -> ValueGraph {
        let doms: Vec<FiniteDomain> = doms.iter().map(|d| d.iter().map(|&v| ValueId(v)).collect()).collect();
        ValueGraph::build(doms.iter().enumerate().map(|(i, d)| (VariableId(i as u32), d)))
    }

    #[test]
    fn three_vars_matching() {
        let g = graph(&[&[0, 1], &[0, 1], &[0, 1, 2]]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert_eq!(m.len(), 3);
        assert!(m.is_valid_for(&g));
        let pairs: Vec<(u32, u32)> = m.pairs(&g).iter().map(|e| (e.var.0, e.value.0)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn pigeonhole() {
        let g = graph(&[&[0], &[0]]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn covering_unchanged_when_already_covered() {
        let g = graph(&[&[0, 1], &[1]]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        let mut c = OpCounters::default();
        let out = matching_covering_x(&g, &m, &mut c).unwrap();
        assert_eq!(out, m);
        assert_eq!(c.augment_visits, 0);
    }

    #[test]
    fn covering_no_covering() {
        let g = graph(&[&[0], &[0]]);
        let mut m = Matching::empty_for(&g);
        m.assign(0, 0, &mut Vec::new());
        assert_eq!(matching_covering_x(&g, &m, &mut OpCounters::default()), Err(NoCovering));
    }

    #[test]
    fn covering_five_vars_extension() {
        // Filtered three-variable graph plus X4 in {c,d}, X5 in {d,e}.
        let mut g = graph(&[&[0, 1], &[0, 1], &[2]]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        let e = |x: u32, v: u32| Edge::new(VariableId(x), ValueId(v));
        add_edges(&mut g, &[e(3, 2), e(3, 3), e(4, 3), e(4, 4)]);
        let out = matching_covering_x(&g, &m, &mut OpCounters::default()).unwrap();
        assert!(out.is_valid_for(&g));
        let pairs: Vec<(u32, u32)> = out.pairs(&g).iter().map(|e| (e.var.0, e.value.0)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn undo_restores_matching() {
        let g = graph(&[&[0, 1], &[0], &[1, 2]]);
        let mut m = Matching::empty_for(&g);
        let mut log = Vec::new();
        m.assign(0, 0, &mut log);
        let before = m.clone();
        let mut wlog = Vec::new();
        augment_to_maximum(&g, &mut m, &mut OpCounters::default(), &mut wlog);
        assert_eq!(m.len(), 3);
        for w in wlog.into_iter().rev() {
            m.undo(w);
        }
        assert_eq!(m, before);
    }
}

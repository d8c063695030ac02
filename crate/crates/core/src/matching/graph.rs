use std::collections::{BTreeSet, HashMap};

use crate::domain::{FiniteDomain, ValueId, VariableId};

/// An edge of a value graph: `value` is in the domain of `var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub var: VariableId,
    pub value: ValueId,
}

impl Edge {
    pub fn new(var: VariableId, value: ValueId) -> Self {
        Self { var, value }
    }
}

/// Ordered list of edges without duplicates.
pub type EdgeList = Vec<Edge>;

/// Bipartite graph linking constraint variables to their candidate values.
///
/// Vertices are addressed by dense slots in insertion order. Slots are stable:
/// a value vertex whose last edge is removed stays in place with degree 0.
/// Only the most recently added vertices can be popped, which is what LIFO
/// retraction needs.
#[derive(Debug, Clone, Default)]
pub struct ValueGraph {
    vars: Vec<VariableId>,
    values: Vec<ValueId>,
    var_slot: HashMap<VariableId, usize>,
    value_slot: HashMap<ValueId, usize>,
    var_adj: Vec<BTreeSet<usize>>,
    val_adj: Vec<BTreeSet<usize>>,
    edge_count: usize,
}

impl ValueGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// One variable vertex per entry, value vertices for the union of the
    /// domains in first-seen order, and an edge `(x, a)` for every `a` in `D(x)`.
    pub fn build<'a, I>(vars: I) -> Self
    where
        I: IntoIterator<Item = (VariableId, &'a FiniteDomain)>,
    {
        let mut g = Self::new();
        for (var, dom) in vars {
            let x = g.add_var_vertex(var);
            for value in dom.iter() {
                let a = g.ensure_value_vertex(value);
                g.insert_edge(x, a);
            }
        }
        g
    }

    /// Number of variable vertices (`p`).
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Number of value vertices (`d`), including inert ones.
    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    /// Number of value vertices with at least one edge.
    pub fn num_live_values(&self) -> usize {
        self.val_adj.iter().filter(|a| !a.is_empty()).count()
    }

    /// Number of edges (`m`).
    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn var_id(&self, slot: usize) -> VariableId {
        self.vars[slot]
    }

    pub fn value_id(&self, slot: usize) -> ValueId {
        self.values[slot]
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn values(&self) -> &[ValueId] {
        &self.values
    }

    pub fn var_slot(&self, var: VariableId) -> Option<usize> {
        self.var_slot.get(&var).copied()
    }

    pub fn value_slot(&self, value: ValueId) -> Option<usize> {
        self.value_slot.get(&value).copied()
    }

    /// Value slots adjacent to a variable slot, ascending.
    pub fn var_neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_adj[x].iter().copied()
    }

    /// Variable slots adjacent to a value slot, ascending.
    pub fn value_neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.val_adj[a].iter().copied()
    }

    pub fn var_degree(&self, x: usize) -> usize {
        self.var_adj[x].len()
    }

    pub fn has_edge_slots(&self, x: usize, a: usize) -> bool {
        self.var_adj.get(x).is_some_and(|s| s.contains(&a))
    }

    pub fn contains(&self, edge: Edge) -> bool {
        match (self.var_slot(edge.var), self.value_slot(edge.value)) {
            (Some(x), Some(a)) => self.has_edge_slots(x, a),
            _ => false,
        }
    }

    /// All edges, ordered by variable slot then value slot.
    pub fn edges(&self) -> EdgeList {
        self.var_adj
            .iter()
            .enumerate()
            .flat_map(|(x, adj)| adj.iter().map(move |&a| Edge::new(self.vars[x], self.values[a])))
            .collect()
    }

    pub fn add_var_vertex(&mut self, var: VariableId) -> usize {
        assert!(!self.var_slot.contains_key(&var), "variable {var} already in graph");
        let slot = self.vars.len();
        self.vars.push(var);
        self.var_slot.insert(var, slot);
        self.var_adj.push(BTreeSet::new());
        slot
    }

    pub fn add_value_vertex(&mut self, value: ValueId) -> usize {
        assert!(!self.value_slot.contains_key(&value), "value {value} already in graph");
        let slot = self.values.len();
        self.values.push(value);
        self.value_slot.insert(value, slot);
        self.val_adj.push(BTreeSet::new());
        slot
    }

    fn ensure_value_vertex(&mut self, value: ValueId) -> usize {
        match self.value_slot(value) {
            Some(a) => a,
            None => self.add_value_vertex(value),
        }
    }

    fn ensure_var_vertex(&mut self, var: VariableId) -> usize {
        match self.var_slot(var) {
            Some(x) => x,
            None => self.add_var_vertex(var),
        }
    }

    /// Removes the most recently added variable vertex, which must be isolated.
    pub fn pop_var_vertex(&mut self) -> Option<VariableId> {
        let var = self.vars.pop()?;
        let adj = self.var_adj.pop().expect("adjacency in sync");
        assert!(adj.is_empty(), "popped variable vertex {var} still has edges");
        self.var_slot.remove(&var);
        Some(var)
    }

    /// Removes the most recently added value vertex, which must be isolated.
    pub fn pop_value_vertex(&mut self) -> Option<ValueId> {
        let value = self.values.pop()?;
        let adj = self.val_adj.pop().expect("adjacency in sync");
        assert!(adj.is_empty(), "popped value vertex {value} still has edges");
        self.value_slot.remove(&value);
        Some(value)
    }

    /// Returns true if the edge was new.
    pub fn insert_edge(&mut self, x: usize, a: usize) -> bool {
        if !self.var_adj[x].insert(a) {
            return false;
        }
        self.val_adj[a].insert(x);
        self.edge_count += 1;
        true
    }

    /// Returns true if the edge was present.
    pub fn delete_edge(&mut self, x: usize, a: usize) -> bool {
        if !self.var_adj[x].remove(&a) {
            return false;
        }
        self.val_adj[a].remove(&x);
        self.edge_count -= 1;
        true
    }
}

/// Adds edges, appending vertices for unseen endpoints in order of first
/// appearance. Duplicate edges are ignored. Returns the number of new edges.
pub fn add_edges(g: &mut ValueGraph, edges: &[Edge]) -> usize {
    let mut added = 0;
    for e in edges {
        let x = g.ensure_var_vertex(e.var);
        let a = g.ensure_value_vertex(e.value);
        if g.insert_edge(x, a) {
            added += 1;
        }
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(vals: &[u32]) -> FiniteDomain {
        vals.iter().map(|&v| ValueId(v)).collect()
    }

    #[test]
    fn build_three_vars() {
        let (a, b, c) = (0, 1, 2);
        let doms = [dom(&[a, b]), dom(&[a, b]), dom(&[a, b, c])];
        let g = ValueGraph::build(doms.iter().enumerate().map(|(i, d)| (VariableId(i as u32), d)));
        assert_eq!(g.num_vars(), 3);
        assert_eq!(g.num_values(), 3);
        assert_eq!(g.num_edges(), 7);
    }

    #[test]
    fn build_empty_and_single() {
        let g = ValueGraph::build(std::iter::empty());
        assert_eq!((g.num_vars(), g.num_values(), g.num_edges()), (0, 0, 0));
        let d = dom(&[0]);
        let g = ValueGraph::build([(VariableId(0), &d)]);
        assert_eq!((g.num_vars(), g.num_values(), g.num_edges()), (1, 1, 1));
    }

    #[test]
    fn values_in_first_seen_order() {
        let d0 = dom(&[5, 7]);
        let d1 = dom(&[1, 5]);
        let g = ValueGraph::build([(VariableId(0), &d0), (VariableId(1), &d1)]);
        assert_eq!(g.values(), &[ValueId(5), ValueId(7), ValueId(1)]);
    }

    #[test]
    fn add_edges_dedup_and_new_vertices() {
        let mut g = ValueGraph::new();
        assert_eq!(add_edges(&mut g, &[Edge::new(VariableId(0), ValueId(3))]), 1);
        assert_eq!((g.num_vars(), g.num_values(), g.num_edges()), (1, 1, 1));
        assert_eq!(add_edges(&mut g, &[Edge::new(VariableId(0), ValueId(3))]), 0);
        assert_eq!(g.num_edges(), 1);
    }
}

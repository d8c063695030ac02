//! The dynamic `alldifferent` constraint.
//!
//! [`AllDiffState`] keeps the value graph and a matching covering every
//! constraint variable. It supports initialisation, propagation of value
//! deletions, adoption of new variables into the existing graph, and LIFO
//! retraction of the last adoption. All internal changes after initialisation
//! go through a journal, so any prefix of work can be rewound exactly.

use std::any::Any;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use crate::counters::OpCounters;
use crate::domain::{ValueId, VariableId};
use crate::dynamization::DynError;
use crate::matching::{
    compute_maximum_matching, extend_to_cover, graph_checksum, unsupported_edges, Edge, EdgeList, MatchWrite, Matching,
    ValueGraph,
};
use crate::store::{
    CheckpointToken, ConstraintHandle, DomainStore, GraphStats, PropagationContext, PropagationEvent, Propagator,
    Store, StoreError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllDiffError {
    #[error("variable {0} already belongs to the constraint")]
    DuplicateVariable(VariableId),
    #[error("adoption record is not the most recent one")]
    NonLifoRetract,
}

/// No matching covers the constraint variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("alldifferent is unsatisfiable")]
pub struct Unsatisfiable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum JournalEntry {
    EdgeRemoved { x: usize, a: usize },
    EdgeAdded { x: usize, a: usize },
    VarVertex,
    ValueVertex,
    Match(MatchWrite),
    Adoption,
}

impl JournalEntry {
    fn cells(&self) -> u64 {
        match self {
            JournalEntry::EdgeRemoved { .. } | JournalEntry::EdgeAdded { .. } | JournalEntry::Match(_) => 2,
            JournalEntry::VarVertex | JournalEntry::ValueVertex | JournalEntry::Adoption => 1,
        }
    }
}

/// Everything one adoption changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdoptionRecord {
    pub id: u64,
    journal_mark: usize,
    pub added_vars: Vec<VariableId>,
    pub added_edges: EdgeList,
    /// `(var, before, after)` for each variable whose partner changed.
    pub matching_delta: Vec<(VariableId, Option<ValueId>, Option<ValueId>)>,
    pub filtered_edges: EdgeList,
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct AllDiffState {
    graph: ValueGraph,
    matching: Matching,
    generation: u64,
    journal: Vec<JournalEntry>,
    adoptions: Vec<(u64, usize)>,
    next_adoption: u64,
}

impl AllDiffState {
    /// Builds the value graph, computes a maximum matching, and filters.
    /// Fails without touching domains if no matching covers `vars`.
    pub fn init<S: DomainStore>(ds: &mut S, vars: &[VariableId]) -> Result<Self, Unsatisfiable> {
        let mut graph = ValueGraph::build(vars.iter().map(|&v| (v, ds.domain(v))));
        let matching = compute_maximum_matching(&graph, ds.counters_mut());
        if matching.len() < graph.num_vars() {
            return Err(Unsatisfiable);
        }
        let doomed = unsupported_edges(&graph, &matching, ds.counters_mut()).expect("matching covers all variables");
        for (x, a) in doomed {
            graph.delete_edge(x, a);
            if ds.remove_value(graph.var_id(x), graph.value_id(a)).is_err() {
                return Err(Unsatisfiable);
            }
        }
        Ok(Self {
            graph,
            matching,
            generation: 0,
            journal: Vec::new(),
            adoptions: Vec::new(),
            next_adoption: 0,
        })
    }

    pub fn graph(&self) -> &ValueGraph {
        &self.graph
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    /// Constraint variables in adoption order.
    pub fn var_order(&self) -> &[VariableId] {
        self.graph.vars()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        graph_checksum(&self.graph, &self.matching).hash(&mut h);
        self.graph.vars().hash(&mut h);
        h.finish()
    }

    pub fn journal_len(&self) -> usize {
        self.journal.len()
    }

    fn log(&mut self, entry: JournalEntry, counters: &mut OpCounters) {
        counters.trailed_cells += entry.cells();
        self.journal.push(entry);
    }

    fn log_matches(&mut self, writes: Vec<MatchWrite>, counters: &mut OpCounters) {
        for w in writes {
            self.log(JournalEntry::Match(w), counters);
        }
    }

    /// Removes unsupported edges from the graph and their values from the
    /// domains. Returns false if a domain removal fails.
    fn filter<S: DomainStore>(&mut self, ds: &mut S, removed: &mut EdgeList) -> bool {
        let doomed =
            unsupported_edges(&self.graph, &self.matching, ds.counters_mut()).expect("matching covers all variables");
        for (x, a) in doomed {
            self.graph.delete_edge(x, a);
            self.log(JournalEntry::EdgeRemoved { x, a }, ds.counters_mut());
            let e = Edge::new(self.graph.var_id(x), self.graph.value_id(a));
            removed.push(e);
            if ds.remove_value(e.var, e.value).is_err() {
                return false;
            }
        }
        true
    }

    /// Deletes edges whose values left the domains, repairs the matching if a
    /// matched edge was lost, and re-filters. Edges already absent from the
    /// graph are ignored.
    pub fn propagate<S: DomainStore>(&mut self, ds: &mut S, removed: &[Edge]) -> bool {
        let present: Vec<(usize, usize)> = removed
            .iter()
            .filter_map(|e| {
                let x = self.graph.var_slot(e.var)?;
                let a = self.graph.value_slot(e.value)?;
                self.graph.has_edge_slots(x, a).then_some((x, a))
            })
            .collect();
        if present.is_empty() {
            return true;
        }
        self.generation += 1;
        let mut compute_matching = false;
        for (x, a) in present {
            if self.matching.is_matched_edge(x, a) {
                let mut writes = Vec::new();
                self.matching.unassign_var(x, &mut writes);
                self.log_matches(writes, ds.counters_mut());
                compute_matching = true;
            }
            if self.graph.delete_edge(x, a) {
                self.log(JournalEntry::EdgeRemoved { x, a }, ds.counters_mut());
            }
        }
        if compute_matching {
            let mut writes = Vec::new();
            let covered = extend_to_cover(&self.graph, &mut self.matching, ds.counters_mut(), &mut writes);
            self.log_matches(writes, ds.counters_mut());
            if !covered {
                return false;
            }
        }
        // Unmatched deletions can also break alternating structures, so the
        // filter runs whenever the graph changed.
        self.filter(ds, &mut Vec::new())
    }

    /// Re-runs propagation for graph edges whose values are no longer in the
    /// domains.
    pub fn resync<S: DomainStore>(&mut self, ds: &mut S) -> bool {
        let stale: Vec<Edge> = self
            .graph
            .edges()
            .into_iter()
            .filter(|e| !ds.domain(e.var).contains(e.value))
            .collect();
        self.propagate(ds, &stale)
    }

    /// Adopts `new_vars` with their current domains: extends the graph with
    /// edges touching only the new variables, extends the matching from the
    /// uncovered new variables, and re-filters.
    pub fn add_variables<S: DomainStore>(
        &mut self,
        ds: &mut S,
        new_vars: &[VariableId],
    ) -> Result<(bool, AdoptionRecord), AllDiffError> {
        for (i, &v) in new_vars.iter().enumerate() {
            if self.graph.var_slot(v).is_some() || new_vars[..i].contains(&v) {
                return Err(AllDiffError::DuplicateVariable(v));
            }
        }
        self.generation += 1;
        let id = self.next_adoption;
        self.next_adoption += 1;
        let journal_mark = self.journal.len();
        self.log(JournalEntry::Adoption, ds.counters_mut());
        self.adoptions.push((id, journal_mark));

        let mut added_edges = Vec::new();
        for &var in new_vars {
            let x = self.graph.add_var_vertex(var);
            self.log(JournalEntry::VarVertex, ds.counters_mut());
            let values: Vec<ValueId> = ds.domain(var).iter().collect();
            for value in values {
                let a = match self.graph.value_slot(value) {
                    Some(a) => a,
                    None => {
                        let a = self.graph.add_value_vertex(value);
                        self.log(JournalEntry::ValueVertex, ds.counters_mut());
                        a
                    }
                };
                self.graph.insert_edge(x, a);
                self.log(JournalEntry::EdgeAdded { x, a }, ds.counters_mut());
                added_edges.push(Edge::new(var, value));
            }
        }
        self.matching.fit(&self.graph);

        let mut writes = Vec::new();
        let covered = extend_to_cover(&self.graph, &mut self.matching, ds.counters_mut(), &mut writes);
        let matching_delta = self.summarise(&writes);
        self.log_matches(writes, ds.counters_mut());

        let mut filtered_edges = Vec::new();
        let consistent = covered && self.filter(ds, &mut filtered_edges);
        Ok((
            consistent,
            AdoptionRecord {
                id,
                journal_mark,
                added_vars: new_vars.to_vec(),
                added_edges,
                matching_delta,
                filtered_edges,
                consistent,
            },
        ))
    }

    fn summarise(&self, writes: &[MatchWrite]) -> Vec<(VariableId, Option<ValueId>, Option<ValueId>)> {
        let mut first = BTreeMap::new();
        for w in writes {
            if let MatchWrite::Var { slot, prev } = *w {
                first.entry(slot).or_insert(prev);
            }
        }
        first
            .into_iter()
            .filter_map(|(x, before)| {
                let after = self.matching.mate_of_var(x);
                (before != after).then(|| {
                    (
                        self.graph.var_id(x),
                        before.map(|a| self.graph.value_id(a)),
                        after.map(|a| self.graph.value_id(a)),
                    )
                })
            })
            .collect()
    }

    /// Undoes the most recent adoption and everything journaled after it.
    pub fn retract_last(&mut self, record: &AdoptionRecord) -> Result<(), AllDiffError> {
        match self.adoptions.last() {
            Some(&(id, mark)) if id == record.id && mark == record.journal_mark => {
                self.undo_to(mark);
                Ok(())
            }
            _ => Err(AllDiffError::NonLifoRetract),
        }
    }

    /// Rewinds the journal to `mark`.
    pub fn undo_to(&mut self, mark: usize) {
        if self.journal.len() > mark {
            self.generation += 1;
        }
        while self.journal.len() > mark {
            match self.journal.pop().expect("journal above mark") {
                JournalEntry::EdgeRemoved { x, a } => {
                    self.graph.insert_edge(x, a);
                }
                JournalEntry::EdgeAdded { x, a } => {
                    self.graph.delete_edge(x, a);
                }
                JournalEntry::VarVertex => {
                    self.graph.pop_var_vertex();
                    self.matching.fit(&self.graph);
                }
                JournalEntry::ValueVertex => {
                    self.graph.pop_value_vertex();
                    self.matching.fit(&self.graph);
                }
                JournalEntry::Match(w) => self.matching.undo(w),
                JournalEntry::Adoption => {
                    self.adoptions.pop();
                }
            }
        }
    }

    fn state_cells(&self) -> usize {
        2 * self.graph.num_edges() + self.graph.num_vars() + self.graph.num_values() + 2 * self.matching.len()
    }
}

/// `alldifferent` as a store propagator.
#[derive(Debug, Clone)]
pub struct AllDifferent {
    vars: Vec<VariableId>,
    state: Option<AllDiffState>,
}

#[derive(Debug, Clone)]
struct Frozen {
    graph: ValueGraph,
    matching: Matching,
}

impl AllDifferent {
    pub fn new(vars: Vec<VariableId>) -> Self {
        Self { vars, state: None }
    }

    /// Internal state, if initialisation succeeded.
    pub fn state(&self) -> Option<&AllDiffState> {
        self.state.as_ref()
    }

    pub fn from_store(store: &Store, h: ConstraintHandle) -> Option<&AllDifferent> {
        store.propagator(h)?.as_any().downcast_ref::<AllDifferent>()
    }
}

impl Propagator for AllDifferent {
    fn name(&self) -> &'static str {
        "alldifferent"
    }

    fn watched(&self) -> Vec<VariableId> {
        self.vars.clone()
    }

    fn initialise(&mut self, ctx: &mut PropagationContext<'_>) -> bool {
        match AllDiffState::init(ctx, &self.vars) {
            Ok(state) => {
                self.state = Some(state);
                true
            }
            Err(Unsatisfiable) => false,
        }
    }

    fn propagate(&mut self, ctx: &mut PropagationContext<'_>, events: &[PropagationEvent]) -> bool {
        let Some(state) = self.state.as_mut() else {
            return false;
        };
        let removed: EdgeList = events
            .iter()
            .flat_map(|ev| ev.removed.iter().map(move |&v| Edge::new(ev.var, v)))
            .collect();
        state.propagate(ctx, &removed)
    }

    fn adopt(&mut self, ctx: &mut PropagationContext<'_>, vars: &[VariableId]) -> Result<bool, StoreError> {
        let state = self.state.as_mut().ok_or(StoreError::BranchFailed)?;
        match state.add_variables(ctx, vars) {
            Ok((ok, _)) => Ok(ok),
            Err(AllDiffError::DuplicateVariable(v)) => Err(StoreError::DuplicateVariable(v)),
            Err(AllDiffError::NonLifoRetract) => unreachable!("adoption never retracts"),
        }
    }

    fn resync(&mut self, ctx: &mut PropagationContext<'_>) -> bool {
        match self.state.as_mut() {
            Some(state) => state.resync(ctx),
            None => false,
        }
    }

    fn journal_mark(&self) -> usize {
        self.state.as_ref().map_or(0, |s| s.journal.len())
    }

    fn undo_to(&mut self, mark: usize) {
        if let Some(state) = self.state.as_mut() {
            state.undo_to(mark);
        }
    }

    fn freeze(&self) -> Box<dyn Any> {
        Box::new(self.state.as_ref().map(|s| Frozen {
            graph: s.graph.clone(),
            matching: s.matching.clone(),
        }))
    }

    fn thaw(&mut self, frozen: Box<dyn Any>) {
        let frozen = *frozen.downcast::<Option<Frozen>>().expect("alldifferent frozen state");
        if let (Some(state), Some(f)) = (self.state.as_mut(), frozen) {
            state.graph = f.graph;
            state.matching = f.matching;
        }
    }

    fn state_cells(&self) -> usize {
        self.state.as_ref().map_or(0, AllDiffState::state_cells)
    }

    fn digest(&self) -> u64 {
        self.state.as_ref().map_or(0, AllDiffState::checksum)
    }

    fn graph_stats(&self) -> Option<GraphStats> {
        self.state.as_ref().map(|s| GraphStats {
            p: s.graph.num_vars(),
            d: s.graph.num_live_values(),
            m: s.graph.num_edges(),
        })
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Drives an [`AllDifferent`] constraint whose variable set grows by
/// adoption and shrinks by checkpoint pops, in LIFO order.
#[derive(Debug, Default)]
pub struct DynamicAllDifferent {
    handle: Option<ConstraintHandle>,
    history: Vec<(CheckpointToken, usize)>,
    vars: Vec<VariableId>,
}

impl DynamicAllDifferent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handle(&self) -> Option<ConstraintHandle> {
        self.handle
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn depth(&self) -> usize {
        self.history.len()
    }

    pub fn add_variable(&mut self, store: &mut Store, x: VariableId) -> Result<bool, DynError> {
        self.add_variables(store, &[x])
    }

    /// Adds a batch; the batch is removed as a unit by [`Self::remove_last`].
    pub fn add_variables(&mut self, store: &mut Store, xs: &[VariableId]) -> Result<bool, DynError> {
        for (i, &x) in xs.iter().enumerate() {
            if self.vars.contains(&x) || xs[..i].contains(&x) {
                return Err(DynError::DuplicateVariable(x));
            }
        }
        let token = store.push_checkpoint()?;
        let ok = match self.handle {
            None => match store.post_constraint(Box::new(AllDifferent::new(xs.to_vec()))) {
                Ok(h) => {
                    self.handle = Some(h);
                    true
                }
                Err(StoreError::InitFailure(h)) => {
                    self.handle = Some(h);
                    false
                }
                Err(e) => {
                    store.pop_checkpoint(token)?;
                    return Err(e.into());
                }
            },
            Some(h) => store.adopt_variables(h, xs)?,
        };
        self.history.push((token, self.vars.len()));
        self.vars.extend_from_slice(xs);
        Ok(ok && store.propagate_fixpoint())
    }

    pub fn remove_last(&mut self, store: &mut Store) -> Result<(), DynError> {
        let (token, len) = self.history.pop().ok_or(DynError::EmptyHistory)?;
        store.pop_checkpoint(token)?;
        self.vars.truncate(len);
        if self.history.is_empty() {
            self.handle = None;
        }
        Ok(())
    }
}

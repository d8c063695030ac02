//! Variable/domain store with a reversible trail and an event-driven
//! propagation loop.
//!
//! Every mutation appends a [`TrailFrame`]; [`Store::pop_checkpoint`] inverts
//! frames in reverse order back to the matching marker. Constraints are
//! registered through [`Store::post_constraint`] and receive value-removal
//! events while active.

use std::any::Any;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, VecDeque};
use std::hash::{Hash, Hasher};

use crate::counters::OpCounters;
use crate::domain::{FiniteDomain, ValueId, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("unknown variable {0}")]
    UnknownVariable(VariableId),
    #[error("unknown constraint {0:?}")]
    UnknownConstraint(ConstraintHandle),
    #[error("domain of {0} would become empty")]
    DomainWipeout(VariableId),
    #[error("branch has failed")]
    BranchFailed,
    #[error("checkpoint popped out of LIFO order")]
    NonLifoPop,
    #[error("constraint {0:?} failed during initialisation")]
    InitFailure(ConstraintHandle),
    #[error("constraint {0:?} is already inactive")]
    AlreadyInactive(ConstraintHandle),
    #[error("constraint {0:?} was not deactivated")]
    NotDeactivated(ConstraintHandle),
    #[error("constraint {0:?} is inactive")]
    Inactive(ConstraintHandle),
    #[error("variable {0} already belongs to the constraint")]
    DuplicateVariable(VariableId),
    #[error("constraint does not support adding variables")]
    AdoptionUnsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintHandle(pub usize);

/// Identifies the trail depth of an open checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointToken {
    depth: usize,
}

impl CheckpointToken {
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Value removals from one variable, delivered to one constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationEvent {
    pub var: VariableId,
    pub removed: Vec<ValueId>,
}

/// Reversible log entry. Each variant carries enough to apply its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrailFrame {
    Marker,
    VariableCreated {
        var: VariableId,
    },
    DomainDelta {
        var: VariableId,
        value: ValueId,
    },
    DomainSnapshot {
        domains: Vec<(VariableId, FiniteDomain)>,
    },
    BranchFailed,
    ConstraintPosted {
        constraint: ConstraintHandle,
    },
    ConstraintDeactivated {
        constraint: ConstraintHandle,
    },
    ConstraintReactivated {
        constraint: ConstraintHandle,
    },
    WatchExtended {
        constraint: ConstraintHandle,
        added: usize,
    },
    /// Propagator-internal changes (graph and matching deltas); undone by
    /// rewinding the propagator's journal to `mark`.
    PropagatorDelta {
        constraint: ConstraintHandle,
        mark: usize,
    },
}

/// Shape of a propagator's value graph, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphStats {
    pub p: usize,
    pub d: usize,
    pub m: usize,
}

/// Read and shrink access to variable domains.
pub trait DomainStore {
    fn domain(&self, var: VariableId) -> &FiniteDomain;
    /// Removes `value` from `var`. Returns whether the domain changed.
    fn remove_value(&mut self, var: VariableId, value: ValueId) -> Result<bool, StoreError>;
    fn counters_mut(&mut self) -> &mut OpCounters;
}

/// A filtering algorithm registered with a [`Store`].
///
/// Internal state changes made during a call must be recorded in the
/// propagator's own journal so that [`Propagator::undo_to`] can rewind them;
/// the store trails the journal position around every call.
pub trait Propagator: Any {
    fn name(&self) -> &'static str;

    /// Variables the propagator watches at posting time.
    fn watched(&self) -> Vec<VariableId>;

    /// Called once at posting. Returning false fails the branch.
    fn initialise(&mut self, ctx: &mut PropagationContext<'_>) -> bool;

    /// Handles value removals on watched variables. Returning false fails the branch.
    fn propagate(&mut self, ctx: &mut PropagationContext<'_>, events: &[PropagationEvent]) -> bool;

    /// Extends the propagator with new variables.
    fn adopt(&mut self, _ctx: &mut PropagationContext<'_>, _vars: &[VariableId]) -> Result<bool, StoreError> {
        Err(StoreError::AdoptionUnsupported)
    }

    /// Catches up with domain changes that happened while deactivated.
    fn resync(&mut self, _ctx: &mut PropagationContext<'_>) -> bool {
        true
    }

    fn journal_mark(&self) -> usize {
        0
    }

    fn undo_to(&mut self, _mark: usize) {}

    /// Copy of the internal data structures, kept on the trail while deactivated.
    fn freeze(&self) -> Box<dyn Any>;

    fn thaw(&mut self, frozen: Box<dyn Any>);

    /// Scalar slots occupied by the internal data structures.
    fn state_cells(&self) -> usize;

    /// Digest of the internal data structures.
    fn digest(&self) -> u64;

    fn graph_stats(&self) -> Option<GraphStats> {
        None
    }

    fn as_any(&self) -> &dyn Any;
}

/// Public view of a registered constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintInfo {
    pub id: ConstraintHandle,
    pub active: bool,
    pub watched_vars: Vec<VariableId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSnapshot {
    pub active: bool,
    pub watched: Vec<VariableId>,
    pub digest: u64,
}

/// Full comparable state of a store (the trail itself excluded).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoreSnapshot {
    pub domains: Vec<FiniteDomain>,
    pub constraints: Vec<ConstraintSnapshot>,
    pub failed: bool,
}

struct Slot {
    propagator: Option<Box<dyn Propagator>>,
    active: bool,
    watched: Vec<VariableId>,
    frozen: Option<Box<dyn Any>>,
}

impl Slot {
    fn prop(&self) -> &dyn Propagator {
        self.propagator.as_deref().expect("propagator is not re-entrant")
    }

    fn prop_mut(&mut self) -> &mut dyn Propagator {
        self.propagator.as_deref_mut().expect("propagator is not re-entrant")
    }
}

/// FIFO of constraints with pending events; removals for the same
/// (constraint, variable) pair are merged into one event.
#[derive(Debug, Clone, Default)]
struct EventQueue {
    order: VecDeque<usize>,
    pending: BTreeMap<usize, Vec<PropagationEvent>>,
}

impl EventQueue {
    fn push(&mut self, constraint: usize, var: VariableId, value: ValueId) {
        let events = self.pending.entry(constraint).or_insert_with(|| {
            self.order.push_back(constraint);
            Vec::new()
        });
        match events.iter_mut().find(|e| e.var == var) {
            Some(e) => e.removed.push(value),
            None => events.push(PropagationEvent {
                var,
                removed: vec![value],
            }),
        }
    }

    fn pop(&mut self) -> Option<(usize, Vec<PropagationEvent>)> {
        let c = self.order.pop_front()?;
        let events = self.pending.remove(&c).unwrap_or_default();
        Some((c, events))
    }

    fn discard(&mut self, constraint: usize) {
        if self.pending.remove(&constraint).is_some() {
            self.order.retain(|&c| c != constraint);
        }
    }

    fn clear(&mut self) {
        self.order.clear();
        self.pending.clear();
    }

    fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Default)]
pub struct Store {
    domains: Vec<FiniteDomain>,
    watchers: Vec<Vec<usize>>,
    constraints: Vec<Slot>,
    trail: Vec<TrailFrame>,
    open_checkpoints: Vec<(usize, EventQueue)>,
    queue: EventQueue,
    failed: bool,
    counters: OpCounters,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("domains", &self.domains)
            .field("constraints", &self.constraints.len())
            .field("trail_depth", &self.trail.len())
            .field("failed", &self.failed)
            .finish()
    }
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_variables(&self) -> usize {
        self.domains.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn trail_depth(&self) -> usize {
        self.trail.len()
    }

    pub fn trail(&self) -> &[TrailFrame] {
        &self.trail
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub fn queue_is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn try_domain(&self, var: VariableId) -> Option<&FiniteDomain> {
        self.domains.get(var.index())
    }

    pub fn domain(&self, var: VariableId) -> &FiniteDomain {
        &self.domains[var.index()]
    }

    pub fn constraint(&self, h: ConstraintHandle) -> Option<ConstraintInfo> {
        self.constraints.get(h.0).map(|s| ConstraintInfo {
            id: h,
            active: s.active,
            watched_vars: s.watched.clone(),
        })
    }

    pub fn propagator(&self, h: ConstraintHandle) -> Option<&dyn Propagator> {
        self.constraints.get(h.0).and_then(|s| s.propagator.as_deref())
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        StoreSnapshot {
            domains: self.domains.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|s| ConstraintSnapshot {
                    active: s.active,
                    watched: s.watched.clone(),
                    digest: s.prop().digest(),
                })
                .collect(),
            failed: self.failed,
        }
    }

    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.snapshot().hash(&mut h);
        h.finish()
    }

    fn push_frame(&mut self, frame: TrailFrame, cells: usize) {
        self.counters.trailed_cells += cells as u64;
        self.trail.push(frame);
    }

    fn check_var(&self, var: VariableId) -> Result<(), StoreError> {
        if var.index() < self.domains.len() {
            Ok(())
        } else {
            Err(StoreError::UnknownVariable(var))
        }
    }

    fn check_constraint(&self, h: ConstraintHandle) -> Result<(), StoreError> {
        if h.0 < self.constraints.len() {
            Ok(())
        } else {
            Err(StoreError::UnknownConstraint(h))
        }
    }

    fn fail(&mut self) {
        if !self.failed {
            self.failed = true;
            self.push_frame(TrailFrame::BranchFailed, 1);
        }
        self.queue.clear();
    }

    pub fn add_variable(&mut self, domain: FiniteDomain) -> Result<VariableId, StoreError> {
        if domain.is_empty() {
            return Err(StoreError::EmptyDomain);
        }
        let var = VariableId(self.domains.len() as u32);
        self.domains.push(domain);
        self.watchers.push(Vec::new());
        self.push_frame(TrailFrame::VariableCreated { var }, 1);
        Ok(var)
    }

    pub fn remove_value(&mut self, var: VariableId, value: ValueId) -> Result<bool, StoreError> {
        self.remove_value_from(var, value, None)
    }

    fn remove_value_from(
        &mut self,
        var: VariableId,
        value: ValueId,
        source: Option<usize>,
    ) -> Result<bool, StoreError> {
        self.check_var(var)?;
        if self.failed {
            return Err(StoreError::BranchFailed);
        }
        let dom = &mut self.domains[var.index()];
        if !dom.contains(value) {
            return Ok(false);
        }
        if dom.len() == 1 {
            self.fail();
            return Err(StoreError::DomainWipeout(var));
        }
        dom.remove(value);
        self.push_frame(TrailFrame::DomainDelta { var, value }, 2);
        for &c in &self.watchers[var.index()] {
            if self.constraints[c].active && Some(c) != source {
                self.queue.push(c, var, value);
            }
        }
        Ok(true)
    }

    pub fn push_checkpoint(&mut self) -> Result<CheckpointToken, StoreError> {
        if self.failed {
            return Err(StoreError::BranchFailed);
        }
        let depth = self.trail.len();
        self.open_checkpoints.push((depth, self.queue.clone()));
        self.push_frame(TrailFrame::Marker, 1);
        Ok(CheckpointToken { depth })
    }

    pub fn pop_checkpoint(&mut self, token: CheckpointToken) -> Result<(), StoreError> {
        match self.open_checkpoints.last() {
            Some(&(depth, _)) if depth == token.depth => {}
            _ => return Err(StoreError::NonLifoPop),
        }
        while self.trail.len() > token.depth + 1 {
            let frame = self.trail.pop().expect("trail above marker");
            self.undo_frame(frame);
        }
        let marker = self.trail.pop();
        debug_assert_eq!(marker, Some(TrailFrame::Marker));
        let (_, queue) = self.open_checkpoints.pop().expect("checked");
        self.queue = queue;
        Ok(())
    }

    fn undo_frame(&mut self, frame: TrailFrame) {
        match frame {
            TrailFrame::Marker => unreachable!("nested checkpoint left open"),
            TrailFrame::VariableCreated { var } => {
                debug_assert_eq!(var.index() + 1, self.domains.len());
                self.domains.pop();
                let w = self.watchers.pop();
                debug_assert!(w.is_some_and(|w| w.is_empty()));
            }
            TrailFrame::DomainDelta { var, value } => {
                self.domains[var.index()].insert(value);
            }
            TrailFrame::DomainSnapshot { domains } => {
                for (var, dom) in domains {
                    debug_assert_eq!(self.domains[var.index()], dom);
                    self.domains[var.index()] = dom;
                }
            }
            TrailFrame::BranchFailed => self.failed = false,
            TrailFrame::ConstraintPosted { constraint } => {
                debug_assert_eq!(constraint.0 + 1, self.constraints.len());
                let slot = self.constraints.pop().expect("posted constraint");
                for v in slot.watched {
                    let c = self.watchers[v.index()].pop();
                    debug_assert_eq!(c, Some(constraint.0));
                }
                self.queue.discard(constraint.0);
            }
            TrailFrame::ConstraintDeactivated { constraint } => self.thaw(constraint.0),
            TrailFrame::ConstraintReactivated { constraint } => {
                self.freeze(constraint.0);
            }
            TrailFrame::WatchExtended { constraint, added } => {
                for _ in 0..added {
                    let v = self.constraints[constraint.0].watched.pop().expect("extended watch");
                    let c = self.watchers[v.index()].pop();
                    debug_assert_eq!(c, Some(constraint.0));
                }
            }
            TrailFrame::PropagatorDelta { constraint, mark } => {
                self.constraints[constraint.0].prop_mut().undo_to(mark);
            }
        }
    }

    /// Returns the number of cells frozen.
    fn freeze(&mut self, c: usize) -> usize {
        let slot = &mut self.constraints[c];
        let prop = slot.prop();
        let cells = prop.state_cells();
        slot.frozen = Some(prop.freeze());
        slot.active = false;
        self.queue.discard(c);
        cells
    }

    fn thaw(&mut self, c: usize) {
        let slot = &mut self.constraints[c];
        let frozen = slot.frozen.take().expect("frozen state present");
        slot.prop_mut().thaw(frozen);
        slot.active = true;
    }

    /// Runs `f` on the propagator of `c` with a context borrowing the store,
    /// and trails the propagator's journal position if it moved.
    fn with_propagator<R>(
        &mut self,
        c: usize,
        f: impl FnOnce(&mut dyn Propagator, &mut PropagationContext<'_>) -> R,
    ) -> R {
        let mut prop = self.constraints[c]
            .propagator
            .take()
            .expect("propagator is not re-entrant");
        let mark = prop.journal_mark();
        let r = {
            let mut ctx = PropagationContext {
                store: self,
                current: c,
            };
            f(prop.as_mut(), &mut ctx)
        };
        if prop.journal_mark() != mark {
            self.push_frame(
                TrailFrame::PropagatorDelta {
                    constraint: ConstraintHandle(c),
                    mark,
                },
                1,
            );
        }
        self.constraints[c].propagator = Some(prop);
        r
    }

    pub fn post_constraint(&mut self, propagator: Box<dyn Propagator>) -> Result<ConstraintHandle, StoreError> {
        if self.failed {
            return Err(StoreError::BranchFailed);
        }
        let watched = propagator.watched();
        for (i, &v) in watched.iter().enumerate() {
            self.check_var(v)?;
            if watched[..i].contains(&v) {
                return Err(StoreError::DuplicateVariable(v));
            }
        }
        let c = self.constraints.len();
        let handle = ConstraintHandle(c);
        for v in &watched {
            self.watchers[v.index()].push(c);
        }
        self.constraints.push(Slot {
            propagator: Some(propagator),
            active: true,
            watched,
            frozen: None,
        });
        self.push_frame(TrailFrame::ConstraintPosted { constraint: handle }, 1);
        let ok = self.with_propagator(c, |p, ctx| p.initialise(ctx));
        if !ok {
            self.fail();
            return Err(StoreError::InitFailure(handle));
        }
        Ok(handle)
    }

    /// Freezes the constraint's internal state on the trail and stops event delivery.
    pub fn deactivate_constraint(&mut self, h: ConstraintHandle) -> Result<(), StoreError> {
        self.check_constraint(h)?;
        if !self.constraints[h.0].active {
            return Err(StoreError::AlreadyInactive(h));
        }
        let cells = self.freeze(h.0);
        self.push_frame(TrailFrame::ConstraintDeactivated { constraint: h }, cells);
        Ok(())
    }

    /// Restores a deactivated constraint's frozen state and resumes event
    /// delivery. Domain changes made while it was inactive are caught up; if
    /// that fails, the branch is marked failed.
    pub fn reactivate_constraint(&mut self, h: ConstraintHandle) -> Result<(), StoreError> {
        self.check_constraint(h)?;
        let slot = &self.constraints[h.0];
        if slot.active || slot.frozen.is_none() {
            return Err(StoreError::NotDeactivated(h));
        }
        if self.trail.last() == Some(&TrailFrame::ConstraintDeactivated { constraint: h }) {
            self.trail.pop();
            self.thaw(h.0);
        } else {
            self.thaw(h.0);
            self.push_frame(TrailFrame::ConstraintReactivated { constraint: h }, 1);
        }
        if !self.failed {
            let ok = self.with_propagator(h.0, |p, ctx| p.resync(ctx));
            if !ok {
                self.fail();
            }
        }
        Ok(())
    }

    /// Adds variables to an active constraint that supports it.
    pub fn adopt_variables(&mut self, h: ConstraintHandle, vars: &[VariableId]) -> Result<bool, StoreError> {
        self.check_constraint(h)?;
        if self.failed {
            return Err(StoreError::BranchFailed);
        }
        if !self.constraints[h.0].active {
            return Err(StoreError::Inactive(h));
        }
        for (i, &v) in vars.iter().enumerate() {
            self.check_var(v)?;
            if vars[..i].contains(&v) || self.constraints[h.0].watched.contains(&v) {
                return Err(StoreError::DuplicateVariable(v));
            }
        }
        let ok = self.with_propagator(h.0, |p, ctx| p.adopt(ctx, vars))?;
        for &v in vars {
            self.constraints[h.0].watched.push(v);
            self.watchers[v.index()].push(h.0);
        }
        self.push_frame(
            TrailFrame::WatchExtended {
                constraint: h,
                added: vars.len(),
            },
            1,
        );
        if !ok {
            self.fail();
        }
        Ok(ok)
    }

    /// Trails a copy of the given domains.
    pub fn trail_domains(&mut self, vars: &[VariableId]) -> Result<(), StoreError> {
        for &v in vars {
            self.check_var(v)?;
        }
        let domains: Vec<(VariableId, FiniteDomain)> =
            vars.iter().map(|&v| (v, self.domains[v.index()].clone())).collect();
        let cells = domains.iter().map(|(_, d)| d.len() + 1).sum();
        self.push_frame(TrailFrame::DomainSnapshot { domains }, cells);
        Ok(())
    }

    /// Delivers queued events until the queue drains or a propagator fails.
    pub fn propagate_fixpoint(&mut self) -> bool {
        while !self.failed {
            let Some((c, events)) = self.queue.pop() else {
                return true;
            };
            if !self.constraints[c].active || events.is_empty() {
                continue;
            }
            let ok = self.with_propagator(c, |p, ctx| p.propagate(ctx, &events));
            if !ok {
                self.fail();
            }
        }
        false
    }
}

impl DomainStore for Store {
    fn domain(&self, var: VariableId) -> &FiniteDomain {
        Store::domain(self, var)
    }

    fn remove_value(&mut self, var: VariableId, value: ValueId) -> Result<bool, StoreError> {
        Store::remove_value(self, var, value)
    }

    fn counters_mut(&mut self) -> &mut OpCounters {
        &mut self.counters
    }
}

/// Store access granted to a propagator while it runs. Removals made
/// through the context are not echoed back to the running propagator.
pub struct PropagationContext<'a> {
    store: &'a mut Store,
    current: usize,
}

impl PropagationContext<'_> {
    pub fn handle(&self) -> ConstraintHandle {
        ConstraintHandle(self.current)
    }
}

impl DomainStore for PropagationContext<'_> {
    fn domain(&self, var: VariableId) -> &FiniteDomain {
        self.store.domain(var)
    }

    fn remove_value(&mut self, var: VariableId, value: ValueId) -> Result<bool, StoreError> {
        self.store.remove_value_from(var, value, Some(self.current))
    }

    fn counters_mut(&mut self) -> &mut OpCounters {
        &mut self.store.counters
    }
}

//! Generic dynamization of a monotonic global constraint.
//!
//! Adding a variable deactivates the current constraint (its internal
//! structures go on the trail), checkpoints the domains of all involved
//! variables, and posts a fresh constraint over the extended variable list.
//! Removing the last variable pops that checkpoint and reactivates the
//! previous constraint from its frozen structures.

use std::collections::HashSet;

use crate::domain::{FiniteDomain, ValueId, VariableId};
use crate::oracle::{self, OracleError};
use crate::store::{CheckpointToken, ConstraintHandle, Propagator, Store, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("variable {0} already belongs to the constraint")]
    DuplicateVariable(VariableId),
    #[error("no variable left to remove")]
    EmptyHistory,
    #[error("instance too large for exhaustive checking")]
    TooLarge,
}

impl From<OracleError> for DynError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge => DynError::TooLarge,
        }
    }
}

pub type ConstraintFactory = Box<dyn Fn(Vec<VariableId>) -> Box<dyn Propagator>>;

#[derive(Debug)]
struct HistoryEntry {
    previous: Option<ConstraintHandle>,
    handle: ConstraintHandle,
    token: CheckpointToken,
}

/// A constraint made dynamic by deactivate-and-repost.
pub struct DynWrapper {
    factory: ConstraintFactory,
    vars: Vec<VariableId>,
    history: Vec<HistoryEntry>,
}

impl std::fmt::Debug for DynWrapper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynWrapper")
            .field("vars", &self.vars)
            .field("history", &self.history)
            .finish_non_exhaustive()
    }
}

impl DynWrapper {
    pub fn new(factory: ConstraintFactory) -> Self {
        Self {
            factory,
            vars: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn depth(&self) -> usize {
        self.history.len()
    }

    /// The constraint currently receiving events.
    pub fn active_handle(&self) -> Option<ConstraintHandle> {
        self.history.last().map(|h| h.handle)
    }
}

/// Adds `x` to the wrapped constraint. Returns the verdict of initialising
/// the re-posted constraint and propagating to fixpoint.
pub fn add_variable_generic(store: &mut Store, wrapper: &mut DynWrapper, x: VariableId) -> Result<bool, DynError> {
    if wrapper.vars.contains(&x) {
        return Err(DynError::DuplicateVariable(x));
    }
    if store.try_domain(x).is_none() {
        return Err(StoreError::UnknownVariable(x).into());
    }
    if store.is_failed() {
        return Err(StoreError::BranchFailed.into());
    }
    let previous = wrapper.active_handle();
    if let Some(h) = previous {
        store.deactivate_constraint(h)?;
    }
    let token = store.push_checkpoint()?;
    let mut vars = wrapper.vars.clone();
    vars.push(x);
    store.trail_domains(&vars)?;
    let (handle, ok) = match store.post_constraint((wrapper.factory)(vars)) {
        Ok(h) => (h, store.propagate_fixpoint()),
        Err(StoreError::InitFailure(h)) => (h, false),
        Err(e) => {
            store.pop_checkpoint(token)?;
            if let Some(h) = previous {
                store.reactivate_constraint(h)?;
            }
            return Err(e.into());
        }
    };
    wrapper.vars.push(x);
    wrapper.history.push(HistoryEntry {
        previous,
        handle,
        token,
    });
    Ok(ok)
}

/// Removes the most recently added variable.
pub fn remove_variable_generic(store: &mut Store, wrapper: &mut DynWrapper) -> Result<(), DynError> {
    let entry = wrapper.history.pop().ok_or(DynError::EmptyHistory)?;
    store.pop_checkpoint(entry.token)?;
    wrapper.vars.pop();
    if let Some(h) = entry.previous {
        store.reactivate_constraint(h)?;
    }
    Ok(())
}

/// Outcome of an exhaustive monotonicity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityWitness {
    pub base_vars: Vec<VariableId>,
    pub extension_var: VariableId,
    pub verdict: bool,
}

/// Maximum product of domain sizes accepted by [`check_monotonic`].
pub const MONOTONIC_CHECK_LIMIT: u64 = 1_000_000;

/// Checks that every solution over the base variables plus the extension,
/// projected onto the base variables, is a solution over the base variables.
///
/// `constraint` is a predicate over a tuple of any arity (one value per
/// variable, in order). Variables are numbered positionally; the extension
/// variable comes last.
pub fn check_monotonic<F>(
    constraint: F,
    base_domains: &[FiniteDomain],
    ext_domain: &FiniteDomain,
) -> Result<MonotonicityWitness, DynError>
where
    F: Fn(&[ValueId]) -> bool,
{
    let product = base_domains
        .iter()
        .chain(std::iter::once(ext_domain))
        .try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64))
        .ok_or(DynError::TooLarge)?;
    if product > MONOTONIC_CHECK_LIMIT {
        return Err(DynError::TooLarge);
    }
    let base: Vec<Vec<ValueId>> = base_domains.iter().map(FiniteDomain::to_vec).collect();
    let mut extended = base.clone();
    extended.push(ext_domain.to_vec());

    let base_solutions: HashSet<Vec<ValueId>> = oracle::enumerate_solutions(&constraint, &base)?
        .tuples
        .into_iter()
        .collect();
    let extended_solutions = oracle::enumerate_solutions(&constraint, &extended)?;
    let verdict = extended_solutions
        .tuples
        .iter()
        .all(|t| base_solutions.contains(&t[..base.len()]));
    Ok(MonotonicityWitness {
        base_vars: (0..base.len() as u32).map(VariableId).collect(),
        extension_var: VariableId(base.len() as u32),
        verdict,
    })
}

#![allow(dead_code)]

use std::collections::BTreeSet;

use dynglobal::harness::{run_scenario, Mode, RunOptions, RunResult, Scenario};
use dynglobal::matching::compute_maximum_matching;
use dynglobal::{
    AllDifferent, DynamicAllDifferent, Edge, FiniteDomain, OpCounters, Store, ValueGraph, ValueId, VariableId,
};
use rand::Rng;

pub fn values(xs: &[u32]) -> Vec<ValueId> {
    xs.iter().map(|&x| ValueId(x)).collect()
}

pub fn dom(xs: &[u32]) -> FiniteDomain {
    xs.iter().map(|&x| ValueId(x)).collect()
}

/// `p` non-empty random subsets of `0..d`.
pub fn random_domains<R: Rng>(rng: &mut R, p: usize, d: usize) -> Vec<Vec<ValueId>> {
    (0..p)
        .map(|_| loop {
            let vals: Vec<ValueId> = (0..d as u32).filter(|_| rng.gen_bool(0.5)).map(ValueId).collect();
            if !vals.is_empty() {
                break vals;
            }
        })
        .collect()
}

pub fn graph_of(domains: &[Vec<ValueId>]) -> ValueGraph {
    let doms: Vec<FiniteDomain> = domains.iter().map(|d| d.iter().copied().collect()).collect();
    ValueGraph::build(doms.iter().enumerate().map(|(i, d)| (VariableId(i as u32), d)))
}

pub fn slot_edges(g: &ValueGraph) -> Vec<(usize, usize)> {
    g.edges()
        .into_iter()
        .map(|e| (g.var_slot(e.var).unwrap(), g.value_slot(e.value).unwrap()))
        .collect()
}

pub fn is_covered(g: &ValueGraph) -> bool {
    compute_maximum_matching(g, &mut OpCounters::default()).len() == g.num_vars()
}

/// Domains after posting alldifferent and propagating, or `None` on failure.
pub fn post_fixpoint(domains: &[Vec<ValueId>]) -> Option<Vec<Vec<ValueId>>> {
    let mut store = Store::new();
    let xs: Vec<VariableId> = domains
        .iter()
        .map(|d| store.add_variable(d.iter().copied().collect()).unwrap())
        .collect();
    store.post_constraint(Box::new(AllDifferent::new(xs.clone()))).ok()?;
    if !store.propagate_fixpoint() {
        return None;
    }
    Some(xs.iter().map(|&x| store.domain(x).to_vec()).collect())
}

/// Outcome of building a constraint, possibly over several batches.
#[derive(Debug, PartialEq, Eq)]
pub struct BuildOutcome {
    pub consistent: bool,
    pub domains: Vec<Vec<ValueId>>,
    pub kept_edges: BTreeSet<Edge>,
}

/// Feeds `batches` to a dynamic alldifferent in order.
pub fn build_in_batches(domains: &[Vec<ValueId>], split: &[usize]) -> BuildOutcome {
    let mut store = Store::new();
    let xs: Vec<VariableId> = domains
        .iter()
        .map(|d| store.add_variable(d.iter().copied().collect()).unwrap())
        .collect();
    let mut dynamic = DynamicAllDifferent::new();
    let mut start = 0;
    let mut consistent = true;
    for &end in split.iter().chain(std::iter::once(&xs.len())) {
        if end == start {
            continue;
        }
        if !dynamic.add_variables(&mut store, &xs[start..end]).unwrap() {
            consistent = false;
            break;
        }
        start = end;
    }
    if !consistent {
        return BuildOutcome {
            consistent,
            domains: Vec::new(),
            kept_edges: BTreeSet::new(),
        };
    }
    let state = AllDifferent::from_store(&store, dynamic.handle().unwrap())
        .unwrap()
        .state()
        .unwrap();
    BuildOutcome {
        consistent,
        domains: xs.iter().map(|&x| store.domain(x).to_vec()).collect(),
        kept_edges: state.graph().edges().into_iter().collect(),
    }
}

pub fn run_both(s: &Scenario, options: RunOptions) -> (RunResult, RunResult) {
    (
        run_scenario(s, Mode::Generic, options).unwrap(),
        run_scenario(s, Mode::Dynamic, options).unwrap(),
    )
}

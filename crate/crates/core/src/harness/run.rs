//! Executes a scenario against one dynamization strategy.

use std::fmt;
use std::time::Instant;

use crate::alldiff::{AllDifferent, DynamicAllDifferent};
use crate::domain::{FiniteDomain, ValueId, VariableId};
use crate::dynamization::{add_variable_generic, remove_variable_generic, DynError, DynWrapper};
use crate::oracle::{self, GacOutcome};
use crate::store::{CheckpointToken, ConstraintHandle, GraphStats, Store, StoreError};

use super::scenario::{Scenario, Step};

/// Largest Cartesian product the runner hands to the brute-force oracle.
pub const ORACLE_PRODUCT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Generic,
    Dynamic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Generic => "generic",
            Mode::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub verify_oracle: bool,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// Zero-based index into the scenario; drained POPs continue the count.
    pub step: usize,
    pub op: &'static str,
    pub p: usize,
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub trailed_cells: u64,
    pub augment_visits: u64,
    pub filter_visits: u64,
    pub wall_ns: u64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    pub step: usize,
    pub consistent: bool,
    /// Live variables with their current domains, when consistent.
    pub domains: Option<Vec<(String, Vec<ValueId>)>>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub mode: Mode,
    pub steps: Vec<StepRecord>,
    pub checks: Vec<CheckRecord>,
    /// POPs after which the store checksum differed from the one taken before the matching ADD.
    pub restore_mismatches: usize,
    pub oracle_checks: usize,
    pub oracle_mismatches: usize,
    pub trace: Vec<String>,
}

impl RunResult {
    pub fn add_rows(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|r| r.op == "ADD")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step}: {source}")]
pub struct RunError {
    pub step: usize,
    #[source]
    pub source: DynError,
}

enum Engine {
    Generic(DynWrapper),
    Dynamic(DynamicAllDifferent),
}

impl Engine {
    fn new(mode: Mode) -> Self {
        match mode {
            Mode::Generic => Engine::Generic(DynWrapper::new(Box::new(|vars| Box::new(AllDifferent::new(vars))))),
            Mode::Dynamic => Engine::Dynamic(DynamicAllDifferent::new()),
        }
    }

    fn handle(&self) -> Option<ConstraintHandle> {
        match self {
            Engine::Generic(w) => w.active_handle(),
            Engine::Dynamic(d) => d.handle(),
        }
    }

    fn add(&mut self, store: &mut Store, x: VariableId) -> Result<bool, DynError> {
        match self {
            Engine::Generic(w) => add_variable_generic(store, w, x),
            Engine::Dynamic(d) => d.add_variable(store, x),
        }
    }

    fn remove(&mut self, store: &mut Store) -> Result<(), DynError> {
        match self {
            Engine::Generic(w) => remove_variable_generic(store, w),
            Engine::Dynamic(d) => d.remove_last(store),
        }
    }
}

/// One scenario ADD. `var` and `token` are `None` when the ADD happened on a
/// failed branch and was skipped.
struct LiveEntry {
    name: String,
    declared: Vec<ValueId>,
    var: Option<VariableId>,
    token: Option<CheckpointToken>,
    checksum_before: u64,
    /// DELs applied while this entry was on top, as (live index, value).
    dels: Vec<(usize, ValueId)>,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    options: RunOptions,
    store: Store,
    engine: Engine,
    live: Vec<LiveEntry>,
    result: RunResult,
}

impl<'a> Runner<'a> {
    fn stats(&self) -> GraphStats {
        self.engine
            .handle()
            .and_then(|h| self.store.propagator(h))
            .and_then(|p| p.graph_stats())
            .unwrap_or_default()
    }

    fn record(&mut self, step: usize, op: &'static str, k: usize, before: crate::OpCounters, started: Instant) {
        let wall_ns = started.elapsed().as_nanos() as u64;
        let delta = self.store.counters().since(&before);
        let stats = self.stats();
        self.result.steps.push(StepRecord {
            step,
            op,
            p: stats.p,
            d: stats.d,
            m: stats.m,
            k,
            trailed_cells: delta.trailed_cells,
            augment_visits: delta.augment_visits,
            filter_visits: delta.filter_visits,
            wall_ns,
            consistent: !self.store.is_failed(),
        });
    }

    fn live_index(&self, name: &str) -> Option<usize> {
        self.live.iter().rposition(|e| e.name == name)
    }

    fn add(&mut self, step: usize, name: &str, domain: &[ValueId]) -> Result<(), RunError> {
        let fail = |source: DynError| RunError { step, source };
        let before = self.store.counters();
        let started = Instant::now();
        let mut entry = LiveEntry {
            name: name.to_string(),
            declared: domain.to_vec(),
            var: None,
            token: None,
            checksum_before: 0,
            dels: Vec::new(),
        };
        if !self.store.is_failed() {
            entry.checksum_before = self.store.checksum();
            let token = self.store.push_checkpoint().map_err(|e| fail(e.into()))?;
            let dom: FiniteDomain = domain.iter().copied().collect();
            let x = self.store.add_variable(dom).map_err(|e| fail(e.into()))?;
            entry.token = Some(token);
            entry.var = Some(x);
            self.engine.add(&mut self.store, x).map_err(fail)?;
        }
        self.live.push(entry);
        self.record(step, "ADD", 1, before, started);
        Ok(())
    }

    fn del(&mut self, step: usize, name: &str, value: ValueId) -> Result<(), RunError> {
        let before = self.store.counters();
        let started = Instant::now();
        let target = self.live_index(name);
        if let (false, Some(i)) = (self.store.is_failed(), target) {
            if let Some(x) = self.live[i].var {
                match self.store.remove_value(x, value) {
                    Ok(_) => {
                        self.store.propagate_fixpoint();
                    }
                    Err(StoreError::DomainWipeout(_)) => {}
                    Err(e) => return Err(RunError { step, source: e.into() }),
                }
                self.live.last_mut().expect("target is live").dels.push((i, value));
            }
        }
        self.record(step, "DEL", 0, before, started);
        Ok(())
    }

    fn pop(&mut self, step: usize) -> Result<(), RunError> {
        let fail = |source: DynError| RunError { step, source };
        let before = self.store.counters();
        let started = Instant::now();
        let entry = self.live.pop().expect("scenario is LIFO-valid");
        if let Some(token) = entry.token {
            self.engine.remove(&mut self.store).map_err(fail)?;
            self.store.pop_checkpoint(token).map_err(|e| fail(e.into()))?;
            if self.store.checksum() != entry.checksum_before {
                self.result.restore_mismatches += 1;
            }
        }
        self.record(step, "POP", 0, before, started);
        Ok(())
    }

    fn check(&mut self, step: usize) {
        let consistent = !self.store.is_failed();
        let domains = consistent.then(|| {
            self.live
                .iter()
                .filter_map(|e| e.var.map(|x| (e.name.clone(), self.store.domain(x).to_vec())))
                .collect()
        });
        if self.options.verify_oracle {
            self.verify(consistent, domains.as_ref());
        }
        self.result.checks.push(CheckRecord {
            step,
            consistent,
            domains,
        });
    }

    /// Compares against brute-force GAC over declared domains minus applied DELs.
    fn verify(&mut self, consistent: bool, domains: Option<&Vec<(String, Vec<ValueId>)>>) {
        let mut base: Vec<Vec<ValueId>> = self.live.iter().map(|e| e.declared.clone()).collect();
        for e in &self.live {
            for &(i, v) in &e.dels {
                base[i].retain(|&w| w != v);
            }
        }
        let keep: Vec<usize> = (0..self.live.len()).filter(|&i| self.live[i].var.is_some()).collect();
        let base: Vec<Vec<ValueId>> = keep.iter().map(|&i| base[i].clone()).collect();
        let product = base.iter().try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64));
        if !product.is_some_and(|p| p <= ORACLE_PRODUCT_LIMIT) {
            return;
        }
        let Ok(outcome) = oracle::gac_filter_bruteforce(oracle::all_different, &base) else {
            return;
        };
        self.result.oracle_checks += 1;
        let agrees = match (outcome, domains) {
            (GacOutcome::Inconsistent, None) => !consistent,
            (GacOutcome::Filtered(want), Some(got)) => {
                consistent && got.len() == want.len() && got.iter().zip(&want).all(|((_, g), w)| g == w)
            }
            _ => false,
        };
        if !agrees {
            self.result.oracle_mismatches += 1;
        }
    }

    fn trace_line(&mut self, step: usize, text: String) {
        if !self.options.trace {
            return;
        }
        let state = if self.store.is_failed() {
            "failed".to_string()
        } else {
            let doms: Vec<String> = self
                .live
                .iter()
                .filter_map(|e| {
                    e.var.map(|x| {
                        let names: Vec<&str> = self
                            .store
                            .domain(x)
                            .iter()
                            .map(|v| self.scenario.value_name(v))
                            .collect();
                        format!("{}={{{}}}", e.name, names.join(","))
                    })
                })
                .collect();
            doms.join(" ")
        };
        self.result
            .trace
            .push(format!("[{}] {step:>4} {text:<16} {state}", self.result.mode));
    }
}

/// Runs every step, then drains remaining ADDs with implicit POPs so the
/// store ends where it started.
pub fn run_scenario(scenario: &Scenario, mode: Mode, options: RunOptions) -> Result<RunResult, RunError> {
    let mut runner = Runner {
        scenario,
        options,
        store: Store::new(),
        engine: Engine::new(mode),
        live: Vec::new(),
        result: RunResult {
            mode,
            steps: Vec::new(),
            checks: Vec::new(),
            restore_mismatches: 0,
            oracle_checks: 0,
            oracle_mismatches: 0,
            trace: Vec::new(),
        },
    };
    let initial = runner.store.checksum();
    for (i, step) in scenario.steps.iter().enumerate() {
        let label = match step {
            Step::Add { var, domain } => {
                runner.add(i, var, domain)?;
                format!("ADD {var}")
            }
            Step::Del { var, value } => {
                runner.del(i, var, *value)?;
                format!("DEL {var} {}", scenario.value_name(*value))
            }
            Step::Pop => {
                runner.pop(i)?;
                "POP".to_string()
            }
            Step::Check => {
                runner.check(i);
                "CHECK".to_string()
            }
        };
        runner.trace_line(i, label);
    }
    let mut i = scenario.steps.len();
    while !runner.live.is_empty() {
        runner.pop(i)?;
        runner.trace_line(i, "POP (drain)".to_string());
        i += 1;
    }
    if runner.store.checksum() != initial {
        runner.result.restore_mismatches += 1;
    }
    Ok(runner.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::parse_scenario;

    const FIVE_VARS: &str = "\
VALUES a b c d e
ADD X1 a b
ADD X2 a b
ADD X3 a b c
ADD X4 c d
ADD X5 d e
CHECK
";

    fn names(s: &Scenario, vals: &[ValueId]) -> Vec<String> {
        vals.iter().map(|&v| s.value_name(v).to_string()).collect()
    }

    #[test]
    fn both_modes_agree_on_five_vars() {
        let s = parse_scenario(FIVE_VARS).unwrap();
        for mode in [Mode::Generic, Mode::Dynamic] {
            let r = run_scenario(
                &s,
                mode,
                RunOptions {
                    verify_oracle: true,
                    trace: true,
                },
            )
            .unwrap();
            let doms = r.checks[0].domains.as_ref().unwrap();
            let got: Vec<Vec<String>> = doms.iter().map(|(_, d)| names(&s, d)).collect();
            assert_eq!(
                got,
                vec![vec!["a", "b"], vec!["a", "b"], vec!["c"], vec!["d"], vec!["e"]]
            );
            assert_eq!(r.restore_mismatches, 0);
            assert_eq!((r.oracle_checks, r.oracle_mismatches), (1, 0));
            assert_eq!(r.trace.len(), s.steps.len() + 5);
        }
    }

    #[test]
    fn failure_then_recovery() {
        let s = parse_scenario("VALUES a b\nADD X1 a\nADD X2 a\nCHECK\nADD X3 b\nDEL X3 b\nPOP\nPOP\nCHECK\n").unwrap();
        for mode in [Mode::Generic, Mode::Dynamic] {
            let r = run_scenario(
                &s,
                mode,
                RunOptions {
                    verify_oracle: true,
                    trace: false,
                },
            )
            .unwrap();
            assert!(!r.checks[0].consistent);
            assert!(r.checks[1].consistent);
            assert_eq!(r.checks[1].domains.as_ref().unwrap().len(), 1);
            assert_eq!(r.restore_mismatches, 0);
            assert_eq!(r.oracle_mismatches, 0);
        }
    }

    #[test]
    fn deletion_wipeout() {
        let s = parse_scenario("VALUES a b\nADD X1 a\nDEL X1 a\nCHECK\nPOP\nCHECK\n").unwrap();
        let r = run_scenario(
            &s,
            Mode::Dynamic,
            RunOptions {
                verify_oracle: true,
                trace: false,
            },
        )
        .unwrap();
        assert!(!r.checks[0].consistent);
        assert!(r.checks[1].consistent);
        assert_eq!(r.oracle_mismatches, 0);
    }

    #[test]
    fn empty_scenario() {
        let r = run_scenario(&Scenario::default(), Mode::Generic, RunOptions::default()).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.restore_mismatches, 0);
    }
}

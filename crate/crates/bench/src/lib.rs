//! Fixtures for the adoption benchmarks.

use dynglobal::harness::Mode;
use dynglobal::{
    add_variable_generic, remove_variable_generic, AllDifferent, DynWrapper, DynamicAllDifferent, FiniteDomain,
    OpCounters, Store, VariableId,
};

enum Engine {
    Generic(DynWrapper),
    Dynamic(DynamicAllDifferent),
}

/// An alldifferent over `p` full-domain variables plus one spare variable
/// that [`Prepared::add_remove`] adopts and retracts.
pub struct Prepared {
    store: Store,
    engine: Engine,
    spare: VariableId,
}

impl Prepared {
    pub fn new(mode: Mode, p: usize, d: u32) -> Self {
        let mut store = Store::new();
        let vars: Vec<VariableId> = (0..p)
            .map(|_| store.add_variable(FiniteDomain::range(d)).unwrap())
            .collect();
        let spare = store.add_variable(FiniteDomain::range(d)).unwrap();
        let engine = match mode {
            Mode::Generic => {
                let mut w = DynWrapper::new(Box::new(|vars| Box::new(AllDifferent::new(vars))));
                for &x in &vars {
                    add_variable_generic(&mut store, &mut w, x).unwrap();
                }
                Engine::Generic(w)
            }
            Mode::Dynamic => {
                let mut dynamic = DynamicAllDifferent::new();
                dynamic.add_variables(&mut store, &vars).unwrap();
                Engine::Dynamic(dynamic)
            }
        };
        Self { store, engine, spare }
    }

    /// Adds the spare variable, then removes it again. Returns the add verdict.
    pub fn add_remove(&mut self) -> bool {
        match &mut self.engine {
            Engine::Generic(w) => {
                let ok = add_variable_generic(&mut self.store, w, self.spare).unwrap();
                remove_variable_generic(&mut self.store, w).unwrap();
                ok
            }
            Engine::Dynamic(d) => {
                let ok = d.add_variable(&mut self.store, self.spare).unwrap();
                d.remove_last(&mut self.store).unwrap();
                ok
            }
        }
    }

    pub fn counters(&self) -> OpCounters {
        self.store.counters()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_remove_is_repeatable() {
        for mode in [Mode::Generic, Mode::Dynamic] {
            let mut prep = Prepared::new(mode, 4, 6);
            let checksum = prep.store.checksum();
            let c0 = prep.counters();
            assert!(prep.add_remove());
            let first = prep.counters().since(&c0);
            assert_eq!(prep.store.checksum(), checksum);
            let c1 = prep.counters();
            assert!(prep.add_remove());
            assert_eq!(prep.counters().since(&c1), first);
        }
    }

    #[test]
    fn overfull_add_fails() {
        let mut prep = Prepared::new(Mode::Dynamic, 3, 3);
        assert!(!prep.add_remove());
        assert!(!prep.add_remove());
    }
}

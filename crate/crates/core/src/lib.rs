//! Finite-domain propagation kernel with a dynamic `alldifferent` constraint.
//!
//! Variables live in a [`Store`] with a reversible trail. Global constraints
//! implement [`Propagator`]. An `alldifferent` constraint can grow its
//! variable set in two ways:
//!
//! * generically, by deactivating the current constraint and re-posting over
//!   the extended variable list ([`add_variable_generic`]);
//! * incrementally, by extending the existing value graph and matching
//!   ([`DynamicAllDifferent`]).
//!
//! Both are retracted in LIFO order. The [`oracle`] module provides
//! brute-force references used by the tests, and [`harness`] replays
//! scenario files while collecting work counters.
//!
//! ```
//! use dynglobal::{DynamicAllDifferent, FiniteDomain, Store, ValueId};
//!
//! let dom = |v: &[u32]| v.iter().map(|&x| ValueId(x)).collect::<FiniteDomain>();
//! let mut store = Store::new();
//! let xs: Vec<_> = [dom(&[0, 1]), dom(&[0, 1]), dom(&[0, 1, 2])]
//!     .into_iter()
//!     .map(|d| store.add_variable(d).unwrap())
//!     .collect();
//!
//! let mut alldiff = DynamicAllDifferent::new();
//! assert!(alldiff.add_variables(&mut store, &xs).unwrap());
//! assert_eq!(store.domain(xs[2]), &dom(&[2]));
//!
//! let x4 = store.add_variable(dom(&[2, 3])).unwrap();
//! assert!(alldiff.add_variable(&mut store, x4).unwrap());
//! assert_eq!(store.domain(x4), &dom(&[3]));
//! alldiff.remove_last(&mut store).unwrap();
//! ```

pub mod alldiff;
pub mod counters;
pub mod domain;
pub mod dynamization;
pub mod harness;
pub mod matching;
pub mod oracle;
pub mod store;

pub use alldiff::{AdoptionRecord, AllDiffError, AllDiffState, AllDifferent, DynamicAllDifferent, Unsatisfiable};
pub use counters::OpCounters;
pub use domain::{FiniteDomain, ValueId, VariableId};
pub use dynamization::{
    add_variable_generic, check_monotonic, remove_variable_generic, ConstraintFactory, DynError, DynWrapper,
    MonotonicityWitness,
};
pub use matching::{graph_checksum, Edge, EdgeList, Matching, MatchingError, ValueGraph};
pub use store::{
    CheckpointToken, ConstraintHandle, DomainStore, GraphStats, PropagationContext, PropagationEvent, Propagator,
    Store, StoreError, StoreSnapshot, TrailFrame,
};

mod common;

use std::collections::BTreeSet;

use dynglobal::harness::{generate_random_scenario, RunOptions};
use dynglobal::matching::{add_edges, compute_maximum_matching, matching_covering_x, remove_edges_from_g};
use dynglobal::oracle::{self, GacOutcome};
use dynglobal::{check_monotonic, Edge, FiniteDomain, OpCounters, ValueId, VariableId};
use proptest::prelude::*;

use common::*;

fn domains_strategy(max_p: usize, max_d: u32) -> impl Strategy<Value = Vec<Vec<ValueId>>> {
    (1..=max_d).prop_flat_map(move |d| {
        prop::collection::vec(
            prop::collection::btree_set(0..d, 1..=d as usize).prop_map(|s| s.into_iter().map(ValueId).collect()),
            1..=max_p,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fixpoint_is_gac(domains in domains_strategy(5, 5)) {
        let want = oracle::gac_filter_bruteforce(oracle::all_different, &domains).unwrap();
        match (post_fixpoint(&domains), want) {
            (Some(got), GacOutcome::Filtered(w)) => prop_assert_eq!(got, w),
            (None, GacOutcome::Inconsistent) => {}
            (got, w) => prop_assert!(false, "store {:?} vs oracle {:?}", got, w),
        }
    }

    #[test]
    fn maximum_matching_size(domains in domains_strategy(6, 6)) {
        let g = graph_of(&domains);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        prop_assert!(m.is_valid_for(&g));
        prop_assert_eq!(m.len(), oracle::max_matching_bruteforce(&slot_edges(&g)).unwrap());
    }

    #[test]
    fn kept_edges_lie_on_maximum_matchings(domains in domains_strategy(6, 6)) {
        let mut g = graph_of(&domains);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        prop_assume!(m.len() == g.num_vars());
        let want = oracle::edges_in_some_max_matching(&slot_edges(&g)).unwrap();
        remove_edges_from_g(&mut g, &m, &mut OpCounters::default()).unwrap();
        let kept: BTreeSet<(usize, usize)> = slot_edges(&g).into_iter().collect();
        prop_assert_eq!(kept, want);
    }

    #[test]
    fn extension_covers_iff_possible(domains in domains_strategy(6, 6), split in 0usize..6) {
        let split = split.min(domains.len());
        let mut g = graph_of(&domains[..split]);
        let m = compute_maximum_matching(&g, &mut OpCounters::default());
        let new_edges: Vec<Edge> = domains[split..]
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.iter().map(move |&v| Edge::new(VariableId((split + i) as u32), v)))
            .collect();
        add_edges(&mut g, &new_edges);
        let possible = oracle::max_matching_bruteforce(&slot_edges(&g)).unwrap() == domains.len();
        match matching_covering_x(&g, &m, &mut OpCounters::default()) {
            Ok(ext) => {
                prop_assert!(possible);
                prop_assert!(ext.is_valid_for(&g) && ext.covers_all());
                // Variables covered before stay covered.
                for x in 0..split {
                    if m.mate_of_var(x).is_some() {
                        prop_assert!(ext.mate_of_var(x).is_some());
                    }
                }
            }
            Err(_) => prop_assert!(!possible),
        }
    }

    #[test]
    fn incremental_matches_scratch(domains in domains_strategy(6, 6), cut in 0usize..6) {
        let cut = cut.min(domains.len());
        prop_assert_eq!(build_in_batches(&domains, &[cut]), build_in_batches(&domains, &[]));
    }

    #[test]
    fn one_at_a_time_matches_scratch(domains in domains_strategy(6, 6)) {
        let cuts: Vec<usize> = (1..domains.len()).collect();
        prop_assert_eq!(build_in_batches(&domains, &cuts), build_in_batches(&domains, &[]));
    }

    #[test]
    fn alldifferent_monotonic(domains in domains_strategy(4, 4)) {
        let doms: Vec<FiniteDomain> = domains.iter().map(|d| d.iter().copied().collect()).collect();
        let (ext, base) = doms.split_last().unwrap();
        prop_assert!(check_monotonic(oracle::all_different, base, ext).unwrap().verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn modes_agree_and_restore(seed in any::<u64>(), del_rate in 0.0f64..0.5) {
        let s = generate_random_scenario(seed, 6, 6, del_rate);
        let (g, d) = run_both(&s, RunOptions { verify_oracle: true, trace: false });
        prop_assert_eq!(&g.checks, &d.checks);
        prop_assert_eq!(g.restore_mismatches + d.restore_mismatches, 0);
        prop_assert_eq!(g.oracle_mismatches + d.oracle_mismatches, 0);
    }

    #[test]
    fn counters_are_reproducible(seed in any::<u64>()) {
        let s = generate_random_scenario(seed, 5, 5, 0.2);
        let strip = |r: &dynglobal::harness::RunResult| -> Vec<_> {
            r.steps.iter().map(|x| (x.p, x.d, x.m, x.trailed_cells, x.augment_visits, x.filter_visits)).collect()
        };
        let (g1, d1) = run_both(&s, RunOptions::default());
        let (g2, d2) = run_both(&s, RunOptions::default());
        prop_assert_eq!(strip(&g1), strip(&g2));
        prop_assert_eq!(strip(&d1), strip(&d2));
    }

    #[test]
    fn graph_shape_within_bounds(seed in any::<u64>()) {
        let s = generate_random_scenario(seed, 6, 6, 0.3);
        let (g, d) = run_both(&s, RunOptions::default());
        for r in g.steps.iter().chain(&d.steps) {
            prop_assert!(r.m <= r.p * r.d);
        }
    }
}

#[test]
fn augment_visits_bounded_per_phase() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let p = rand::Rng::gen_range(&mut rng, 1..=8);
        let d = rand::Rng::gen_range(&mut rng, 1..=8);
        let g = graph_of(&random_domains(&mut rng, p, d));
        let mut c = OpCounters::default();
        compute_maximum_matching(&g, &mut c);
        assert!(
            c.augment_visits <= 3 * (g.num_edges() + g.num_vars() + g.num_values()) as u64 * c.augment_searches.max(1)
        );
    }
}

#[test]
fn value_lists_helper() {
    assert_eq!(values(&[2, 0]), vec![ValueId(2), ValueId(0)]);
    assert_eq!(dom(&[2, 0]).to_vec(), vec![ValueId(0), ValueId(2)]);
}

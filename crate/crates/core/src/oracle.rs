//! Brute-force ground truth for small instances.
//!
//! Nothing here uses the value graph or matching code: constraints are
//! plain predicates over tuples, and graphs are plain edge lists.

use std::collections::BTreeSet;

use crate::domain::ValueId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration")]
    TooLarge,
}

/// Largest Cartesian product scanned by [`enumerate_solutions`].
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Largest edge count accepted by the matching oracles.
pub const MATCHING_EDGE_LIMIT: usize = 64;

/// Satisfying tuples in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionSet {
    pub tuples: Vec<Vec<ValueId>>,
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }
}

/// Pairwise distinct values.
pub fn all_different(tuple: &[ValueId]) -> bool {
    tuple.iter().enumerate().all(|(i, v)| !tuple[..i].contains(v))
}

fn sorted(domains: &[Vec<ValueId>]) -> Vec<Vec<ValueId>> {
    domains
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.sort_unstable();
            d.dedup();
            d
        })
        .collect()
}

/// Scans the Cartesian product of `domains` and keeps tuples satisfying `predicate`.
pub fn enumerate_solutions<F>(predicate: F, domains: &[Vec<ValueId>]) -> Result<SolutionSet, OracleError>
where
    F: Fn(&[ValueId]) -> bool,
{
    let domains = sorted(domains);
    let mut product: u64 = 1;
    for d in &domains {
        product = product.saturating_mul(d.len() as u64);
    }
    if product == 0 {
        return Ok(SolutionSet::default());
    }
    if product > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge);
    }
    let n = domains.len();
    let mut digits = vec![0usize; n];
    let mut tuple: Vec<ValueId> = domains.iter().map(|d| d[0]).collect();
    let mut tuples = Vec::new();
    loop {
        if predicate(&tuple) {
            tuples.push(tuple.clone());
        }
        // Odometer increment, last position fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(SolutionSet { tuples });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < domains[i].len() {
                tuple[i] = domains[i][digits[i]];
                break;
            }
            digits[i] = 0;
            tuple[i] = domains[i][0];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GacOutcome {
    /// Per variable, the values that appear in at least one solution.
    Filtered(Vec<Vec<ValueId>>),
    Inconsistent,
}

/// Keeps exactly the values that take part in some solution.
pub fn gac_filter_bruteforce<F>(predicate: F, domains: &[Vec<ValueId>]) -> Result<GacOutcome, OracleError>
where
    F: Fn(&[ValueId]) -> bool,
{
    let solutions = enumerate_solutions(predicate, domains)?;
    if solutions.is_empty() {
        return Ok(GacOutcome::Inconsistent);
    }
    let mut supported: Vec<BTreeSet<ValueId>> = vec![BTreeSet::new(); domains.len()];
    for t in &solutions.tuples {
        for (i, &v) in t.iter().enumerate() {
            supported[i].insert(v);
        }
    }
    Ok(GacOutcome::Filtered(
        supported.into_iter().map(|s| s.into_iter().collect()).collect(),
    ))
}

/// Calls `visit(matching)` for every subset of `edges` that is a matching.
fn for_each_matching(edges: &[(usize, usize)], mut visit: impl FnMut(&[usize])) {
    fn rec(
        edges: &[(usize, usize)],
        i: usize,
        chosen: &mut Vec<usize>,
        used_vars: &mut BTreeSet<usize>,
        used_vals: &mut BTreeSet<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if i == edges.len() {
            visit(chosen);
            return;
        }
        rec(edges, i + 1, chosen, used_vars, used_vals, visit);
        let (x, a) = edges[i];
        if !used_vars.contains(&x) && !used_vals.contains(&a) {
            used_vars.insert(x);
            used_vals.insert(a);
            chosen.push(i);
            rec(edges, i + 1, chosen, used_vars, used_vals, visit);
            chosen.pop();
            used_vars.remove(&x);
            used_vals.remove(&a);
        }
    }
    rec(
        edges,
        0,
        &mut Vec::new(),
        &mut BTreeSet::new(),
        &mut BTreeSet::new(),
        &mut visit,
    );
}

fn dedup_edges(edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>, OracleError> {
    let set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    if set.len() > MATCHING_EDGE_LIMIT {
        return Err(OracleError::TooLarge);
    }
    Ok(set.into_iter().collect())
}

/// Size of a maximum matching, by enumerating every edge subset that is a matching.
pub fn max_matching_bruteforce(edges: &[(usize, usize)]) -> Result<usize, OracleError> {
    let edges = dedup_edges(edges)?;
    let mut best = 0;
    for_each_matching(&edges, |m| best = best.max(m.len()));
    Ok(best)
}

/// Union of the edge sets of all maximum matchings.
pub fn edges_in_some_max_matching(edges: &[(usize, usize)]) -> Result<BTreeSet<(usize, usize)>, OracleError> {
    let edges = dedup_edges(edges)?;
    let mut best = 0;
    let mut union = BTreeSet::new();
    for_each_matching(&edges, |m| {
        if m.len() > best {
            best = m.len();
            union.clear();
        }
        if m.len() == best {
            union.extend(m.iter().map(|&i| edges[i]));
        }
    });
    Ok(union)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[u32]) -> Vec<ValueId> {
        xs.iter().map(|&x| ValueId(x)).collect()
    }

    // X1, X2 in {a,b}, X3 in {a,b,c} with a=0, b=1, c=2.
    fn three_vars() -> Vec<Vec<ValueId>> {
        vec![v(&[0, 1]), v(&[0, 1]), v(&[0, 1, 2])]
    }

    fn three_var_edges() -> Vec<(usize, usize)> {
        vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]
    }

    #[test]
    fn two_permutations() {
        let s = enumerate_solutions(all_different, &[v(&[0, 1]), v(&[0, 1])]).unwrap();
        assert_eq!(s.tuples, vec![v(&[0, 1]), v(&[1, 0])]);
    }

    #[test]
    fn three_vars_solutions_end_in_c() {
        let s = enumerate_solutions(all_different, &three_vars()).unwrap();
        assert_eq!(s.tuples, vec![v(&[0, 1, 2]), v(&[1, 0, 2])]);
    }

    #[test]
    fn empty_domain_gives_empty_set() {
        let s = enumerate_solutions(all_different, &[v(&[0]), v(&[])]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn enumeration_limit() {
        let doms: Vec<Vec<ValueId>> = (0..8).map(|_| v(&[0, 1, 2, 3, 4, 5, 6, 7])).collect();
        assert_eq!(enumerate_solutions(all_different, &doms), Err(OracleError::TooLarge));
    }

    #[test]
    fn gac_three_vars() {
        assert_eq!(
            gac_filter_bruteforce(all_different, &three_vars()).unwrap(),
            GacOutcome::Filtered(vec![v(&[0, 1]), v(&[0, 1]), v(&[2])])
        );
    }

    #[test]
    fn gac_inconsistent_and_disjoint() {
        assert_eq!(
            gac_filter_bruteforce(all_different, &[v(&[0]), v(&[0])]).unwrap(),
            GacOutcome::Inconsistent
        );
        assert_eq!(
            gac_filter_bruteforce(all_different, &[v(&[0]), v(&[1])]).unwrap(),
            GacOutcome::Filtered(vec![v(&[0]), v(&[1])])
        );
    }

    #[test]
    fn max_matching_sizes() {
        assert_eq!(max_matching_bruteforce(&three_var_edges()).unwrap(), 3);
        assert_eq!(max_matching_bruteforce(&[(0, 0)]).unwrap(), 1);
        assert_eq!(max_matching_bruteforce(&[]).unwrap(), 0);
    }

    #[test]
    fn some_max_matching_edges() {
        let kept = edges_in_some_max_matching(&three_var_edges()).unwrap();
        let want: BTreeSet<_> = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)].into_iter().collect();
        assert_eq!(kept, want);

        let square = [(0, 0), (0, 1), (1, 0), (1, 1)];
        assert_eq!(edges_in_some_max_matching(&square).unwrap().len(), 4);

        let star = [(0, 0), (1, 0), (2, 0)];
        assert_eq!(edges_in_some_max_matching(&star).unwrap().len(), 3);
    }

    #[test]
    fn edge_limit() {
        let many: Vec<(usize, usize)> = (0..65).map(|i| (i, i)).collect();
        assert_eq!(max_matching_bruteforce(&many), Err(OracleError::TooLarge));
    }
}

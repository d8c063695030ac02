//! Identifiers and finite domains.

use std::fmt;

/// A value identifier. Values are dense small integers; symbolic names are
/// mapped onto them by the scenario parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub u32);

impl ValueId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A variable identifier.
///
/// Variables are created and retracted in LIFO order, so the identifier is
/// also the creation index of the variable within its store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub u32);

impl VariableId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn creation_index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

const WORD: usize = 64;

/// An ordered set of values backed by a bitset.
#[derive(Clone, Default)]
pub struct FiniteDomain {
    words: Vec<u64>,
    size: usize,
}

impl FiniteDomain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = ValueId>>(values: I) -> Self {
        let mut dom = Self::new();
        for v in values {
            dom.insert(v);
        }
        dom
    }

    /// Domain `{0, .., n-1}`.
    pub fn range(n: u32) -> Self {
        Self::from_values((0..n).map(ValueId))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn contains(&self, v: ValueId) -> bool {
        let i = v.index();
        self.words.get(i / WORD).is_some_and(|w| w & (1 << (i % WORD)) != 0)
    }

    /// Returns true if the value was not yet present.
    pub fn insert(&mut self, v: ValueId) -> bool {
        let i = v.index();
        if i / WORD >= self.words.len() {
            self.words.resize(i / WORD + 1, 0);
        }
        let bit = 1u64 << (i % WORD);
        let w = &mut self.words[i / WORD];
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.size += 1;
        true
    }

    /// Returns true if the value was present.
    pub fn remove(&mut self, v: ValueId) -> bool {
        let i = v.index();
        match self.words.get_mut(i / WORD) {
            Some(w) if *w & (1 << (i % WORD)) != 0 => {
                *w &= !(1 << (i % WORD));
                self.size -= 1;
                true
            }
            _ => false,
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = ValueId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(ValueId((wi * WORD + b) as u32))
            })
        })
    }

    pub fn to_vec(&self) -> Vec<ValueId> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &FiniteDomain) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }
}

impl fmt::Debug for FiniteDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

impl FromIterator<ValueId> for FiniteDomain {
    fn from_iter<I: IntoIterator<Item = ValueId>>(iter: I) -> Self {
        Self::from_values(iter)
    }
}

impl FiniteDomain {
    fn significant_words(&self) -> &[u64] {
        let mut n = self.words.len();
        while n > 0 && self.words[n - 1] == 0 {
            n -= 1;
        }
        &self.words[..n]
    }
}

// Trailing zero words left behind by removals do not affect equality.
impl PartialEq for FiniteDomain {
    fn eq(&self, other: &Self) -> bool {
        self.significant_words() == other.significant_words()
    }
}

impl Eq for FiniteDomain {}

impl std::hash::Hash for FiniteDomain {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.significant_words().hash(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_remove_len() {
        let mut d = FiniteDomain::from_values([ValueId(0), ValueId(2), ValueId(70)]);
        assert_eq!(d.len(), 3);
        assert!(d.contains(ValueId(70)));
        assert!(!d.contains(ValueId(1)));
        assert!(!d.contains(ValueId(500)));
        assert!(d.remove(ValueId(2)));
        assert!(!d.remove(ValueId(2)));
        assert_eq!(d.to_vec(), vec![ValueId(0), ValueId(70)]);
    }

    #[test]
    fn equality_ignores_capacity() {
        let mut a = FiniteDomain::from_values([ValueId(1), ValueId(100)]);
        a.remove(ValueId(100));
        assert_eq!(a, FiniteDomain::from_values([ValueId(1)]));
    }

    #[test]
    fn subset() {
        let a = FiniteDomain::range(3);
        let b = FiniteDomain::from_values([ValueId(1)]);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
    }

    proptest! {
        #[test]
        fn iter_matches_btreeset(vals in proptest::collection::btree_set(0u32..200, 0..40)) {
            let d: FiniteDomain = vals.iter().map(|&v| ValueId(v)).collect();
            let got: Vec<u32> = d.iter().map(|v| v.0).collect();
            let want: Vec<u32> = vals.iter().copied().collect();
            prop_assert_eq!(got, want);
            prop_assert_eq!(d.len(), vals.len());
        }
    }
}

/// Work counters accumulated by a store and the algorithms it drives.
///
/// All fields only ever grow; callers take differences around an operation
/// to attribute work to it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Vertices scanned by augmenting-path searches.
    pub augment_visits: u64,
    /// Vertices scanned while filtering edges that belong to no maximum matching.
    pub filter_visits: u64,
    /// Scalar slots written to the trail or to a propagator journal.
    pub trailed_cells: u64,
    /// Number of augmenting searches started (one per Hopcroft-Karp phase).
    pub augment_searches: u64,
}

impl OpCounters {
    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            augment_visits: self.augment_visits - earlier.augment_visits,
            filter_visits: self.filter_visits - earlier.filter_visits,
            trailed_cells: self.trailed_cells - earlier.trailed_cells,
            augment_searches: self.augment_searches - earlier.augment_searches,
        }
    }
}

//! Itemsets and deterministic top-k rankings.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of item identifiers, kept sorted ascending and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Itemset(Vec<u32>);

impl Itemset {
    pub fn new(items: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Itemset(v)
    }

    pub fn items(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every item of `self` occurs in the sorted slice `t`.
    pub fn is_subset_of(&self, t: &[u32]) -> bool {
        let mut rest = t;
        for x in &self.0 {
            match rest.binary_search(x) {
                Ok(pos) => rest = &rest[pos + 1..],
                Err(_) => return false,
            }
        }
        true
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl From<Vec<u32>> for Itemset {
    fn from(v: Vec<u32>) -> Self {
        Itemset::new(v)
    }
}

/// Canonical ranking: frequency descending, then shorter itemsets first, then
/// lexicographic order of the sorted item identifiers.
pub fn ranking_cmp(a: (&Itemset, f64), b: (&Itemset, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then(a.0.len().cmp(&b.0.len()))
        .then_with(|| a.0.cmp(b.0))
}

/// Distinct itemsets with frequencies, in canonical ranking order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedItemsets {
    entries: Vec<(Itemset, f64)>,
}

impl RankedItemsets {
    /// Sorts into canonical order. Later duplicates of an itemset are dropped.
    pub fn from_unsorted(entries: impl IntoIterator<Item = (Itemset, f64)>) -> Self {
        let mut seen = std::collections::HashSet::new();
        let mut entries: Vec<(Itemset, f64)> = entries
            .into_iter()
            .filter(|(x, _)| seen.insert(x.clone()))
            .collect();
        entries.sort_by(|a, b| ranking_cmp((&a.0, a.1), (&b.0, b.1)));
        RankedItemsets { entries }
    }

    pub fn entries(&self) -> &[(Itemset, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    /// True when fewer than `k` itemsets were available.
    pub fn is_short_of(&self, k: usize) -> bool {
        self.entries.len() < k
    }

    pub fn frequency(&self, x: &Itemset) -> Option<f64> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, f)| *f)
    }

    pub fn itemsets(&self) -> impl Iterator<Item = &Itemset> {
        self.entries.iter().map(|(x, _)| x)
    }
}

#[derive(Debug, Clone)]
struct HeapEntry {
    itemset: Itemset,
    support: f64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Greater means ranked worse, so the heap top is the current k-th entry.
    fn cmp(&self, other: &Self) -> Ordering {
        ranking_cmp((&self.itemset, self.support), (&other.itemset, other.support))
    }
}

/// Bounded collector of the best `k` itemsets with strictly positive support.
#[derive(Debug)]
pub struct TopK {
    k: usize,
    heap: BinaryHeap<HeapEntry>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    /// Smallest support that can still enter; zero while not full. Supports
    /// strictly below this can never enter, nor can their supersets when
    /// support is anti-monotone.
    pub fn threshold(&self) -> f64 {
        if self.heap.len() < self.k {
            0.0
        } else {
            self.heap.peek().map_or(0.0, |e| e.support)
        }
    }

    /// Whether `support` is worth exploring further.
    pub fn admits(&self, support: f64) -> bool {
        support > 0.0 && support >= self.threshold()
    }

    pub fn offer(&mut self, itemset: Itemset, support: f64) {
        if self.k == 0 || !(support > 0.0) {
            return;
        }
        let entry = HeapEntry { itemset, support };
        if self.heap.len() < self.k {
            self.heap.push(entry);
        } else if let Some(worst) = self.heap.peek() {
            if entry < *worst {
                self.heap.pop();
                self.heap.push(entry);
            }
        }
    }

    pub fn into_ranked(self) -> RankedItemsets {
        RankedItemsets::from_unsorted(self.heap.into_iter().map(|e| (e.itemset, e.support)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn itemset_normalizes_and_tests_containment() {
        let x = Itemset::new([3, 1, 3]);
        assert_eq!(x.items(), &[1, 3]);
        assert!(x.is_subset_of(&[0, 1, 2, 3]));
        assert!(!x.is_subset_of(&[1, 2]));
        assert_eq!(x.to_string(), "{1,3}");
    }

    #[test]
    fn ranking_breaks_ties_by_length_then_lexicographically() {
        let r = RankedItemsets::from_unsorted([
            (Itemset::new([1, 2]), 5.0),
            (Itemset::new([2]), 5.0),
            (Itemset::new([1]), 5.0),
            (Itemset::new([0]), 7.0),
            (Itemset::new([0, 3]), 5.0),
        ]);
        let order: Vec<String> = r.itemsets().map(|x| x.to_string()).collect();
        assert_eq!(order, ["{0}", "{1}", "{2}", "{0,3}", "{1,2}"]);
    }

    #[test]
    fn topk_keeps_best_entries() {
        let mut top = TopK::new(2);
        top.offer(Itemset::new([1]), 3.0);
        top.offer(Itemset::new([2]), 0.0);
        top.offer(Itemset::new([3]), 5.0);
        assert_eq!(top.threshold(), 3.0);
        top.offer(Itemset::new([4]), 4.0);
        top.offer(Itemset::new([0, 9]), 4.0);
        let r = top.into_ranked();
        assert_eq!(r.entries(), &[(Itemset::new([3]), 5.0), (Itemset::new([4]), 4.0)]);
    }
}

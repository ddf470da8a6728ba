//! The single-pass baseline: candidate itemsets from guessing frequencies,
//! then padded sampling over the candidates.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::TransactionDb;
use crate::encoding::EncodedValue;
use crate::error::{Error, Result};
use crate::itemset::{ranking_cmp, Itemset, RankedItemsets};
use crate::ledger::ReportLedger;
use crate::oracle::FrequencyOracle;
use crate::params::MinerParams;
use crate::svim::{estimate_percentile_length, scale_to, PercentileLength};

fn max_frequency(item_freqs: &HashMap<u32, f64>) -> Result<f64> {
    let max = item_freqs.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        Ok(max)
    } else {
        Err(Error::invalid("item frequencies have no positive maximum"))
    }
}

fn factor(f: f64, max: f64, gamma: f64) -> f64 {
    gamma * f.max(0.0) / max
}

/// `prod over x in X of gamma * f(x) / max f`, with negative frequencies
/// treated as zero.
pub fn guessing_frequency(x: &Itemset, item_freqs: &HashMap<u32, f64>, gamma: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty("itemset"));
    }
    let max = max_frequency(item_freqs)?;
    x.items()
        .iter()
        .map(|i| {
            item_freqs
                .get(i)
                .map(|&f| factor(f, max, gamma))
                .ok_or_else(|| Error::invalid(format!("no frequency for item {i}")))
        })
        .product()
}

/// Candidate itemsets with their guessing frequencies, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateItemsets {
    pub entries: Vec<(Itemset, f64)>,
}

struct Frontier {
    positions: Vec<usize>,
    itemset: Itemset,
    value: f64,
}

impl Frontier {
    fn key(&self) -> (&Itemset, f64) {
        (&self.itemset, self.value)
    }
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on canonical rank: the best-ranked entry is the greatest.
        ranking_cmp(other.key(), self.key())
    }
}

/// The `limit` subsets of at least `min_len` items of `s_prime` with the
/// highest guessing frequency, in canonical ranking order.
///
/// Items are ordered by factor (descending) so that replacing the last
/// position with the next one, or appending the next one, never ranks
/// better; popping a frontier seeded with the best singleton therefore yields
/// subsets in ranking order without enumerating all of them. Products are
/// taken in that item order.
pub fn build_candidates(
    s_prime: &RankedItemsets,
    gamma: f64,
    limit: usize,
    min_len: usize,
) -> Result<CandidateItemsets> {
    if s_prime.is_empty() {
        return Err(Error::Empty("frequent items"));
    }
    let freqs: HashMap<u32, f64> = s_prime
        .entries()
        .iter()
        .map(|(x, f)| match x.items() {
            [item] => Ok((*item, *f)),
            _ => Err(Error::invalid(format!("{x} is not a single item"))),
        })
        .collect::<Result<_>>()?;
    let max = max_frequency(&freqs)?;
    let mut items: Vec<(u32, f64)> = freqs.iter().map(|(&x, &f)| (x, factor(f, max, gamma))).collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let make = |positions: Vec<usize>, value: f64| Frontier {
        itemset: Itemset::new(positions.iter().map(|&p| items[p].0)),
        positions,
        value,
    };
    let mut heap = BinaryHeap::new();
    heap.push(make(vec![0], items[0].1));
    let mut out = Vec::with_capacity(limit);
    while out.len() < limit {
        let Some(top) = heap.pop() else { break };
        let last = *top.positions.last().expect("non-empty");
        if last + 1 < items.len() {
            let next = items[last + 1].1;
            let mut appended = top.positions.clone();
            appended.push(last + 1);
            heap.push(make(appended, top.value * next));

            let mut replaced = top.positions.clone();
            *replaced.last_mut().expect("non-empty") = last + 1;
            let base: f64 = replaced[..replaced.len() - 1].iter().map(|&p| items[p].1).product();
            heap.push(make(replaced, base * next));
        }
        if top.itemset.len() >= min_len {
            out.push((top.itemset, top.value));
        }
    }
    Ok(CandidateItemsets { entries: out })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvsmResult {
    pub itemsets: RankedItemsets,
    pub candidates: CandidateItemsets,
    pub length: PercentileLength,
}

/// Estimates the top-`k` itemsets among the `2k` candidates built from
/// `s_prime`. Users in `size_users` report how many candidates their
/// transaction contains; users in `freq_users` send one padded sample of
/// their contained candidates.
#[allow(clippy::too_many_arguments)]
pub fn svsm<O: FrequencyOracle, R: Rng + ?Sized>(
    db: &TransactionDb,
    size_users: &[usize],
    freq_users: &[usize],
    s_prime: &RankedItemsets,
    k: usize,
    oracle: &O,
    params: &MinerParams,
    ledger: &mut ReportLedger,
    rng: &mut R,
) -> Result<SvsmResult> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if freq_users.is_empty() {
        return Err(Error::Empty("frequency reporting group"));
    }
    let candidates = build_candidates(s_prime, params.gamma, 2 * k, params.min_itemset_len)?;
    let contained = |u: usize| -> Vec<usize> {
        let t = db.transaction(u);
        (0..candidates.entries.len())
            .filter(|&j| candidates.entries[j].0.is_subset_of(t))
            .collect()
    };

    let sizes: Vec<usize> = size_users.iter().map(|&u| contained(u).len()).collect();
    ledger.record(size_users)?;
    let length = estimate_percentile_length(
        &sizes,
        candidates.entries.len(),
        params.length_percentile,
        oracle,
        rng,
    )?;

    let m = candidates.entries.len();
    let mut domain: Vec<EncodedValue> = candidates
        .entries
        .iter()
        .map(|(x, _)| EncodedValue::sequence(x.items()))
        .collect();
    domain.push(EncodedValue::dummy());
    let sets: Vec<Vec<usize>> = freq_users.iter().map(|&u| contained(u)).collect();
    ledger.record(freq_users)?;
    let mut counts = oracle.estimate_padded(&sets, length.length, m, &domain, rng)?;
    counts.truncate(m);
    scale_to(&mut counts, db.n(), freq_users.len(), length.length as f64);

    let mut itemsets = RankedItemsets::from_unsorted(
        candidates.entries.iter().map(|(x, _)| x.clone()).zip(counts),
    );
    itemsets.truncate(k);
    Ok(SvsmResult {
        itemsets,
        candidates,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_miner::itemset_frequency;
    use crate::oracle::ExactOracle;
    use crate::params::Allocation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn freqs(pairs: &[(u32, f64)]) -> HashMap<u32, f64> {
        pairs.iter().copied().collect()
    }

    fn singles(pairs: &[(u32, f64)]) -> RankedItemsets {
        RankedItemsets::from_unsorted(pairs.iter().map(|&(x, f)| (Itemset::new([x]), f)))
    }

    #[test]
    fn guessing_frequency_examples() {
        let f = freqs(&[(0, 100.0), (1, 50.0)]);
        let ab = Itemset::new([0, 1]);
        assert_eq!(guessing_frequency(&ab, &f, 1.0).unwrap(), 0.5);
        assert!((guessing_frequency(&ab, &f, 0.8).unwrap() - 0.32).abs() < 1e-15);
        assert_eq!(guessing_frequency(&Itemset::new([1]), &f, 1.0).unwrap(), 0.5);
        assert!(guessing_frequency(&Itemset::new([]), &f, 1.0).is_err());
        assert!(guessing_frequency(&Itemset::new([7]), &f, 1.0).is_err());
    }

    /// Every non-empty subset, scored with factors multiplied in the same
    /// item order as the best-first search.
    fn exhaustive(pairs: &[(u32, f64)], gamma: f64, limit: usize) -> Vec<(Itemset, f64)> {
        let max = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let mut items: Vec<(u32, f64)> = pairs.iter().map(|&(x, f)| (x, factor(f, max, gamma))).collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let k = items.len();
        let mut all = Vec::new();
        for mask in 1u32..(1 << k) {
            let chosen: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let value: f64 = chosen.iter().map(|&p| items[p].1).product();
            all.push((Itemset::new(chosen.iter().map(|&p| items[p].0)), value));
        }
        let mut r = RankedItemsets::from_unsorted(all);
        r.truncate(limit);
        r.entries().to_vec()
    }

    #[test]
    fn tiny_candidate_set() {
        let s = singles(&[(3, 10.0), (5, 8.0)]);
        let c = build_candidates(&s, 1.0, 4, 1).unwrap();
        let names: Vec<String> = c.entries.iter().map(|(x, _)| x.to_string()).collect();
        assert_eq!(names, ["{3}", "{5}", "{3,5}"]);
    }

    #[test]
    fn equal_frequencies_prefer_shorter_itemsets() {
        for gamma in [1.0, 0.8] {
            let s = singles(&(0..12).map(|x| (x, 7.0)).collect::<Vec<_>>());
            let c = build_candidates(&s, gamma, 40, 1).unwrap();
            for w in c.entries.windows(2) {
                assert!(w[0].0.len() <= w[1].0.len());
            }
            assert_eq!(c.entries.len(), 40);
        }
    }

    proptest! {
        #[test]
        fn best_first_equals_exhaustive(f in prop::collection::vec(0.0f64..100.0, 1..13), gamma in 0.3f64..1.0, limit in 1usize..40) {
            let pairs: Vec<(u32, f64)> = f.iter().enumerate().map(|(i, &v)| (i as u32 * 3, v.round() + 1.0)).collect();
            let got = build_candidates(&singles(&pairs), gamma, limit, 1).unwrap();
            prop_assert_eq!(got.entries, exhaustive(&pairs, gamma, limit));
        }

        #[test]
        fn guessing_frequency_is_monotone(f in prop::collection::vec(0.0f64..100.0, 2..8), gamma in 0.0f64..1.0) {
            let table: HashMap<u32, f64> = f.iter().enumerate().map(|(i, &v)| (i as u32, v + 0.5)).collect();
            let mut items = vec![0u32];
            let mut prev = guessing_frequency(&Itemset::new(items.clone()), &table, gamma).unwrap();
            for x in 1..f.len() as u32 {
                items.push(x);
                let next = guessing_frequency(&Itemset::new(items.clone()), &table, gamma).unwrap();
                prop_assert!(next <= prev);
                prev = next;
            }
        }

        #[test]
        fn candidates_ignore_input_order(seed in 0u64..500) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let pairs: Vec<(u32, f64)> = (0..8).map(|x| (x, rng.random_range(1..4) as f64)).collect();
            let a = build_candidates(&singles(&pairs), 0.8, 16, 1).unwrap();
            let rev: Vec<(u32, f64)> = pairs.iter().rev().copied().collect();
            let b = build_candidates(&singles(&rev), 0.8, 16, 1).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn noiseless_svsm_returns_exact_top_k_within_candidates() {
        let rows: Vec<Vec<u32>> = (0..400u32)
            .map(|i| (0..6).filter(|&x| (i + x * 5) % (x + 2) != 0).collect())
            .collect();
        let db = TransactionDb::from_transactions(rows).unwrap();
        let k = 4;
        let s_prime = singles(
            &(0..k as u32)
                .map(|x| (x, itemset_frequency(&db, &Itemset::new([x])) as f64))
                .collect::<Vec<_>>(),
        );
        let params = MinerParams {
            length_percentile: 1.0,
            allocation: Allocation::Shared,
            ..MinerParams::default()
        };
        let users: Vec<usize> = (0..db.n()).collect();
        let mut ledger = ReportLedger::permissive(db.n());
        let got = svsm(&db, &users, &users, &s_prime, k, &ExactOracle, &params, &mut ledger, &mut ChaCha12Rng::seed_from_u64(3)).unwrap();

        let mut expected = RankedItemsets::from_unsorted(
            got.candidates
                .entries
                .iter()
                .map(|(x, _)| (x.clone(), itemset_frequency(&db, x) as f64)),
        );
        expected.truncate(k);
        assert_eq!(got.itemsets.len(), k);
        for ((a, fa), (b, fb)) in got.itemsets.entries().iter().zip(expected.entries()) {
            assert_eq!(a, b);
            assert!((fa - fb).abs() < 1e-9);
        }
        for x in got.itemsets.itemsets() {
            assert!(got.candidates.entries.iter().any(|(c, _)| c == x));
        }
    }
}

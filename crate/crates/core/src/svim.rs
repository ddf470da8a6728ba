//! Private discovery of the top-k items and their frequencies, and the
//! private percentile-length estimator shared by the later stages.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{partition, TransactionDb};
use crate::encoding::EncodedValue;
use crate::error::{Error, Result};
use crate::itemset::{Itemset, RankedItemsets};
use crate::ledger::ReportLedger;
use crate::oracle::FrequencyOracle;
use crate::params::{Allocation, MinerParams};

/// A percentile of a length histogram, flagged when the histogram had no
/// positive mass and the fallback of 1 was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PercentileLength {
    pub length: usize,
    pub degenerate: bool,
}

/// Smallest `l >= 1` whose cumulative share of the mass on lengths
/// `1..=max_len` strictly exceeds `tau`, where `hist[j]` estimates how many
/// users hold `j` items and `max_len = hist.len() - 1`. Negative bins count
/// as zero. Returns `max_len` if the share never exceeds `tau`.
pub fn percentile_length(hist: &[f64], tau: f64) -> Result<PercentileLength> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!("percentile must lie in (0, 1], got {tau}")));
    }
    if hist.len() < 2 {
        return Err(Error::invalid("length histogram needs lengths 0..=max_len with max_len >= 1"));
    }
    let max_len = hist.len() - 1;
    let mass: Vec<f64> = hist[1..].iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Ok(PercentileLength {
            length: 1,
            degenerate: true,
        });
    }
    let mut cumulative = 0.0;
    for (i, m) in mass.iter().enumerate() {
        cumulative += m;
        if cumulative / total > tau {
            return Ok(PercentileLength {
                length: i + 1,
                degenerate: false,
            });
        }
    }
    Ok(PercentileLength {
        length: max_len,
        degenerate: false,
    })
}

/// Each user privately reports a length in `0..=max_len` (larger values are
/// capped); returns the percentile of the estimated histogram.
pub fn estimate_percentile_length<O: FrequencyOracle, R: Rng + ?Sized>(
    lengths: &[usize],
    max_len: usize,
    tau: f64,
    oracle: &O,
    rng: &mut R,
) -> Result<PercentileLength> {
    if lengths.is_empty() {
        return Err(Error::Empty("length reporting group"));
    }
    let domain: Vec<EncodedValue> = (0..=max_len).map(EncodedValue::length).collect();
    let inputs: Vec<usize> = lengths.iter().map(|&l| l.min(max_len)).collect();
    let hist = oracle.estimate(&inputs, &domain, rng)?;
    percentile_length(&hist, tau)
}

/// Counts scaled from a reporting group of `group` users to `population`.
pub(crate) fn scale_to(estimates: &mut [f64], population: usize, group: usize, factor: f64) {
    let s = factor * population as f64 / group as f64;
    estimates.iter_mut().for_each(|v| *v *= s);
}

/// Splits `users` into the parts given by `fractions`, or hands every part
/// the full list under shared allocation.
pub(crate) fn split<R: Rng + ?Sized>(
    users: &[usize],
    fractions: &[f64],
    allocation: Allocation,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    match allocation {
        Allocation::Disjoint => partition(users.to_vec(), fractions, rng),
        Allocation::Shared => Ok(vec![users.to_vec(); fractions.len()]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvimResult {
    /// The top-k items as singletons, with estimated counts scaled to the
    /// whole population.
    pub items: RankedItemsets,
    /// The `2k` items kept after the first step.
    pub pruned_domain: Vec<u32>,
    /// Padding length used in the last step.
    pub length: PercentileLength,
}

impl SvimResult {
    pub fn item_ids(&self) -> Vec<u32> {
        self.items.itemsets().map(|x| x.items()[0]).collect()
    }

    pub fn counts(&self) -> Vec<f64> {
        self.items.entries().iter().map(|(_, f)| *f).collect()
    }
}

/// Finds the `k` most frequent items using `users` in three steps: single
/// sampled items over the whole domain pick `2k` survivors, a length
/// percentile over the survivors fixes a padding length, and padded sampling
/// over the survivors estimates their counts.
pub fn svim<O: FrequencyOracle, R: Rng + ?Sized>(
    db: &TransactionDb,
    users: &[usize],
    k: usize,
    oracle: &O,
    params: &MinerParams,
    ledger: &mut ReportLedger,
    rng: &mut R,
) -> Result<SvimResult> {
    let d = db.d();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > d {
        return Err(Error::invalid(format!("k = {k} exceeds the number of items {d}")));
    }
    let steps = split(users, &params.item_step_fractions, params.allocation, rng)?;
    if steps.iter().any(Vec::is_empty) {
        return Err(Error::Empty("item discovery step group"));
    }
    let n = db.n();
    let domain_items = db.domain().items();

    // Step 1: one sampled item per user over the whole domain.
    let mut domain: Vec<EncodedValue> = domain_items.iter().map(|&x| EncodedValue::item(x)).collect();
    domain.push(EncodedValue::dummy());
    let sets: Vec<Vec<usize>> = steps[0]
        .iter()
        .map(|&u| {
            db.transaction(u)
                .iter()
                .map(|&x| db.domain().index_of(x).expect("items lie in the domain"))
                .collect()
        })
        .collect();
    ledger.record(&steps[0])?;
    let mut first = oracle.estimate_padded(&sets, 1, d, &domain, rng)?;
    first.truncate(d);
    scale_to(&mut first, n, steps[0].len(), 1.0);
    let mut by_estimate: Vec<usize> = (0..d).collect();
    by_estimate.sort_by(|&a, &b| first[b].total_cmp(&first[a]).then(domain_items[a].cmp(&domain_items[b])));
    by_estimate.truncate((2 * k).min(d));
    let mut pruned: Vec<u32> = by_estimate.iter().map(|&i| domain_items[i]).collect();
    pruned.sort_unstable();

    // Step 2: padding length from pruned transaction sizes.
    let pruned_size = |u: usize| db.transaction(u).iter().filter(|x| pruned.binary_search(x).is_ok()).count();
    let sizes: Vec<usize> = steps[1].iter().map(|&u| pruned_size(u)).collect();
    ledger.record(&steps[1])?;
    let length = estimate_percentile_length(&sizes, pruned.len(), params.length_percentile, oracle, rng)?;

    // Step 3: padded sampling over the survivors.
    let mut domain: Vec<EncodedValue> = pruned.iter().map(|&x| EncodedValue::item(x)).collect();
    domain.push(EncodedValue::dummy());
    let sets: Vec<Vec<usize>> = steps[2]
        .iter()
        .map(|&u| {
            db.transaction(u)
                .iter()
                .filter_map(|x| pruned.binary_search(x).ok())
                .collect()
        })
        .collect();
    ledger.record(&steps[2])?;
    let mut counts = oracle.estimate_padded(&sets, length.length, pruned.len(), &domain, rng)?;
    counts.truncate(pruned.len());
    scale_to(&mut counts, n, steps[2].len(), length.length as f64);

    let mut items = RankedItemsets::from_unsorted(
        pruned.iter().zip(counts).map(|(&x, c)| (Itemset::new([x]), c)),
    );
    items.truncate(k);
    Ok(SvimResult {
        items,
        pruned_domain: pruned,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_miner::itemset_frequency;
    use crate::oracle::ExactOracle;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn percentile_examples() {
        let p = percentile_length(&[0.0, 50.0, 30.0, 20.0], 0.9).unwrap();
        assert_eq!(p, PercentileLength { length: 3, degenerate: false });
        assert_eq!(percentile_length(&[9.0, 0.0, 4.0, 1.0], 1e-9).unwrap().length, 2);
        // Lengths [1, 1, 1, 1, 2]: the share at 1 is exactly 0.8, not above it.
        assert_eq!(percentile_length(&[0.0, 4.0, 1.0], 0.8).unwrap().length, 2);
        assert_eq!(percentile_length(&[0.0, 4.0, 1.0], 1.0).unwrap().length, 2);
        assert_eq!(percentile_length(&[5.0, 0.0, 0.0, 0.0], 1.0).unwrap().length, 1);
        let neg = percentile_length(&[3.0, -1.0, -2.0], 0.5).unwrap();
        assert_eq!(neg, PercentileLength { length: 1, degenerate: true });
        assert_eq!(percentile_length(&[0.0, -5.0, 10.0], 0.5).unwrap().length, 2);
        assert!(percentile_length(&[1.0, 1.0], 0.0).is_err());
        assert!(percentile_length(&[1.0], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn percentile_is_monotone_in_tau(hist in prop::collection::vec(-10.0f64..100.0, 2..12), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let l = percentile_length(&hist, lo).unwrap().length;
            let h = percentile_length(&hist, hi).unwrap().length;
            prop_assert!(l <= h);
        }

        #[test]
        fn noiseless_percentile_matches_direct_count(lengths in prop::collection::vec(0usize..9, 1..200), tau in 0.05f64..1.0) {
            let got = estimate_percentile_length(&lengths, 8, tau, &ExactOracle, &mut ChaCha12Rng::seed_from_u64(0)).unwrap();
            let positive: Vec<usize> = lengths.iter().copied().filter(|&l| l > 0).collect();
            if positive.is_empty() {
                prop_assert!(got.degenerate);
            } else {
                let expected = (1..=8)
                    .find(|&l| positive.iter().filter(|&&x| x <= l).count() as f64 / positive.len() as f64 > tau)
                    .unwrap_or(8);
                prop_assert_eq!(got.length, expected);
            }
        }
    }

    fn noiseless() -> MinerParams {
        MinerParams {
            length_percentile: 1.0,
            allocation: Allocation::Shared,
            ..MinerParams::default()
        }
    }

    fn toy_db() -> TransactionDb {
        let rows: Vec<Vec<u32>> = (0..300u32)
            .map(|i| (0..8).filter(|&x| (i * 7 + x * 13) % (x + 2) == 0).collect())
            .collect();
        TransactionDb::new(rows, crate::dataset::ItemDomain::range(8).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_svim_recovers_exact_item_ranking() {
        let db = toy_db();
        let users: Vec<usize> = (0..db.n()).collect();
        for k in 1..=4 {
            let mut ledger = ReportLedger::permissive(db.n());
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            let got = svim(&db, &users, k, &ExactOracle, &noiseless(), &mut ledger, &mut rng).unwrap();
            let mut exact = RankedItemsets::from_unsorted(
                (0..8).map(|x| (Itemset::new([x]), itemset_frequency(&db, &Itemset::new([x])) as f64)),
            );
            exact.truncate(k);
            assert_eq!(got.items.len(), k);
            for ((a, fa), (b, fb)) in got.items.entries().iter().zip(exact.entries()) {
                assert_eq!(a, b);
                assert!((fa - fb).abs() < 1e-9, "{fa} vs {fb}");
            }
            for x in got.item_ids() {
                assert!(got.pruned_domain.contains(&x));
            }
        }
    }

    #[test]
    fn k_equal_to_d_keeps_every_item() {
        let db = toy_db();
        let users: Vec<usize> = (0..db.n()).collect();
        let mut ledger = ReportLedger::permissive(db.n());
        let got = svim(&db, &users, 8, &ExactOracle, &noiseless(), &mut ledger, &mut ChaCha12Rng::seed_from_u64(1)).unwrap();
        assert_eq!(got.pruned_domain, (0..8).collect::<Vec<u32>>());
        assert_eq!(got.items.len(), 8);
        assert!(svim(&db, &users, 9, &ExactOracle, &noiseless(), &mut ledger, &mut ChaCha12Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn disjoint_steps_use_each_user_once() {
        let db = toy_db();
        let users: Vec<usize> = (0..150).collect();
        let mut ledger = ReportLedger::new(db.n());
        let params = MinerParams::default();
        let olh = crate::oracle::Olh::new(1.0).unwrap();
        svim(&db, &users, 3, &olh, &params, &mut ledger, &mut ChaCha12Rng::seed_from_u64(2)).unwrap();
        let s = ledger.summary();
        assert_eq!((s.reporting, s.repeated), (150, 0));
    }
}

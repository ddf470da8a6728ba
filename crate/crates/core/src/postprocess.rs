//! Post-processing of noisy counts: guessing probabilities from item
//! frequencies, weighted combination with those guesses, constrained
//! inference on parent/children pairs and negative-positive balancing.
//!
//! None of these touch user data, so they cost no privacy budget.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::itemset::RankedItemsets;
use crate::noisy_tree::NoisyFpTree;
use crate::svsm::guessing_frequency;

/// Normalized frequencies of the frequent items, indexed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessModel {
    probs: Vec<f64>,
}

impl GuessModel {
    /// Clamps every probability into `[0, 1]` (NaN becomes 0).
    pub fn new(probs: impl IntoIterator<Item = f64>) -> Self {
        GuessModel {
            probs: probs
                .into_iter()
                .map(|p| if p > 0.0 { p.min(1.0) } else { 0.0 })
                .collect(),
        }
    }

    /// Item counts divided by the population size.
    pub fn from_counts(counts: &[f64], population: usize) -> Self {
        Self::new(counts.iter().map(|c| c / population as f64))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn skip_product(&self, from: usize, to: usize) -> f64 {
        self.probs[from..to].iter().map(|p| 1.0 - p).product()
    }

    /// Guessing probability of the prefix with strictly increasing `ranks`:
    /// the chance, under independent items, that a transaction's ranked form
    /// starts with exactly these items. Every included item contributes its
    /// probability and every skipped rank before or between them contributes
    /// one minus its probability.
    pub fn guessing_probability(&self, ranks: &[u32]) -> Result<f64> {
        if ranks.is_empty() {
            return Err(Error::Empty("prefix"));
        }
        let mut g = 1.0;
        let mut previous = None;
        for &r in ranks {
            self.check_rank(r)?;
            if previous.is_some_and(|p| p >= r) {
                return Err(Error::Unordered { index: r as usize });
            }
            g *= self.step_probability(previous, r);
            previous = Some(r);
        }
        Ok(g)
    }

    /// Probability that a transaction reaching `parent` continues with
    /// `child`: the child's probability times one minus the probability of
    /// every rank strictly between them. The root (`None`) sits before rank 0.
    pub fn step_probability(&self, parent: Option<u32>, child: u32) -> f64 {
        let start = parent.map_or(0, |p| p as usize + 1);
        let c = child as usize;
        if c < start || c >= self.probs.len() {
            return 0.0;
        }
        self.skip_product(start, c) * self.probs[c]
    }

    fn check_rank(&self, r: u32) -> Result<()> {
        if (r as usize) < self.probs.len() {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: r as usize,
                size: self.probs.len(),
            })
        }
    }
}

/// Blends queried counts with guesses: each side is divided by its own
/// maximum, mixed as `w * f + (1 - w) * g`, and the mix is multiplied back by
/// the queried maximum. A side whose maximum is not positive counts as all
/// zeros. `weight = 1` returns the estimates unchanged.
pub fn weighted_combination(estimates: &[f64], guesses: &[f64], weight: f64) -> Result<Vec<f64>> {
    if estimates.len() != guesses.len() {
        return Err(Error::invalid(format!(
            "{} estimates but {} guesses",
            estimates.len(),
            guesses.len()
        )));
    }
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::invalid(format!("weight must lie in [0, 1], got {weight}")));
    }
    if weight == 1.0 {
        return Ok(estimates.to_vec());
    }
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f_max = max(estimates);
    let g_max = max(guesses);
    let unit = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    let scale = if f_max > 0.0 { f_max } else { 0.0 };
    Ok(estimates
        .iter()
        .zip(guesses)
        .map(|(&f, &g)| (weight * unit(f, f_max) + (1.0 - weight) * unit(g, g_max)) * scale)
        .collect())
}

/// Prefix weighted combination over one tree level.
pub fn prefix_weighted_combination(
    estimates: &[f64],
    guesses: &[f64],
    omega_prefix: f64,
) -> Result<Vec<f64>> {
    weighted_combination(estimates, guesses, omega_prefix)
}

/// Itemset weighted combination: re-weights mined frequencies with guessing
/// frequencies and re-ranks.
pub fn itemset_weighted_combination(
    mined: &RankedItemsets,
    item_freqs: &HashMap<u32, f64>,
    gamma: f64,
    omega: f64,
) -> Result<RankedItemsets> {
    if omega == 1.0 || mined.is_empty() {
        return Ok(mined.clone());
    }
    let estimates: Vec<f64> = mined.entries().iter().map(|(_, f)| *f).collect();
    let guesses = mined
        .itemsets()
        .map(|x| guessing_frequency(x, item_freqs, gamma))
        .collect::<Result<Vec<f64>>>()?;
    let combined = weighted_combination(&estimates, &guesses, omega)?;
    Ok(RankedItemsets::from_unsorted(
        mined.itemsets().cloned().zip(combined),
    ))
}

/// One constrained-inference correction of a parent and its `b` children so
/// that the children sum to `theta` times the corrected parent. Returns the
/// corrected parent; children are updated in place.
///
/// With one child the parent is kept and the child is set to `theta` times
/// the parent.
pub fn cci_step(parent: f64, children: &mut [f64], theta: f64) -> Result<f64> {
    if children.is_empty() {
        return Err(Error::Empty("children"));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta must be positive, got {theta}")));
    }
    let b = children.len() as f64;
    if children.len() == 1 {
        children[0] = theta * parent;
        return Ok(parent);
    }
    let sum: f64 = children.iter().sum();
    let denom = b * b - 1.0;
    let corrected = (b * b - b) / denom * parent + (b - 1.0) / denom / theta * sum;
    let shift = (corrected * theta - sum) / b;
    children.iter_mut().for_each(|c| *c += shift);
    Ok(corrected)
}

/// Ratio used by [`cci`] for `node`: one when the children already exceed the
/// parent, otherwise the summed step probabilities of the children present.
pub fn cci_ratio(tree: &NoisyFpTree, node: usize, model: &GuessModel) -> f64 {
    let v = tree.node(node);
    let sum: f64 = v.children.iter().map(|&c| tree.node(c).count).sum();
    if v.count < sum {
        return 1.0;
    }
    v.children
        .iter()
        .map(|&c| model.step_probability(v.rank, tree.node(c).rank.expect("child has an item")))
        .sum()
}

/// Runs `repetitions` top-down sweeps of [`cci_step`] over every node with
/// children, skipping nodes whose ratio is below `theta0`. Negative counts
/// are zeroed after each sweep.
pub fn cci(tree: &mut NoisyFpTree, model: &GuessModel, theta0: f64, repetitions: usize) -> Result<()> {
    let order: Vec<usize> = tree.levels().iter().flatten().copied().collect();
    for _ in 0..repetitions {
        for &id in &order {
            if tree.node(id).children.is_empty() {
                continue;
            }
            let theta = cci_ratio(tree, id, model);
            if !(theta >= theta0) || theta <= 0.0 {
                continue;
            }
            let children = tree.node(id).children.clone();
            let mut counts: Vec<f64> = children.iter().map(|&c| tree.node(c).count).collect();
            let corrected = cci_step(tree.node(id).count, &mut counts, theta)?;
            tree.set_count(id, corrected);
            for (c, v) in children.into_iter().zip(counts) {
                tree.set_count(c, v);
            }
        }
        for &id in &order {
            if tree.node(id).count < 0.0 {
                tree.set_count(id, 0.0);
            }
        }
    }
    Ok(())
}

/// Result of [`negative_positive_balance`].
#[derive(Debug, Clone, PartialEq)]
pub struct Balanced {
    pub values: Vec<f64>,
    /// Negative mass that the positive entries could not absorb.
    pub unabsorbed: f64,
}

/// Zeroes negative entries and removes the same total from randomly chosen
/// positive entries, one unit (or what is left of an entry) at a time, so
/// that the overall sum is kept and nothing drops below zero.
pub fn negative_positive_balance<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Balanced {
    let mut out = values.to_vec();
    let mut debit = 0.0;
    for v in out.iter_mut() {
        if *v < 0.0 {
            debit -= *v;
            *v = 0.0;
        }
    }
    let mut positive: Vec<usize> = (0..out.len()).filter(|&i| out[i] > 0.0).collect();
    while debit > 0.0 && !positive.is_empty() {
        let slot = rng.random_range(0..positive.len());
        let i = positive[slot];
        let unit = debit.min(1.0).min(out[i]);
        out[i] -= unit;
        debit -= unit;
        if out[i] <= 0.0 {
            out[i] = 0.0;
            positive.swap_remove(slot);
        }
    }
    Balanced {
        values: out,
        unabsorbed: debit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itemset::Itemset;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn guessing_probability_examples() {
        let m = GuessModel::new([0.5, 0.4, 0.3]);
        assert!((m.guessing_probability(&[0, 2]).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(m.guessing_probability(&[0]).unwrap(), 0.5);
        assert!((m.guessing_probability(&[1]).unwrap() - 0.5 * 0.4).abs() < 1e-15);
        assert!((m.guessing_probability(&[2]).unwrap() - 0.5 * 0.6 * 0.3).abs() < 1e-15);
        assert!((m.guessing_probability(&[0, 1]).unwrap() - 0.2).abs() < 1e-15);
        assert!(m.guessing_probability(&[]).is_err());
        assert!(m.guessing_probability(&[2, 1]).is_err());
        assert!(m.guessing_probability(&[3]).is_err());
        assert!((m.step_probability(Some(0), 2) - 0.3 * 0.6).abs() < 1e-15);
        assert_eq!(m.step_probability(Some(0), 1), 0.4);
        assert!((m.step_probability(None, 1) - 0.5 * 0.4).abs() < 1e-15);
        assert_eq!(GuessModel::new([1.5, -0.2, f64::NAN]).probs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn rooted_prefix_probabilities_form_a_distribution() {
        // Prefixes of one length are disjoint events, and the exact ranked
        // forms of non-empty transactions partition the non-empty case.
        for k in 1..=10u32 {
            let model = GuessModel::new((0..k).map(|i| 0.9 / (1.0 + i as f64)));
            let mut per_level = vec![0.0; k as usize + 1];
            let mut exact_paths = 0.0;
            for mask in 1u32..(1 << k) {
                let ranks: Vec<u32> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                let rooted = model.guessing_probability(&ranks).unwrap();
                per_level[ranks.len()] += rooted;
                let last = *ranks.last().unwrap() as usize;
                exact_paths += rooted * model.skip_product(last + 1, k as usize);
            }
            for total in &per_level {
                assert!(*total <= 1.0 + 1e-12, "k {k}: {per_level:?}");
            }
            let nonempty = 1.0 - model.skip_product(0, k as usize);
            assert!((exact_paths - nonempty).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_combination_boundaries() {
        let f = [10.0, 5.0, -1.0];
        let g = [0.1, 0.4, 0.2];
        assert_eq!(weighted_combination(&f, &g, 1.0).unwrap(), f.to_vec());
        let only_guess = weighted_combination(&f, &g, 0.0).unwrap();
        assert_eq!(only_guess, vec![2.5, 10.0, 5.0]);
        let half = weighted_combination(&f, &g, 0.5).unwrap();
        assert!((half[0] - 6.25).abs() < 1e-12);
        assert_eq!(weighted_combination(&[-1.0, -2.0], &[0.5, 0.5], 0.5).unwrap(), vec![0.0, 0.0]);
        assert!(weighted_combination(&f, &g[..2], 0.5).is_err());
        assert!(weighted_combination(&f, &g, 1.5).is_err());
    }

    #[test]
    fn iwc_reorders_ties_by_guess() {
        let mined = RankedItemsets::from_unsorted([
            (Itemset::new([1]), 50.0),
            (Itemset::new([0, 1]), 50.0),
            (Itemset::new([2]), 40.0),
        ]);
        let freqs: HashMap<u32, f64> = [(0, 100.0), (1, 60.0), (2, 80.0)].into_iter().collect();
        assert_eq!(itemset_weighted_combination(&mined, &freqs, 0.8, 1.0).unwrap(), mined);
        let tied = RankedItemsets::from_unsorted([(Itemset::new([1]), 50.0), (Itemset::new([2]), 50.0)]);
        let out = itemset_weighted_combination(&tied, &freqs, 0.8, 0.7).unwrap();
        let order: Vec<String> = out.itemsets().map(|x| x.to_string()).collect();
        assert_eq!(order, ["{2}", "{1}"]);
    }

    #[test]
    fn cci_step_examples() {
        let mut kids = [8.0, 6.0];
        let parent = cci_step(10.0, &mut kids, 1.0).unwrap();
        assert!((parent - 34.0 / 3.0).abs() < 1e-12);
        assert!((kids[0] - (8.0 - 4.0 / 3.0)).abs() < 1e-12);
        assert!((kids[1] - (6.0 - 4.0 / 3.0)).abs() < 1e-12);
        assert!((kids.iter().sum::<f64>() - parent).abs() < 1e-12);

        let mut one = [3.0];
        assert_eq!(cci_step(10.0, &mut one, 0.6).unwrap(), 10.0);
        assert!((one[0] - 6.0).abs() < 1e-12);

        let mut kids = [1.0, 2.0, 3.0];
        let parent = cci_step(20.0, &mut kids, 0.5).unwrap();
        assert!((kids.iter().sum::<f64>() - 0.5 * parent).abs() < 1e-12);
        assert!(cci_step(1.0, &mut [], 1.0).is_err());
        assert!(cci_step(1.0, &mut [1.0], 0.0).is_err());
    }

    #[test]
    fn cci_skips_low_ratio_nodes() {
        // Parent guess 0.2, remaining child guesses sum to 0.05: ratio 0.25.
        let model = GuessModel::new([0.2, 0.05, 0.5]);
        let mut tree = NoisyFpTree::new(vec![10, 11, 12], 100.0);
        let a = tree.add_node(0, 0, 20.0).unwrap();
        tree.add_node(a, 1, 7.0).unwrap();
        assert!((cci_ratio(&tree, a, &model) - 0.05).abs() < 1e-15);
        let before = tree.clone();
        // Root ratio is 0.2, also below 0.3.
        cci(&mut tree, &model, 0.3, 5).unwrap();
        assert_eq!(tree.counts(), before.counts());
    }

    #[test]
    fn npb_examples() {
        let out = negative_positive_balance(&[5.0, -3.0, 4.0, -1.0], &mut rng(1));
        assert_eq!(out.values.iter().sum::<f64>(), 5.0);
        assert!(out.values.iter().all(|&v| v >= 0.0));
        assert_eq!(out.unabsorbed, 0.0);

        let pos = [1.0, 2.5, 0.0];
        assert_eq!(negative_positive_balance(&pos, &mut rng(2)).values, pos.to_vec());

        let a = negative_positive_balance(&[3.0, -2.0, 7.0, -0.5], &mut rng(3));
        let b = negative_positive_balance(&[3.0, -2.0, 7.0, -0.5], &mut rng(3));
        assert_eq!(a, b);

        let short = negative_positive_balance(&[1.0, -4.0], &mut rng(4));
        assert_eq!(short.values, vec![0.0, 0.0]);
        assert_eq!(short.unabsorbed, 3.0);
    }

    proptest! {
        #[test]
        fn npb_preserves_integer_sums(v in prop::collection::vec(-50i64..50, 0..40), seed in 0u64..1000) {
            let values: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let out = negative_positive_balance(&values, &mut rng(seed));
            prop_assert!(out.values.iter().all(|&x| x >= 0.0));
            let total: f64 = values.iter().sum();
            prop_assert_eq!(out.values.iter().sum::<f64>() - out.unabsorbed, total);
            if total >= 0.0 {
                prop_assert_eq!(out.unabsorbed, 0.0);
            }
        }

        #[test]
        fn cci_step_identity(parent in -100.0f64..1000.0, kids in prop::collection::vec(-50.0f64..500.0, 1..12)) {
            let mut c = kids.clone();
            let corrected = cci_step(parent, &mut c, 1.0).unwrap();
            let sum: f64 = c.iter().sum();
            prop_assert!((sum - corrected).abs() <= 1e-9 * corrected.abs().max(1.0));
        }
    }
}

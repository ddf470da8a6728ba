//! Utility of an estimated top-k list against the exact one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::{Itemset, RankedItemsets};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ncr: f64,
    pub var: f64,
    pub intersection_size: usize,
    pub k: usize,
}

/// Normalized cumulative rank. The itemset at true rank `i` (1-based) scores
/// `k - i + 1`; estimated itemsets outside the true list score zero. The sum
/// is divided by `k (k + 1) / 2`, so only membership matters, not the order
/// of the estimated list.
pub fn ncr(truth: &RankedItemsets, estimate: &RankedItemsets) -> Result<f64> {
    let k = truth.len();
    if k == 0 {
        return Err(Error::Empty("true top-k list"));
    }
    if estimate.len() > k {
        return Err(Error::invalid(format!(
            "estimated list has {} entries but k = {k}",
            estimate.len()
        )));
    }
    let scores: HashMap<&Itemset, usize> = truth
        .itemsets()
        .enumerate()
        .map(|(i, x)| (x, k - i))
        .collect();
    let total: usize = estimate.itemsets().filter_map(|x| scores.get(x)).sum();
    Ok(total as f64 / (k * (k + 1) / 2) as f64)
}

/// Mean squared frequency error over the itemsets present in both lists.
/// Returns `(var, intersection_size)`; an empty intersection gives zero.
pub fn var(truth: &RankedItemsets, estimate: &RankedItemsets) -> (f64, usize) {
    let true_freq: HashMap<&Itemset, f64> = truth.entries().iter().map(|(x, f)| (x, *f)).collect();
    let errors: Vec<f64> = estimate
        .entries()
        .iter()
        .filter_map(|(x, est)| true_freq.get(x).map(|f| (f - est) * (f - est)))
        .collect();
    if errors.is_empty() {
        return (0.0, 0);
    }
    (errors.iter().sum::<f64>() / errors.len() as f64, errors.len())
}

pub fn evaluate(truth: &RankedItemsets, estimate: &RankedItemsets) -> Result<MetricReport> {
    let ncr = ncr(truth, estimate)?;
    let (var, intersection_size) = var(truth, estimate);
    Ok(MetricReport {
        ncr,
        var,
        intersection_size,
        k: truth.len(),
    })
}

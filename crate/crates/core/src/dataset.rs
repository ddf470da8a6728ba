//! Transaction databases: SPMF-format ingestion, a seeded synthetic
//! generator, and random partitioning of users into reporting groups.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Geometric, Zipf};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The item domain: distinct identifiers in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDomain {
    items: Vec<u32>,
}

impl ItemDomain {
    pub fn new(items: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut items: Vec<u32> = items.into_iter().collect();
        let before = items.len();
        items.sort_unstable();
        items.dedup();
        if items.len() != before {
            return Err(Error::invalid("item domain contains duplicate identifiers"));
        }
        if items.is_empty() {
            return Err(Error::Empty("item domain"));
        }
        Ok(ItemDomain { items })
    }

    /// The domain `{0, 1, ..., d-1}`.
    pub fn range(d: usize) -> Result<Self> {
        Self::new(0..d as u32)
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: u32) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    /// Position of `item` within the domain.
    pub fn index_of(&self, item: u32) -> Option<usize> {
        self.items.binary_search(&item).ok()
    }
}

/// A database of `n` transactions; each transaction is a set of items kept as
/// an ascending, duplicate-free vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDb {
    transactions: Vec<Vec<u32>>,
    domain: ItemDomain,
}

impl TransactionDb {
    /// Builds a database over an explicit domain. Transactions are
    /// normalized to sets; items outside the domain are an error.
    pub fn new(transactions: Vec<Vec<u32>>, domain: ItemDomain) -> Result<Self> {
        let transactions: Vec<Vec<u32>> = transactions.into_iter().map(normalize).collect();
        for t in &transactions {
            if let Some(&bad) = t.iter().find(|&&x| !domain.contains(x)) {
                return Err(Error::invalid(format!("item {bad} is not in the domain")));
            }
        }
        Ok(TransactionDb {
            transactions,
            domain,
        })
    }

    /// Builds a database whose domain is the set of items that occur.
    pub fn from_transactions(transactions: Vec<Vec<u32>>) -> Result<Self> {
        let seen: BTreeSet<u32> = transactions.iter().flatten().copied().collect();
        let domain = ItemDomain::new(seen)?;
        Self::new(transactions, domain)
    }

    pub fn transactions(&self) -> &[Vec<u32>] {
        &self.transactions
    }

    pub fn transaction(&self, user: usize) -> &[u32] {
        &self.transactions[user]
    }

    pub fn domain(&self) -> &ItemDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.transactions.len()
    }

    pub fn d(&self) -> usize {
        self.domain.len()
    }

    /// Reads an SPMF plain-format file: one transaction per non-empty line,
    /// whitespace-separated non-negative integer item identifiers.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut transactions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut t = Vec::new();
            for token in line.split_whitespace() {
                let item = token.parse::<u32>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    token: token.to_string(),
                })?;
                t.push(item);
            }
            transactions.push(t);
        }
        if transactions.is_empty() {
            return Err(Error::Empty("transaction file"));
        }
        Self::from_transactions(transactions)
    }

    /// Writes the database in SPMF plain format. Empty transactions become
    /// empty lines, which [`TransactionDb::load`] skips.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for t in &self.transactions {
            let line = t
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// SHA-256 over the canonical content (domain, then transactions), hex.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.domain.len() as u64).to_le_bytes());
        for item in self.domain.items() {
            hasher.update(item.to_le_bytes());
        }
        for t in &self.transactions {
            hasher.update((t.len() as u64).to_le_bytes());
            for item in t {
                hasher.update(item.to_le_bytes());
            }
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn normalize(mut t: Vec<u32>) -> Vec<u32> {
    t.sort_unstable();
    t.dedup();
    t
}

/// An itemset injected into a synthetic transaction with a fixed probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub items: Vec<u32>,
    pub probability: f64,
}

/// Controls for [`generate_synthetic`].
///
/// Each transaction draws a length from a geometric distribution on
/// `{1, 2, ...}` with mean `mean_len`, truncated (by resampling) to
/// `max_len` (or `d`), then fills it with distinct items drawn from a
/// Zipf(`zipf_exponent`, `d`) popularity law over items `0..d` (item 0 most
/// popular). Each planted pattern is then unioned into the transaction
/// independently with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub mean_len: f64,
    pub max_len: Option<usize>,
    pub zipf_exponent: f64,
    pub patterns: Vec<PlantedPattern>,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            mean_len: 8.0,
            max_len: None,
            zipf_exponent: 1.1,
            patterns: Vec::new(),
        }
    }
}

impl SyntheticParams {
    /// Point-of-sale style baskets: about 6.5 items on average, a steep
    /// popularity law and a handful of co-purchased groups among the popular
    /// items. Intended for a domain of roughly 1,650 items.
    pub fn retail_like() -> Self {
        let pattern = |items: &[u32], probability: f64| PlantedPattern {
            items: items.to_vec(),
            probability,
        };
        SyntheticParams {
            mean_len: 6.5,
            max_len: Some(164),
            zipf_exponent: 1.1,
            patterns: vec![
                pattern(&[0, 1], 0.08),
                pattern(&[1, 3], 0.05),
                pattern(&[0, 2, 5], 0.04),
                pattern(&[2, 4], 0.04),
                pattern(&[0, 1, 3], 0.03),
                pattern(&[6, 7], 0.03),
            ],
        }
    }
}

/// Generates `n` transactions over the domain `0..d`. Pure in its arguments.
pub fn generate_synthetic(
    n: usize,
    d: usize,
    params: &SyntheticParams,
    seed: u64,
) -> Result<TransactionDb> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("synthetic data needs n >= 1 and d >= 1"));
    }
    if !(params.mean_len >= 1.0) {
        return Err(Error::invalid("mean transaction length must be at least 1"));
    }
    if params.mean_len > d as f64 {
        return Err(Error::invalid(format!(
            "mean transaction length {} exceeds the domain size {d}",
            params.mean_len
        )));
    }
    if !(params.zipf_exponent >= 0.0) {
        return Err(Error::invalid("zipf exponent must be non-negative"));
    }
    let cap = params.max_len.unwrap_or(d).min(d);
    if cap == 0 {
        return Err(Error::invalid("max_len must be at least 1"));
    }
    for p in &params.patterns {
        if p.items.is_empty() || p.items.iter().any(|&x| x as usize >= d) {
            return Err(Error::invalid("planted pattern items must lie in 0..d"));
        }
        if !(0.0..=1.0).contains(&p.probability) {
            return Err(Error::invalid("planted pattern probability must be in [0, 1]"));
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let lengths = Geometric::new(1.0 / params.mean_len)
        .map_err(|e| Error::invalid(format!("length distribution: {e}")))?;
    let popularity = Zipf::new(d as f64, params.zipf_exponent)
        .map_err(|e| Error::invalid(format!("popularity distribution: {e}")))?;

    let mut transactions = Vec::with_capacity(n);
    let mut chosen = BTreeSet::new();
    for _ in 0..n {
        let len = loop {
            let len = 1 + lengths.sample(&mut rng) as usize;
            if len <= cap {
                break len;
            }
        };
        chosen.clear();
        let mut attempts = 0;
        while chosen.len() < len && attempts < 64 * len {
            let rank: f64 = popularity.sample(&mut rng);
            chosen.insert(rank as u32 - 1);
            attempts += 1;
        }
        // Very skewed laws can starve the tail; top up with the least popular
        // unused items deterministically.
        let mut next = d as u32;
        while chosen.len() < len {
            next -= 1;
            chosen.insert(next);
        }
        for pattern in &params.patterns {
            if rng.random::<f64>() < pattern.probability {
                chosen.extend(pattern.items.iter().copied());
            }
        }
        transactions.push(chosen.iter().copied().collect());
    }
    TransactionDb::new(transactions, ItemDomain::range(d)?)
}

/// Sizes of a partition of `n` users by `fractions`: floors first, then the
/// remainder handed out by largest fractional part (ties to the earlier
/// part). Every size is within one of `floor(fraction * n)`.
pub fn partition_sizes(n: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    if fractions.is_empty() {
        return Err(Error::Empty("fraction list"));
    }
    if fractions.iter().any(|f| !(*f >= 0.0)) {
        return Err(Error::invalid("fractions must be non-negative"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("fractions sum to {total}, not 1")));
    }
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut remaining = n.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if fractions[i] > 0.0 {
            sizes[i] += 1;
            remaining -= 1;
        }
    }
    Ok(sizes)
}

/// Shuffles `users` and cuts the result into contiguous parts of
/// [`partition_sizes`].
pub fn partition<R: Rng + ?Sized>(
    mut users: Vec<usize>,
    fractions: &[f64],
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let sizes = partition_sizes(users.len(), fractions)?;
    users.shuffle(rng);
    let mut parts = Vec::with_capacity(sizes.len());
    let mut rest = users.as_slice();
    for size in sizes {
        let (head, tail) = rest.split_at(size);
        parts.push(head.to_vec());
        rest = tail;
    }
    Ok(parts)
}

/// The three disjoint reporting groups of the mining pipelines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSplit {
    pub items: Vec<usize>,
    pub lengths: Vec<usize>,
    pub queries: Vec<usize>,
}

impl GroupSplit {
    pub fn sizes(&self) -> [usize; 3] {
        [self.items.len(), self.lengths.len(), self.queries.len()]
    }

    /// Group label per user (0, 1 or 2).
    pub fn labels(&self, n: usize) -> Vec<u8> {
        let mut labels = vec![u8::MAX; n];
        for (label, group) in [&self.items, &self.lengths, &self.queries]
            .into_iter()
            .enumerate()
        {
            for &u in group {
                labels[u] = label as u8;
            }
        }
        labels
    }
}

/// Uniformly permutes the users `0..n` under `seed` and assigns contiguous
/// blocks to the item, length, and query groups.
pub fn split_groups(n: usize, fractions: [f64; 3], seed: u64) -> Result<GroupSplit> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    split_groups_with(n, fractions, &mut rng)
}

pub(crate) fn split_groups_with<R: Rng + ?Sized>(
    n: usize,
    fractions: [f64; 3],
    rng: &mut R,
) -> Result<GroupSplit> {
    let mut parts = partition((0..n).collect(), &fractions, rng)?.into_iter();
    let (items, lengths, queries) = (
        parts.next().unwrap_or_default(),
        parts.next().unwrap_or_default(),
        parts.next().unwrap_or_default(),
    );
    Ok(GroupSplit {
        items,
        lengths,
        queries,
    })
}

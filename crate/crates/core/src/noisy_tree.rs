//! Level-by-level private construction of a noisy FP-tree over the frequent
//! items, with candidate cutdown and tree-height estimation.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::TransactionDb;
use crate::encoding::EncodedValue;
use crate::error::{Error, Result};
use crate::exact_miner::{FpTree, ItemOrder};
use crate::ledger::ReportLedger;
use crate::oracle::FrequencyOracle;
use crate::params::{Allocation, MinerParams};
use crate::postprocess::{negative_positive_balance, prefix_weighted_combination, GuessModel};
use crate::svim::{estimate_percentile_length, scale_to, PercentileLength};

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyNode {
    /// Rank of the node's item among the frequent items; `None` at the root.
    pub rank: Option<u32>,
    pub count: f64,
    pub parent: usize,
    pub children: Vec<usize>,
    pub level: usize,
}

/// A prefix tree over frequent-item ranks with estimated (real) counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyFpTree {
    items: Vec<u32>,
    nodes: Vec<NoisyNode>,
    levels: Vec<Vec<usize>>,
}

impl NoisyFpTree {
    /// An empty tree over `items` (in rank order) with the given root count.
    pub fn new(items: Vec<u32>, root_count: f64) -> Self {
        NoisyFpTree {
            items,
            nodes: vec![NoisyNode {
                rank: None,
                count: root_count,
                parent: 0,
                children: Vec::new(),
                level: 0,
            }],
            levels: vec![vec![0]],
        }
    }

    pub fn add_node(&mut self, parent: usize, rank: u32, count: f64) -> Result<usize> {
        if rank as usize >= self.items.len() {
            return Err(Error::OutOfDomain {
                value: rank as usize,
                size: self.items.len(),
            });
        }
        let p = self.nodes.get(parent).ok_or(Error::OutOfDomain {
            value: parent,
            size: self.nodes.len(),
        })?;
        if p.rank.is_some_and(|r| r >= rank) {
            return Err(Error::Unordered { index: parent });
        }
        if p.children.iter().any(|&c| self.nodes[c].rank == Some(rank)) {
            return Err(Error::invalid(format!("node {parent} already has a child of rank {rank}")));
        }
        let level = p.level + 1;
        let id = self.nodes.len();
        self.nodes.push(NoisyNode {
            rank: Some(rank),
            count,
            parent,
            children: Vec::new(),
            level,
        });
        self.nodes[parent].children.push(id);
        if self.levels.len() <= level {
            self.levels.push(Vec::new());
        }
        self.levels[level].push(id);
        Ok(id)
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn node(&self, id: usize) -> &NoisyNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[NoisyNode] {
        &self.nodes
    }

    /// Node ids per level; level 0 holds the root.
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn set_count(&mut self, id: usize, count: f64) {
        self.nodes[id].count = count;
    }

    pub fn counts(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.count).collect()
    }

    pub fn prefix_ranks(&self, mut id: usize) -> Vec<u32> {
        let mut ranks = Vec::with_capacity(self.nodes[id].level);
        while let Some(r) = self.nodes[id].rank {
            ranks.push(r);
            id = self.nodes[id].parent;
        }
        ranks.reverse();
        ranks
    }

    pub fn prefix_items(&self, id: usize) -> Vec<u32> {
        self.prefix_ranks(id).into_iter().map(|r| self.items[r as usize]).collect()
    }

    /// The same tree as an [`FpTree`] for mining. Counts must be non-negative.
    pub fn to_fp_tree(&self) -> Result<FpTree> {
        let mut tree = FpTree::new(ItemOrder::new(self.items.clone())?);
        tree.set_root_count(self.nodes[0].count);
        let mut mapped = vec![0usize; self.nodes.len()];
        for &id in self.levels.iter().skip(1).flatten() {
            let node = &self.nodes[id];
            if !(node.count >= 0.0) {
                return Err(Error::invalid(format!("node {id} has count {}", node.count)));
            }
            let item = self.items[node.rank.expect("non-root") as usize];
            mapped[id] = tree.add_child(mapped[node.parent], item, node.count)?;
        }
        Ok(tree)
    }
}

/// One candidate prefix: a parent node extended by one item rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub parent: usize,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePrefixSet {
    pub level: usize,
    pub candidates: Vec<Candidate>,
}

impl CandidatePrefixSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn prefix(&self, tree: &NoisyFpTree, i: usize) -> Vec<u32> {
        let c = self.candidates[i];
        let mut p = tree.prefix_ranks(c.parent);
        p.push(c.rank);
        p
    }
}

/// Every valid (positive-count) node of level `level - 1` spawns one
/// candidate per lower-ranked frequent item.
pub fn generate_level_candidates(tree: &NoisyFpTree, level: usize) -> CandidatePrefixSet {
    let k = tree.items.len() as u32;
    let mut candidates = Vec::new();
    if level >= 1 {
        if let Some(parents) = tree.levels.get(level - 1) {
            for &p in parents {
                let node = &tree.nodes[p];
                if !(node.count > 0.0) {
                    continue;
                }
                let first = node.rank.map_or(0, |r| r + 1);
                candidates.extend((first..k).map(|rank| Candidate { parent: p, rank }));
            }
        }
    }
    CandidatePrefixSet { level, candidates }
}

/// Keeps the `width` candidates with the highest temporal guessing
/// frequency: the parent's estimated count times the probability of
/// stepping from the parent's item to the candidate's item. Ties go to the
/// lexicographically smaller rank prefix.
pub fn cutdown_candidates(
    tree: &NoisyFpTree,
    set: CandidatePrefixSet,
    model: &GuessModel,
    width: usize,
) -> CandidatePrefixSet {
    if set.len() <= width {
        return set;
    }
    let mut scored: Vec<(f64, Vec<u32>, Candidate)> = (0..set.len())
        .map(|i| {
            let c = set.candidates[i];
            let parent = tree.node(c.parent);
            let score = parent.count * model.step_probability(parent.rank, c.rank);
            (score, set.prefix(tree, i), c)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    scored.truncate(width);
    CandidatePrefixSet {
        level: set.level,
        candidates: scored.into_iter().map(|(_, _, c)| c).collect(),
    }
}

/// Privately estimated counts of the candidates, scaled from the group to
/// `population`. Each user reports the first `level` items of their ranked
/// transaction when that prefix is a candidate, and the dummy otherwise.
pub fn query_level<O: FrequencyOracle, R: Rng + ?Sized>(
    tree: &NoisyFpTree,
    set: &CandidatePrefixSet,
    ranked: &[&[u32]],
    population: usize,
    oracle: &O,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if ranked.is_empty() {
        return Err(Error::Empty("level reporting group"));
    }
    let prefixes: Vec<Vec<u32>> = (0..set.len()).map(|i| set.prefix(tree, i)).collect();
    let index: HashMap<&[u32], usize> = prefixes.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let dummy = set.len();
    let l = set.level;
    let inputs: Vec<usize> = ranked
        .iter()
        .map(|t| {
            t.get(..l)
                .and_then(|p| index.get(p).copied())
                .unwrap_or(dummy)
        })
        .collect();
    let mut domain: Vec<EncodedValue> = prefixes
        .iter()
        .map(|p| {
            let items: Vec<u32> = p.iter().map(|&r| tree.items[r as usize]).collect();
            EncodedValue::sequence(&items)
        })
        .collect();
    domain.push(EncodedValue::dummy());
    let mut est = oracle.estimate(&inputs, &domain, rng)?;
    est.truncate(set.len());
    scale_to(&mut est, population, ranked.len(), 1.0);
    Ok(est)
}

/// Ranks of the frequent items in a transaction, ascending.
pub fn ranked_transaction(t: &[u32], order: &ItemOrder) -> Vec<u32> {
    let mut r: Vec<u32> = t.iter().filter_map(|&x| order.rank_of(x)).collect();
    r.sort_unstable();
    r
}

/// Tree height: a percentile of how many frequent items users hold, reported
/// over `0..=k`, clamped to `1..=k`.
pub fn estimate_tree_height<O: FrequencyOracle, R: Rng + ?Sized>(
    db: &TransactionDb,
    users: &[usize],
    order: &ItemOrder,
    percentile: f64,
    oracle: &O,
    ledger: &mut ReportLedger,
    rng: &mut R,
) -> Result<PercentileLength> {
    let k = order.len();
    if k == 0 {
        return Err(Error::Empty("frequent items"));
    }
    let sizes: Vec<usize> = users
        .iter()
        .map(|&u| db.transaction(u).iter().filter(|&&x| order.rank_of(x).is_some()).count())
        .collect();
    ledger.record(users)?;
    let mut m = estimate_percentile_length(&sizes, k, percentile, oracle, rng)?;
    m.length = m.length.clamp(1, k);
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    /// Candidates generated before cutdown.
    pub generated: usize,
    /// Candidates queried.
    pub queried: usize,
    /// Queried candidates that ended with a positive count.
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstructionStats {
    pub group_size: usize,
    pub levels: Vec<LevelStats>,
    /// Candidate children generated over the whole construction.
    pub expansions: usize,
    /// Construction stopped before the target height because no node
    /// remained valid.
    pub stopped_early: bool,
    /// Negative mass the balancing step could not absorb, summed over levels.
    pub unabsorbed: f64,
}

/// Builds the noisy tree of height at most `height` over the frequent items
/// in `order`, using the users of `users`, one disjoint equal-size group per
/// level (leftover users stay idle). Counts are scaled to the population.
#[allow(clippy::too_many_arguments)]
pub fn construct_noisy_tree<O: FrequencyOracle, R: Rng + ?Sized>(
    db: &TransactionDb,
    users: &[usize],
    order: &ItemOrder,
    height: usize,
    model: &GuessModel,
    oracle: &O,
    params: &MinerParams,
    ledger: &mut ReportLedger,
    rng: &mut R,
) -> Result<(NoisyFpTree, ConstructionStats)> {
    if height == 0 {
        return Err(Error::invalid("tree height must be at least 1"));
    }
    if users.len() < height {
        return Err(Error::invalid(format!(
            "{} users cannot fill {height} levels",
            users.len()
        )));
    }
    let k = order.len();
    if model.len() != k {
        return Err(Error::invalid("guess model and item order differ in length"));
    }
    let population = db.n();
    let groups: Vec<Vec<usize>> = match params.allocation {
        Allocation::Shared => vec![users.to_vec(); height],
        Allocation::Disjoint => {
            let mut shuffled = users.to_vec();
            shuffled.shuffle(rng);
            let size = users.len() / height;
            shuffled.chunks_exact(size).take(height).map(<[usize]>::to_vec).collect()
        }
    };
    let width = params.level_width(k);
    let mut tree = NoisyFpTree::new(order.items().to_vec(), population as f64);
    let mut stats = ConstructionStats {
        group_size: groups[0].len(),
        ..Default::default()
    };

    for (i, group) in groups.iter().enumerate() {
        let level = i + 1;
        let generated = generate_level_candidates(&tree, level);
        if generated.is_empty() {
            stats.stopped_early = true;
            break;
        }
        stats.expansions += generated.len();
        let n_generated = generated.len();
        let set = if params.cutdown {
            cutdown_candidates(&tree, generated, model, width)
        } else {
            generated
        };

        let ranked: Vec<Vec<u32>> = group.iter().map(|&u| ranked_transaction(db.transaction(u), order)).collect();
        let views: Vec<&[u32]> = ranked.iter().map(Vec::as_slice).collect();
        ledger.record(group)?;
        let mut counts = query_level(&tree, &set, &views, population, oracle, rng)?;

        if params.pwc {
            let guesses = (0..set.len())
                .map(|i| model.guessing_probability(&set.prefix(&tree, i)))
                .collect::<Result<Vec<f64>>>()?;
            counts = prefix_weighted_combination(&counts, &guesses, params.omega_prefix)?;
        }
        if params.npb {
            let balanced = negative_positive_balance(&counts, rng);
            stats.unabsorbed += balanced.unabsorbed;
            counts = balanced.values;
        } else {
            counts.iter_mut().for_each(|c| *c = c.max(0.0));
        }

        for (c, count) in set.candidates.iter().zip(&counts) {
            tree.add_node(c.parent, c.rank, *count)?;
        }
        stats.levels.push(LevelStats {
            level,
            generated: n_generated,
            queried: set.len(),
            valid: counts.iter().filter(|&&c| c > 0.0).count(),
        });
    }
    Ok((tree, stats))
}

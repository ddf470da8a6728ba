//! FP-tree construction and top-k FP-growth mining.
//!
//! The same tree type and miner serve exact (integer) trees built from raw
//! transactions and noisy (real-valued) trees reconstructed from private
//! reports. Supports are `f64` throughout.

use std::collections::HashMap;
use std::ops::{Bound, RangeBounds};

use crate::dataset::TransactionDb;
use crate::error::{Error, Result};
use crate::itemset::{Itemset, RankedItemsets, TopK};

/// A ranking of items; rank 0 is the most frequent item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemOrder {
    items: Vec<u32>,
    ranks: HashMap<u32, u32>,
}

impl ItemOrder {
    pub fn new(items: Vec<u32>) -> Result<Self> {
        let mut ranks = HashMap::with_capacity(items.len());
        for (r, &item) in items.iter().enumerate() {
            if ranks.insert(item, r as u32).is_some() {
                return Err(Error::invalid(format!("item {item} appears twice in the ranking")));
            }
        }
        Ok(ItemOrder { items, ranks })
    }

    /// The order of the single-item entries of `frequent`.
    pub fn from_ranked(frequent: &RankedItemsets) -> Result<Self> {
        let mut items = Vec::with_capacity(frequent.len());
        for x in frequent.itemsets() {
            match x.items() {
                [item] => items.push(*item),
                _ => return Err(Error::invalid(format!("{x} is not a single item"))),
            }
        }
        Self::new(items)
    }

    /// Items of `db` with positive support, by descending support and then
    /// ascending identifier.
    pub fn by_frequency(db: &TransactionDb) -> Self {
        let supports = item_supports(db);
        let mut items: Vec<(u32, usize)> = supports.into_iter().filter(|&(_, c)| c > 0).collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Self::new(items.into_iter().map(|(x, _)| x).collect()).expect("distinct items")
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

    pub fn rank_of(&self, item: u32) -> Option<u32> {
        self.ranks.get(&item).copied()
    }

    pub fn item_at(&self, rank: u32) -> u32 {
        self.items[rank as usize]
    }

    fn to_itemset(&self, ranks: &[u32]) -> Itemset {
        Itemset::new(ranks.iter().map(|&r| self.item_at(r)))
    }
}

fn item_supports(db: &TransactionDb) -> HashMap<u32, usize> {
    let mut supports: HashMap<u32, usize> = db.domain().items().iter().map(|&x| (x, 0)).collect();
    for t in db.transactions() {
        for x in t {
            *supports.entry(*x).or_default() += 1;
        }
    }
    supports
}

/// Keeps only ranked items of one transaction, in rank order.
pub fn preprocess_transaction(t: &[u32], order: &ItemOrder) -> Vec<u32> {
    let mut ranks: Vec<u32> = t.iter().filter_map(|&x| order.rank_of(x)).collect();
    ranks.sort_unstable();
    ranks.dedup();
    ranks.into_iter().map(|r| order.item_at(r)).collect()
}

/// Prunes every transaction to the ranked items and orders them by rank.
pub fn preprocess<T: AsRef<[u32]>>(rows: &[T], order: &ItemOrder) -> Vec<Vec<u32>> {
    rows.iter()
        .map(|t| preprocess_transaction(t.as_ref(), order))
        .collect()
}

/// Exact containment count `|{t : X is a subset of t}|`. The empty itemset is
/// contained in every transaction.
pub fn itemset_frequency(db: &TransactionDb, x: &Itemset) -> usize {
    db.transactions().iter().filter(|t| x.is_subset_of(t)).count()
}

pub type NodeId = usize;

const ROOT_RANK: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct FpNode {
    pub rank: u32,
    pub count: f64,
    pub parent: NodeId,
    pub children: Vec<NodeId>,
}

/// Prefix tree over rank sequences with per-rank header lists.
#[derive(Debug, Clone)]
struct RankTree {
    nodes: Vec<FpNode>,
    header: Vec<Vec<NodeId>>,
    child_index: HashMap<(NodeId, u32), NodeId>,
}

impl RankTree {
    fn new(num_ranks: usize) -> Self {
        RankTree {
            nodes: vec![FpNode {
                rank: ROOT_RANK,
                count: 0.0,
                parent: 0,
                children: Vec::new(),
            }],
            header: vec![Vec::new(); num_ranks],
            child_index: HashMap::new(),
        }
    }

    fn child(&mut self, parent: NodeId, rank: u32) -> NodeId {
        if let Some(&id) = self.child_index.get(&(parent, rank)) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(FpNode {
            rank,
            count: 0.0,
            parent,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        self.header[rank as usize].push(id);
        self.child_index.insert((parent, rank), id);
        id
    }

    /// Adds `weight` along the path of strictly increasing `ranks`.
    fn insert(&mut self, ranks: &[u32], weight: f64) {
        self.nodes[0].count += weight;
        let mut cur = 0;
        for &r in ranks {
            cur = self.child(cur, r);
            self.nodes[cur].count += weight;
        }
    }

    /// The path below the root when no node branches.
    fn single_path(&self) -> Option<Vec<(u32, f64)>> {
        let mut path = Vec::new();
        let mut cur = 0;
        loop {
            match self.nodes[cur].children.as_slice() {
                [] => return Some(path),
                [only] => {
                    cur = *only;
                    path.push((self.nodes[cur].rank, self.nodes[cur].count));
                }
                _ => return None,
            }
        }
    }

    fn path_ranks(&self, mut id: NodeId) -> Vec<u32> {
        let mut ranks = Vec::new();
        while id != 0 {
            ranks.push(self.nodes[id].rank);
            id = self.nodes[id].parent;
        }
        ranks.reverse();
        ranks
    }
}

/// An FP-tree: node counts are prefix supports and every root-to-node path
/// lists items in strictly increasing rank.
#[derive(Debug, Clone)]
pub struct FpTree {
    order: ItemOrder,
    tree: RankTree,
}

impl FpTree {
    pub fn new(order: ItemOrder) -> Self {
        let n = order.len();
        FpTree {
            order,
            tree: RankTree::new(n),
        }
    }

    /// Builds the exact tree of preprocessed transactions (each a sequence of
    /// ranked items in strictly increasing rank).
    pub fn build<T: AsRef<[u32]>>(rows: &[T], order: ItemOrder) -> Result<Self> {
        let mut tree = FpTree::new(order);
        let mut ranks = Vec::new();
        for (index, row) in rows.iter().enumerate() {
            ranks.clear();
            for &x in row.as_ref() {
                match tree.order.rank_of(x) {
                    Some(r) if ranks.last().is_none_or(|&last| last < r) => ranks.push(r),
                    _ => return Err(Error::Unordered { index }),
                }
            }
            tree.tree.insert(&ranks, 1.0);
        }
        Ok(tree)
    }

    pub fn order(&self) -> &ItemOrder {
        &self.order
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &FpNode {
        &self.tree.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.tree.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.nodes.len() == 1
    }

    /// Item of a non-root node.
    pub fn item(&self, id: NodeId) -> Option<u32> {
        let rank = self.tree.nodes[id].rank;
        (rank != ROOT_RANK).then(|| self.order.item_at(rank))
    }

    /// Items on the path from the root to `id`.
    pub fn prefix(&self, id: NodeId) -> Vec<u32> {
        self.tree
            .path_ranks(id)
            .into_iter()
            .map(|r| self.order.item_at(r))
            .collect()
    }

    /// Count of the node reached by `prefix`, or zero if absent.
    pub fn prefix_count(&self, prefix: &[u32]) -> f64 {
        let mut cur = 0;
        for &x in prefix {
            let next = self
                .order
                .rank_of(x)
                .and_then(|r| self.tree.child_index.get(&(cur, r)));
            match next {
                Some(&id) => cur = id,
                None => return 0.0,
            }
        }
        self.tree.nodes[cur].count
    }

    /// Attaches a child with an explicit count (for trees whose counts are
    /// estimated rather than accumulated). Ranks must increase along paths.
    pub fn add_child(&mut self, parent: NodeId, item: u32, count: f64) -> Result<NodeId> {
        let rank = self
            .order
            .rank_of(item)
            .ok_or_else(|| Error::invalid(format!("item {item} is not ranked")))?;
        let parent_rank = self.tree.nodes[parent].rank;
        if parent_rank != ROOT_RANK && parent_rank >= rank {
            return Err(Error::Unordered { index: parent });
        }
        if self.tree.child_index.contains_key(&(parent, rank)) {
            return Err(Error::invalid(format!("duplicate child for item {item}")));
        }
        let id = self.tree.child(parent, rank);
        self.tree.nodes[id].count = count;
        Ok(id)
    }

    pub fn set_root_count(&mut self, count: f64) {
        self.tree.nodes[0].count = count;
    }

    /// Node ids in breadth-first order, root first.
    pub fn breadth_first(&self) -> Vec<NodeId> {
        let mut out = vec![0];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.tree.nodes[out[i]].children.iter().copied());
            i += 1;
        }
        out
    }
}

/// Top-`k` itemsets of the tree by support (no minimum support).
pub fn fp_growth(tree: &FpTree, k: usize) -> Result<RankedItemsets> {
    fp_growth_bounded(tree, k, ..)
}

/// Top-`k` itemsets whose length lies in `lengths`.
///
/// Follows FP-growth: a single-path tree yields every combination of its
/// nodes with the minimum node count as support; otherwise each item's
/// conditional pattern base is mined recursively. Items whose support cannot
/// reach the current k-th support are pruned, which is sound because supports
/// of non-negative trees are anti-monotone.
pub fn fp_growth_bounded(tree: &FpTree, k: usize, lengths: impl RangeBounds<usize>) -> Result<RankedItemsets> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if tree.tree.nodes.iter().skip(1).any(|n| !(n.count >= 0.0)) {
        return Err(Error::invalid("FP-tree counts must be non-negative"));
    }
    let mut miner = Miner {
        order: &tree.order,
        top: TopK::new(k),
        min_len: match lengths.start_bound() {
            Bound::Included(&m) => m,
            Bound::Excluded(&m) => m + 1,
            Bound::Unbounded => 0,
        },
        max_len: match lengths.end_bound() {
            Bound::Included(&m) => m,
            Bound::Excluded(&m) => m.saturating_sub(1),
            Bound::Unbounded => usize::MAX,
        },
    };
    if miner.min_len > miner.max_len {
        return Ok(RankedItemsets::default());
    }
    miner.mine(&tree.tree, &[]);
    Ok(miner.top.into_ranked())
}

struct Miner<'a> {
    order: &'a ItemOrder,
    top: TopK,
    min_len: usize,
    max_len: usize,
}

impl Miner<'_> {
    fn offer(&mut self, ranks: &[u32], support: f64) {
        if ranks.len() < self.min_len {
            return;
        }
        let x = self.order.to_itemset(ranks);
        self.top.offer(x, support);
    }

    fn mine(&mut self, tree: &RankTree, suffix: &[u32]) {
        if suffix.len() >= self.max_len {
            return;
        }
        if let Some(path) = tree.single_path() {
            let mut chosen = suffix.to_vec();
            self.mine_path(&path, 0, f64::INFINITY, &mut chosen);
            return;
        }

        let mut heads: Vec<(u32, f64)> = tree
            .header
            .iter()
            .enumerate()
            .filter(|(_, ids)| !ids.is_empty())
            .map(|(r, ids)| (r as u32, ids.iter().map(|&id| tree.nodes[id].count).sum()))
            .collect();
        heads.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        for (rank, support) in heads {
            if !self.top.admits(support) {
                break;
            }
            let mut pattern = suffix.to_vec();
            pattern.push(rank);
            self.offer(&pattern, support);
            if pattern.len() >= self.max_len {
                continue;
            }

            let base: Vec<(Vec<u32>, f64)> = tree.header[rank as usize]
                .iter()
                .map(|&id| (tree.path_ranks(tree.nodes[id].parent), tree.nodes[id].count))
                .filter(|(path, w)| !path.is_empty() && *w > 0.0)
                .collect();
            let mut cond_support: HashMap<u32, f64> = HashMap::new();
            for (path, w) in &base {
                for &r in path {
                    *cond_support.entry(r).or_default() += w;
                }
            }
            let keep = |r: &u32| cond_support.get(r).is_some_and(|&s| self.top.admits(s));
            let mut cond = RankTree::new(tree.header.len());
            let mut any = false;
            for (path, w) in &base {
                let kept: Vec<u32> = path.iter().copied().filter(keep).collect();
                if !kept.is_empty() {
                    cond.insert(&kept, *w);
                    any = true;
                }
            }
            if any {
                self.mine(&cond, &pattern);
            }
        }
    }

    fn mine_path(&mut self, path: &[(u32, f64)], start: usize, min_count: f64, chosen: &mut Vec<u32>) {
        for i in start..path.len() {
            let (rank, count) = path[i];
            let support = min_count.min(count);
            if !self.top.admits(support) {
                continue;
            }
            chosen.push(rank);
            self.offer(chosen, support);
            if chosen.len() < self.max_len {
                self.mine_path(path, i + 1, support, chosen);
            }
            chosen.pop();
        }
    }
}

/// Exact top-`k` itemsets of `db` with length in `lengths`, ranked with the
/// canonical tie-break. Fewer than `k` entries means fewer such itemsets have
/// positive support.
pub fn exact_top_k(db: &TransactionDb, k: usize, lengths: impl RangeBounds<usize>) -> Result<RankedItemsets> {
    let order = ItemOrder::by_frequency(db);
    let rows = preprocess(db.transactions(), &order);
    let tree = FpTree::build(&rows, order)?;
    fp_growth_bounded(&tree, k, lengths)
}

//! The two end-to-end pipelines: the noisy FP-tree miner and the
//! single-pass baseline. Both split users into the same three groups and
//! share the item-discovery stage, so runs with the same seed see the same
//! frequent items.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{split_groups_with, GroupSplit, TransactionDb};
use crate::encoding::derive_seed;
use crate::error::{Error, Result};
use crate::exact_miner::{fp_growth_bounded, ItemOrder};
use crate::itemset::RankedItemsets;
use crate::ledger::{LedgerSummary, ReportLedger};
use crate::noisy_tree::{construct_noisy_tree, estimate_tree_height, LevelStats, NoisyFpTree};
use crate::oracle::{FrequencyOracle, Olh};
use crate::params::{Allocation, MinerParams};
use crate::postprocess::{cci, itemset_weighted_combination, GuessModel};
use crate::svim::{svim, SvimResult};
use crate::svsm::svsm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinerKind {
    FpMiner,
    Svsm,
}

impl MinerKind {
    pub fn name(self) -> &'static str {
        match self {
            MinerKind::FpMiner => "fpminer",
            MinerKind::Svsm => "svsm",
        }
    }
}

impl fmt::Display for MinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fpminer" => Ok(MinerKind::FpMiner),
            "svsm" => Ok(MinerKind::Svsm),
            other => Err(Error::invalid(format!("unknown miner {other:?}"))),
        }
    }
}

/// Intermediate quantities of one run, for diagnostics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MinerStats {
    pub group_sizes: [usize; 3],
    pub frequent_items: usize,
    pub item_padding: usize,
    /// Tree height, or the baseline's padding length.
    pub height: usize,
    pub height_degenerate: bool,
    pub candidates: usize,
    pub levels: Vec<LevelStats>,
    pub expansions: usize,
    pub stopped_early: bool,
    pub unabsorbed: f64,
    /// Fewer than `k` itemsets were found.
    pub short: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerOutput {
    pub itemsets: RankedItemsets,
    pub stats: MinerStats,
    pub ledger: LedgerSummary,
}

/// Output of [`ldp_fpminer_tree`]: the mined result plus the tree it came from.
#[derive(Debug, Clone)]
pub struct TreeRun {
    pub output: MinerOutput,
    pub tree: NoisyFpTree,
    pub items: SvimResult,
}

struct Setup {
    groups: GroupSplit,
    ledger: ReportLedger,
}

fn setup<O: FrequencyOracle>(db: &TransactionDb, k: usize, oracle: &O, params: &MinerParams, seed: u64) -> Result<Setup> {
    params.validate()?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = db.n();
    match params.allocation {
        Allocation::Disjoint => {
            let mut rng = stage_rng(seed, "groups");
            Ok(Setup {
                groups: split_groups_with(n, params.group_fractions, &mut rng)?,
                ledger: ReportLedger::new(n),
            })
        }
        Allocation::Shared if oracle.is_private() => Err(Error::invalid(
            "shared allocation reuses users and is only allowed with a non-private oracle",
        )),
        Allocation::Shared => {
            let all: Vec<usize> = (0..n).collect();
            Ok(Setup {
                groups: GroupSplit {
                    items: all.clone(),
                    lengths: all.clone(),
                    queries: all,
                },
                ledger: ReportLedger::permissive(n),
            })
        }
    }
}

fn stage_rng(seed: u64, stage: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, &[stage.as_bytes()]))
}

fn item_table(items: &RankedItemsets) -> HashMap<u32, f64> {
    items.entries().iter().map(|(x, f)| (x.items()[0], *f)).collect()
}

/// Mines the top-`k` itemsets through a noisy FP-tree, returning the tree
/// as well.
pub fn ldp_fpminer_tree<O: FrequencyOracle>(
    db: &TransactionDb,
    k: usize,
    oracle: &O,
    params: &MinerParams,
    seed: u64,
) -> Result<TreeRun> {
    let Setup { groups, mut ledger } = setup(db, k, oracle, params, seed)?;
    let items = svim(db, &groups.items, k, oracle, params, &mut ledger, &mut stage_rng(seed, "items"))?;
    let order = ItemOrder::from_ranked(&items.items)?;
    let model = GuessModel::from_counts(&items.counts(), db.n());

    let height = estimate_tree_height(
        db,
        &groups.lengths,
        &order,
        params.height_percentile,
        oracle,
        &mut ledger,
        &mut stage_rng(seed, "height"),
    )?;
    let m = height.length.min(groups.queries.len());
    let (mut tree, construction) = construct_noisy_tree(
        db,
        &groups.queries,
        &order,
        m,
        &model,
        oracle,
        params,
        &mut ledger,
        &mut stage_rng(seed, "tree"),
    )?;
    if params.cci {
        cci(&mut tree, &model, params.theta0, params.cci_repetitions)?;
    }

    let pool = if params.iwc { k * params.iwc_pool_factor } else { k };
    let mut itemsets = fp_growth_bounded(&tree.to_fp_tree()?, pool, params.min_itemset_len..)?;
    if params.iwc {
        itemsets = itemset_weighted_combination(&itemsets, &item_table(&items.items), params.gamma, params.omega_itemset)?;
    }
    itemsets.truncate(k);

    let stats = MinerStats {
        group_sizes: groups.sizes(),
        frequent_items: items.items.len(),
        item_padding: items.length.length,
        height: m,
        height_degenerate: height.degenerate,
        candidates: construction.levels.iter().map(|l| l.queried).sum(),
        levels: construction.levels,
        expansions: construction.expansions,
        stopped_early: construction.stopped_early,
        unabsorbed: construction.unabsorbed,
        short: itemsets.is_short_of(k),
    };
    Ok(TreeRun {
        output: MinerOutput {
            itemsets,
            stats,
            ledger: ledger.summary(),
        },
        tree,
        items,
    })
}

/// Mines the top-`k` itemsets of `db` through a noisy FP-tree. Every user
/// reports at most once, so the run is private whenever `oracle` is.
pub fn ldp_fpminer<O: FrequencyOracle>(
    db: &TransactionDb,
    k: usize,
    oracle: &O,
    params: &MinerParams,
    seed: u64,
) -> Result<MinerOutput> {
    ldp_fpminer_tree(db, k, oracle, params, seed).map(|run| run.output)
}

/// The baseline: the same item discovery, then candidate itemsets from
/// guessing frequencies estimated by the remaining users.
pub fn svsm_miner<O: FrequencyOracle>(
    db: &TransactionDb,
    k: usize,
    oracle: &O,
    params: &MinerParams,
    seed: u64,
) -> Result<MinerOutput> {
    let Setup { groups, mut ledger } = setup(db, k, oracle, params, seed)?;
    let items = svim(db, &groups.items, k, oracle, params, &mut ledger, &mut stage_rng(seed, "items"))?;
    let result = svsm(
        db,
        &groups.lengths,
        &groups.queries,
        &items.items,
        k,
        oracle,
        params,
        &mut ledger,
        &mut stage_rng(seed, "itemsets"),
    )?;
    let stats = MinerStats {
        group_sizes: groups.sizes(),
        frequent_items: items.items.len(),
        item_padding: items.length.length,
        height: result.length.length,
        height_degenerate: result.length.degenerate,
        candidates: result.candidates.entries.len(),
        short: result.itemsets.is_short_of(k),
        ..Default::default()
    };
    Ok(MinerOutput {
        itemsets: result.itemsets,
        stats,
        ledger: ledger.summary(),
    })
}

/// Runs `kind` with optimized local hashing at budget `epsilon`.
pub fn run_miner(
    kind: MinerKind,
    db: &TransactionDb,
    k: usize,
    epsilon: f64,
    params: &MinerParams,
    seed: u64,
) -> Result<MinerOutput> {
    let oracle = Olh::new(epsilon)?;
    match kind {
        MinerKind::FpMiner => ldp_fpminer(db, k, &oracle, params, seed),
        MinerKind::Svsm => svsm_miner(db, k, &oracle, params, seed),
    }
}

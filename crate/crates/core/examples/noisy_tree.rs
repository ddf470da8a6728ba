//! Build a noisy FP-tree level by level and inspect it: per-level candidate
//! counts, the top of each level, and the error against exact prefix counts.
//!
//!     cargo run --release --example noisy_tree

use std::collections::HashMap;

use ldp_fpminer::dataset::{generate_synthetic, SyntheticParams};
use ldp_fpminer::miner::ldp_fpminer_tree;
use ldp_fpminer::noisy_tree::ranked_transaction;
use ldp_fpminer::oracle::Olh;
use ldp_fpminer::params::MinerParams;
use ldp_fpminer::exact_miner::ItemOrder;

fn main() -> ldp_fpminer::Result<()> {
    let db = generate_synthetic(200_000, 100, &SyntheticParams::retail_like(), 9)?;
    let run = ldp_fpminer_tree(&db, 10, &Olh::new(3.0)?, &MinerParams::default(), 1)?;
    let tree = &run.tree;
    println!("frequent items (rank order): {:?}", tree.items());
    println!("levels: {:?}", run.output.stats.levels.iter().map(|l| (l.generated, l.queried, l.valid)).collect::<Vec<_>>());

    // exact count of every rank prefix
    let order = ItemOrder::from_ranked(&run.items.items)?;
    let mut exact: HashMap<Vec<u32>, usize> = HashMap::new();
    for t in db.transactions() {
        let ranks = ranked_transaction(t, &order);
        for l in 1..=ranks.len() {
            *exact.entry(ranks[..l].to_vec()).or_default() += 1;
        }
    }

    for (depth, level) in tree.levels().iter().enumerate().skip(1) {
        let mut nodes: Vec<usize> = level.clone();
        nodes.sort_by(|&a, &b| tree.node(b).count.total_cmp(&tree.node(a).count));
        println!("level {depth}: {} nodes", nodes.len());
        for &id in nodes.iter().take(4) {
            let ranks = tree.prefix_ranks(id);
            let truth = exact.get(&ranks).copied().unwrap_or(0);
            println!("    {:?}  noisy {:>9.0}  exact {truth:>7}", tree.prefix_items(id), tree.node(id).count);
        }
    }
    Ok(())
}

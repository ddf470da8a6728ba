//! Non-private top-k mining with FP-growth, cross-checked against direct
//! support counting.
//!
//!     cargo run --release --example exact_mining

use ldp_fpminer::dataset::{generate_synthetic, SyntheticParams};
use ldp_fpminer::exact_miner::{exact_top_k, itemset_frequency, preprocess, FpTree, ItemOrder};

fn main() -> ldp_fpminer::Result<()> {
    let db = generate_synthetic(100_000, 200, &SyntheticParams::retail_like(), 1)?;
    let order = ItemOrder::by_frequency(&db);
    let tree = FpTree::build(&preprocess(db.transactions(), &order), order)?;
    println!("{} transactions, {} items, FP-tree with {} nodes", db.n(), db.d(), tree.len());

    let top = exact_top_k(&db, 15, ..)?;
    for (rank, (x, f)) in top.entries().iter().enumerate() {
        assert_eq!(*f as usize, itemset_frequency(&db, x));
        println!("{:>3}  {:<12} {f}", rank + 1, x.to_string());
    }

    let pairs = exact_top_k(&db, 5, ..=1)?;
    println!("top singletons: {}", pairs.itemsets().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    Ok(())
}

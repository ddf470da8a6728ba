//! The four refinement steps on small hand-made inputs: prefix weighted
//! combination, constrained inference on a tree, negative-positive balance,
//! and itemset weighted combination.
//!
//!     cargo run --example post_processing

use std::collections::HashMap;

use ldp_fpminer::itemset::{Itemset, RankedItemsets};
use ldp_fpminer::noisy_tree::NoisyFpTree;
use ldp_fpminer::postprocess::{
    cci, itemset_weighted_combination, negative_positive_balance, prefix_weighted_combination, GuessModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() -> ldp_fpminer::Result<()> {
    // items ranked 0, 1, 2 with these estimated frequencies out of 1
    let model = GuessModel::new([0.6, 0.5, 0.3]);
    println!("guessing probability of prefix [0, 1]: {:.3}", model.guessing_probability(&[0, 1])?);
    println!("guessing probability of prefix [1]: {:.3}", model.guessing_probability(&[1])?);

    let estimates = [5200.0, 800.0, 3100.0];
    let guesses = [model.guessing_probability(&[0])?, model.guessing_probability(&[1])?, model.guessing_probability(&[2])?];
    let blended = prefix_weighted_combination(&estimates, &guesses, 0.7)?;
    println!("level-1 estimates {estimates:?} blended with guesses -> {blended:.0?}");

    let mut tree = NoisyFpTree::new(vec![10, 11, 12], 10_000.0);
    let a = tree.add_node(0, 0, 6400.0)?;
    let b = tree.add_node(0, 1, 1500.0)?;
    tree.add_node(a, 1, 4100.0)?;
    tree.add_node(a, 2, 900.0)?;
    tree.add_node(b, 2, 700.0)?;
    println!("before constrained inference: {:.0?}", tree.counts());
    cci(&mut tree, &model, 0.3, 5)?;
    println!("after constrained inference:  {:.0?}", tree.counts());

    let noisy = [120.0, -40.0, 15.0, -7.5, 60.0];
    let balanced = negative_positive_balance(&noisy, &mut ChaCha12Rng::seed_from_u64(0));
    println!(
        "balance {noisy:?} -> {:?} (sum {} -> {})",
        balanced.values,
        noisy.iter().sum::<f64>(),
        balanced.values.iter().sum::<f64>()
    );

    let mined = RankedItemsets::from_unsorted([
        (Itemset::new([10]), 6400.0),
        (Itemset::new([10, 11]), 4100.0),
        (Itemset::new([12]), 4300.0),
        (Itemset::new([11, 12]), 1200.0),
    ]);
    let item_freqs = HashMap::from([(10, 6000.0), (11, 5000.0), (12, 3000.0)]);
    let reranked = itemset_weighted_combination(&mined, &item_freqs, 0.8, 0.5)?;
    for (x, f) in reranked.entries() {
        println!("    {:<8} {f:.0}", x.to_string());
    }
    Ok(())
}

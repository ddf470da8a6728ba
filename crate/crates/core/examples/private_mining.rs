//! Mine the top-k itemsets under local differential privacy with the noisy
//! FP-tree miner and the single-pass baseline, and score both.
//!
//!     cargo run --release --example private_mining -- [epsilon]

use ldp_fpminer::dataset::{generate_synthetic, SyntheticParams};
use ldp_fpminer::exact_miner::exact_top_k;
use ldp_fpminer::metrics::evaluate;
use ldp_fpminer::miner::{run_miner, MinerKind};
use ldp_fpminer::params::MinerParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epsilon: f64 = std::env::args().nth(1).map_or(Ok(2.0), |s| s.parse())?;
    let k = 10;
    let db = generate_synthetic(100_000, 300, &SyntheticParams::retail_like(), 3)?;
    let truth = exact_top_k(&db, k, ..)?;
    let params = MinerParams::default();

    for kind in [MinerKind::FpMiner, MinerKind::Svsm] {
        let out = run_miner(kind, &db, k, epsilon, &params, 42)?;
        let m = evaluate(&truth, &out.itemsets)?;
        println!("{kind}: NCR {:.3}  Var {:.3e}  ({} of {} users reported once)", m.ncr, m.var, out.ledger.reporting, out.ledger.users);
        for (x, f) in out.itemsets.entries() {
            let exact = truth.frequency(x).map_or("-".to_string(), |t| format!("{t}"));
            println!("    {:<12} {f:>10.0}  exact {exact}", x.to_string());
        }
    }
    Ok(())
}

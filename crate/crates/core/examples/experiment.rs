//! A seeded multi-trial experiment through the harness: the noisy FP-tree
//! miner with and without its refinements against the baseline on
//! point-of-sale style synthetic data, scoring itemsets of two or more
//! items. Writes per-trial JSON and `summary.csv` under the output directory.
//!
//!     cargo run --release --example experiment -- [n] [trials] [output_dir]

use std::path::PathBuf;

use ldp_fpminer::dataset::SyntheticParams;
use ldp_fpminer::harness::{run_experiment, DatasetSpec, ExperimentConfig, VariantSpec};
use ldp_fpminer::miner::MinerKind;
use ldp_fpminer::params::MinerParams;
use serde_json::json;

fn variant(label: &str, miner: MinerKind, overrides: serde_json::Value) -> VariantSpec {
    VariantSpec {
        label: label.to_string(),
        miner,
        params: overrides.as_object().cloned().unwrap_or_default(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(50_000), |s| s.parse())?;
    let trials: usize = args.next().map_or(Ok(3), |s| s.parse())?;
    let output_dir = args.next().map_or_else(|| std::env::temp_dir().join("ldp-fpminer-experiment"), PathBuf::from);

    let off = json!({"pwc": false, "cci": false, "npb": false, "iwc": false});
    let config = ExperimentConfig {
        dataset: DatasetSpec::Synthetic {
            n,
            d: 1658,
            params: SyntheticParams::retail_like(),
            seed: 7,
        },
        miners: vec![
            VariantSpec::plain(MinerKind::FpMiner),
            variant("fpminer-no-iwc", MinerKind::FpMiner, json!({"iwc": false})),
            variant("fpminer-plain", MinerKind::FpMiner, off),
            VariantSpec::plain(MinerKind::Svsm),
        ],
        ks: vec![20],
        epsilons: vec![1.0, 4.0],
        trials,
        params: MinerParams {
            min_itemset_len: 2,
            ..MinerParams::retail()
        },
        output_dir,
        master_seed: 2024,
    };
    let out = run_experiment(&config)?;
    print!("{}", std::fs::read_to_string(&out.summary_csv)?);
    println!("results in {}", out.root.display());
    Ok(())
}

use std::fs;

use ldp_fpminer::dataset::{PlantedPattern, SyntheticParams};
use ldp_fpminer::harness::{
    read_trials, recompute_metrics, run_experiment, trial_seed, DatasetSpec, ExperimentConfig, VariantSpec,
    SUMMARY_COLUMNS,
};
use ldp_fpminer::miner::MinerKind;
use ldp_fpminer::params::MinerParams;

fn config(dir: &std::path::Path, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        dataset: DatasetSpec::Synthetic {
            n: 4_000,
            d: 30,
            params: SyntheticParams {
                mean_len: 4.0,
                patterns: vec![PlantedPattern { items: vec![2, 5], probability: 0.2 }],
                ..SyntheticParams::default()
            },
            seed: 3,
        },
        miners: vec![VariantSpec::plain(MinerKind::FpMiner), VariantSpec::plain(MinerKind::Svsm)],
        ks: vec![5],
        epsilons: vec![2.0],
        trials,
        params: MinerParams::default(),
        output_dir: dir.to_path_buf(),
        master_seed: 11,
    }
}

#[test]
fn one_trial_per_miner_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(dir.path(), 1)).unwrap();
    assert_eq!(out.trials.len(), 2);
    assert!(out.trials.iter().all(|t| t.ledger.reporting + t.ledger.idle == 4_000 && t.ledger.repeated == 0));
    assert_eq!(fs::read_dir(dir.path().join("trials")).unwrap().count(), 2);
    assert_eq!(fs::read_dir(dir.path().join("ground_truth")).unwrap().count(), 1);
    let csv = fs::read_to_string(&out.summary_csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("fpminer,5,2,") && rows[0].ends_with(",1"));
    assert!(rows[1].starts_with("svsm,5,2,"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out_a = run_experiment(&config(a.path(), 3)).unwrap();
    let out_b = run_experiment(&config(b.path(), 3)).unwrap();
    assert_eq!(fs::read(&out_a.summary_csv).unwrap(), fs::read(&out_b.summary_csv).unwrap());
    for t in &out_a.trials {
        let name = t.file_name();
        assert_eq!(
            fs::read(a.path().join("trials").join(&name)).unwrap(),
            fs::read(b.path().join("trials").join(&name)).unwrap()
        );
    }
}

#[test]
fn stored_trials_reload_and_rescore_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 2);
    let out = run_experiment(&cfg).unwrap();
    let mut stored = read_trials(dir.path()).unwrap();
    let mut original = out.trials.clone();
    let key = |t: &ldp_fpminer::harness::TrialResult| (t.miner.clone(), t.trial);
    stored.sort_by_key(key);
    original.sort_by_key(key);
    for (s, o) in stored.iter().zip(&original) {
        assert_eq!((s.ncr, s.var, &s.itemsets, s.seed), (o.ncr, o.var, &o.itemsets, o.seed));
    }
    let db = ldp_fpminer::harness::load_dataset(&cfg.dataset).unwrap();
    let rescored = recompute_metrics(dir.path(), &db).unwrap();
    assert_eq!(rescored.len(), 4);
    for r in &rescored {
        let s = stored.iter().find(|s| key(s) == key(r)).unwrap();
        assert_eq!((r.ncr, r.var), (s.ncr, s.var));
    }
}

#[test]
fn trial_seeds_depend_on_every_coordinate() {
    let base = trial_seed(1, MinerKind::FpMiner, 20, 1.0, 0);
    assert_eq!(base, trial_seed(1, MinerKind::FpMiner, 20, 1.0, 0));
    for other in [
        trial_seed(2, MinerKind::FpMiner, 20, 1.0, 0),
        trial_seed(1, MinerKind::Svsm, 20, 1.0, 0),
        trial_seed(1, MinerKind::FpMiner, 21, 1.0, 0),
        trial_seed(1, MinerKind::FpMiner, 20, 2.0, 0),
        trial_seed(1, MinerKind::FpMiner, 20, 1.0, 1),
    ] {
        assert_ne!(base, other);
    }
}

#[test]
fn missing_dataset_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 1);
    cfg.dataset = DatasetSpec::File { path: dir.path().join("absent.txt") };
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if let DatasetSpec::Synthetic { params, .. } = &cfg.dataset {
            assert_eq!(params, &SyntheticParams::retail_like(), "{}", path.display());
        }
    }
}

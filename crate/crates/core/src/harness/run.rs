use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{generate_synthetic, TransactionDb};
use crate::encoding::derive_seed;
use crate::error::{Error, Result};
use crate::exact_miner::exact_top_k;
use crate::itemset::RankedItemsets;
use crate::ledger::LedgerSummary;
use crate::metrics::{evaluate, MetricReport};
use crate::miner::{run_miner, MinerKind, MinerStats};

use super::config::{DatasetSpec, ExperimentConfig};
use super::report::{aggregate, write_summary_csv};

/// The persisted outcome of one trial. Wall time is kept out of the
/// serialized form so that reruns produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub miner: String,
    pub kind: MinerKind,
    pub k: usize,
    pub epsilon: f64,
    pub trial: usize,
    pub seed: u64,
    pub dataset_digest: String,
    pub min_itemset_len: usize,
    pub ncr: f64,
    pub var: f64,
    pub intersection_size: usize,
    pub stats: MinerStats,
    pub ledger: LedgerSummary,
    pub itemsets: RankedItemsets,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl TrialResult {
    pub fn file_name(&self) -> String {
        format!("{}_k{}_eps{}_t{}.json", self.miner, self.k, self.epsilon, self.trial)
    }

    fn apply(&mut self, m: MetricReport) {
        self.ncr = m.ncr;
        self.var = m.var;
        self.intersection_size = m.intersection_size;
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub root: PathBuf,
    pub trials: Vec<TrialResult>,
    pub summary_csv: PathBuf,
}

/// Per-trial seed: a stable hash of the master seed, miner kind, `k`, the
/// bit pattern of `epsilon` and the trial index. Variants of the same miner
/// kind share seeds, so they see the same user groups and noise streams.
pub fn trial_seed(master: u64, kind: MinerKind, k: usize, epsilon: f64, trial: usize) -> u64 {
    derive_seed(
        master,
        &[
            kind.name().as_bytes(),
            &(k as u64).to_le_bytes(),
            &epsilon.to_bits().to_le_bytes(),
            &(trial as u64).to_le_bytes(),
        ],
    )
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<TransactionDb> {
    match spec {
        DatasetSpec::File { path } => TransactionDb::load(path),
        DatasetSpec::Synthetic { n, d, params, seed } => generate_synthetic(*n, *d, params, *seed),
    }
}

#[derive(Serialize, Deserialize)]
struct GroundTruthFile {
    dataset_digest: String,
    k: usize,
    min_itemset_len: usize,
    itemsets: RankedItemsets,
}

/// Exact top-`k` itemsets of at least `min_len` items, cached under
/// `cache_dir` keyed by dataset digest, `k` and `min_len`.
pub fn ground_truth(db: &TransactionDb, k: usize, min_len: usize, cache_dir: &Path) -> Result<RankedItemsets> {
    let digest = db.digest();
    let name = match min_len {
        1 => format!("{digest}_k{k}.json"),
        m => format!("{digest}_k{k}_min{m}.json"),
    };
    let path = cache_dir.join(name);
    if let Ok(text) = fs::read_to_string(&path) {
        let cached: GroundTruthFile = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
        if cached.dataset_digest == digest && cached.k == k && cached.min_itemset_len == min_len {
            return Ok(cached.itemsets);
        }
    }
    let itemsets = exact_top_k(db, k, min_len..)?;
    fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
    let file = GroundTruthFile {
        dataset_digest: digest,
        k,
        min_itemset_len: min_len,
        itemsets: itemsets.clone(),
    };
    write_json(&path, &file)?;
    Ok(itemsets)
}

/// One line per itemset: space-separated items, then `#SUP: count`.
pub fn write_ground_truth_lines(itemsets: &RankedItemsets, mut out: impl Write) -> std::io::Result<()> {
    for (x, f) in itemsets.entries() {
        let items: Vec<String> = x.items().iter().map(u32::to_string).collect();
        writeln!(out, "{} #SUP: {}", items.join(" "), f)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

struct Job<'a> {
    label: &'a str,
    kind: MinerKind,
    params: crate::params::MinerParams,
    k: usize,
    epsilon: f64,
    trial: usize,
}

/// Runs every (miner, k, epsilon, trial) combination, writing per-trial JSON,
/// a timing table and the aggregate CSV under the output root.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let db = load_dataset(&config.dataset)?;
    let digest = db.digest();
    let root = config.output_root();
    let trial_dir = root.join("trials");
    fs::create_dir_all(&trial_dir).map_err(|e| Error::io(&trial_dir, e))?;
    write_json(&root.join("config.json"), config)?;

    let mut jobs = Vec::new();
    for variant in &config.miners {
        let params = variant.resolve(&config.params)?;
        for &k in &config.ks {
            for &epsilon in &config.epsilons {
                for trial in 0..config.trials {
                    jobs.push(Job {
                        label: &variant.label,
                        kind: variant.miner,
                        params: params.clone(),
                        k,
                        epsilon,
                        trial,
                    });
                }
            }
        }
    }

    let mut truths: HashMap<(usize, usize), RankedItemsets> = HashMap::new();
    for job in &jobs {
        let key = (job.k, job.params.min_itemset_len);
        if let Entry::Vacant(slot) = truths.entry(key) {
            slot.insert(ground_truth(&db, key.0, key.1, &root.join("ground_truth"))?);
        }
    }

    let trials = jobs
        .par_iter()
        .map(|job| {
            let truth = &truths[&(job.k, job.params.min_itemset_len)];
            let seed = trial_seed(config.master_seed, job.kind, job.k, job.epsilon, job.trial);
            let start = Instant::now();
            let output = run_miner(job.kind, &db, job.k, job.epsilon, &job.params, seed)?;
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            if !output.ledger.is_single_use() || output.ledger.reporting + output.ledger.idle != db.n() {
                return Err(Error::invalid(format!(
                    "report accounting failed for {} trial {}: {:?}",
                    job.label, job.trial, output.ledger
                )));
            }
            let metrics = evaluate(truth, &output.itemsets)?;
            let mut result = TrialResult {
                miner: job.label.to_string(),
                kind: job.kind,
                k: job.k,
                epsilon: job.epsilon,
                trial: job.trial,
                seed,
                dataset_digest: digest.clone(),
                min_itemset_len: job.params.min_itemset_len,
                ncr: 0.0,
                var: 0.0,
                intersection_size: 0,
                stats: output.stats,
                ledger: output.ledger,
                itemsets: output.itemsets,
                wall_time_ms,
            };
            result.apply(metrics);
            write_json(&trial_dir.join(result.file_name()), &result)?;
            log::info!(
                "{} k={} eps={} trial={} ncr={:.3} var={:.3e}",
                result.miner,
                result.k,
                result.epsilon,
                result.trial,
                result.ncr,
                result.var
            );
            Ok(result)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut timings = csv::Writer::from_path(root.join("timings.csv"))?;
    timings.write_record(["miner", "k", "epsilon", "trial", "wall_time_ms"])?;
    for t in &trials {
        timings.write_record([
            t.miner.clone(),
            t.k.to_string(),
            t.epsilon.to_string(),
            t.trial.to_string(),
            format!("{:.3}", t.wall_time_ms),
        ])?;
    }
    timings.flush().map_err(|e| Error::io(root.join("timings.csv"), e))?;

    let summary_csv = root.join("summary.csv");
    write_summary_csv(&aggregate(&trials), &summary_csv)?;
    Ok(ExperimentOutput {
        root,
        trials,
        summary_csv,
    })
}

/// Recomputes NCR and Var of stored trials against ground truth for
/// `db`, rewriting each trial file. Returns the updated trials.
pub fn recompute_metrics(results_dir: &Path, db: &TransactionDb) -> Result<Vec<TrialResult>> {
    let digest = db.digest();
    let mut trials = super::report::read_trials(results_dir)?;
    for t in &mut trials {
        if t.dataset_digest != digest {
            return Err(Error::invalid(format!(
                "trial {} was run on dataset {}, not {}",
                t.file_name(),
                t.dataset_digest,
                digest
            )));
        }
        let truth = ground_truth(db, t.k, t.min_itemset_len, &results_dir.join("ground_truth"))?;
        t.apply(evaluate(&truth, &t.itemsets)?);
        write_json(&results_dir.join("trials").join(t.file_name()), t)?;
    }
    Ok(trials)
}


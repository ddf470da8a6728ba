use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::run::TrialResult;

/// Column order of the aggregate CSV.
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "miner", "k", "epsilon", "mean_ncr", "std_ncr", "mean_var", "std_var", "trials",
];

/// Mean and sample standard deviation of NCR and Var for one
/// (miner, k, epsilon) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub miner: String,
    pub k: usize,
    pub epsilon: f64,
    pub mean_ncr: f64,
    pub std_ncr: f64,
    pub mean_var: f64,
    pub std_var: f64,
    pub trials: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Groups trials by (miner, k, epsilon), sorted by miner label, k, then
/// epsilon. Within a group, trials are summed in trial-index order.
pub fn aggregate(trials: &[TrialResult]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&TrialResult> = trials.iter().collect();
    sorted.sort_by(|a, b| {
        a.miner
            .cmp(&b.miner)
            .then(a.k.cmp(&b.k))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.trial.cmp(&b.trial))
    });
    let mut rows = Vec::new();
    for group in sorted.chunk_by(|a, b| a.miner == b.miner && a.k == b.k && a.epsilon == b.epsilon) {
        let ncr: Vec<f64> = group.iter().map(|t| t.ncr).collect();
        let var: Vec<f64> = group.iter().map(|t| t.var).collect();
        let (mean_ncr, std_ncr) = mean_std(&ncr);
        let (mean_var, std_var) = mean_std(&var);
        rows.push(SummaryRow {
            miner: group[0].miner.clone(),
            k: group[0].k,
            epsilon: group[0].epsilon,
            mean_ncr,
            std_ncr,
            mean_var,
            std_var,
            trials: group.len(),
        });
    }
    rows
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.miner.clone(),
            r.k.to_string(),
            r.epsilon.to_string(),
            r.mean_ncr.to_string(),
            r.std_ncr.to_string(),
            r.mean_var.to_string(),
            r.std_var.to_string(),
            r.trials.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads every trial JSON under `<results_dir>/trials`, in file-name order.
pub fn read_trials(results_dir: &Path) -> Result<Vec<TrialResult>> {
    let dir = results_dir.join("trials");
    let mut paths: Vec<_> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Empty("no trial results found"));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::json(p, e))
        })
        .collect()
}

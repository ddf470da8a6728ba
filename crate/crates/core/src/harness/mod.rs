//! Declarative experiments: configuration, seeded multi-trial runs against
//! cached exact ground truth, and CSV summaries.

mod config;
mod report;
mod run;

pub use config::{DatasetSpec, ExperimentConfig, VariantSpec, OUTPUT_ENV};
pub use report::{aggregate, read_trials, write_summary_csv, SummaryRow, SUMMARY_COLUMNS};
pub use run::{
    ground_truth, load_dataset, recompute_metrics, run_experiment, trial_seed, write_ground_truth_lines,
    ExperimentOutput, TrialResult,
};

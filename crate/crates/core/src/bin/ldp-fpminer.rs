use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ldp_fpminer::dataset::{generate_synthetic, SyntheticParams, TransactionDb};
use ldp_fpminer::exact_miner::exact_top_k;
use ldp_fpminer::harness::{
    aggregate, read_trials, recompute_metrics, run_experiment, write_ground_truth_lines, write_summary_csv,
    ExperimentConfig,
};
use ldp_fpminer::Error;

#[derive(Parser)]
#[command(name = "ldp-fpminer", version, about = "Frequent itemset mining under local differential privacy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic transaction file in SPMF format.
    GenData {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator parameters as JSON; defaults to plain Zipf baskets.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Use the built-in retail-style generator parameters.
        #[arg(long, conflicts_with = "params")]
        retail: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the exact top-k itemsets of a transaction file.
    GroundTruth {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        k: usize,
        /// Shortest itemset length to report.
        #[arg(long, default_value_t = 1)]
        min_len: usize,
        #[arg(long)]
        max_len: Option<usize>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute NCR and Var of stored trials against a dataset.
    Metrics {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Aggregate stored trials into the summary CSV.
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Defaults to `<results>/summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::GenData { n, d, seed, params, retail, out } => {
            let params = match params {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
                    serde_json::from_str(&text).map_err(|e| Error::Json { path, source: e })?
                }
                None if retail => SyntheticParams::retail_like(),
                None => SyntheticParams::default(),
            };
            let db = generate_synthetic(n, d, &params, seed)?;
            db.write(&out)?;
            println!("wrote {} transactions to {} (digest {})", db.n(), out.display(), db.digest());
        }
        Command::GroundTruth { data, k, min_len, max_len, out } => {
            let db = TransactionDb::load(&data)?;
            let top = exact_top_k(&db, k, min_len..=max_len.unwrap_or(usize::MAX))?;
            match out {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| io_error(&path, e))?;
                    let mut w = BufWriter::new(file);
                    write_ground_truth_lines(&top, &mut w)
                        .and_then(|()| w.flush())
                        .map_err(|e| io_error(&path, e))?;
                }
                None => write_ground_truth_lines(&top, io::stdout().lock()).map_err(|e| io_error("<stdout>", e))?,
            }
        }
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let output = run_experiment(&config)?;
            println!(
                "{} trials written to {}; summary at {}",
                output.trials.len(),
                output.root.display(),
                output.summary_csv.display()
            );
        }
        Command::Metrics { results, data } => {
            let db = TransactionDb::load(&data)?;
            let trials = recompute_metrics(&results, &db)?;
            let mut out = io::stdout().lock();
            for t in &trials {
                let line = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", t.miner, t.k, t.epsilon, t.trial, t.ncr, t.var);
                if line.is_err() {
                    break;
                }
            }
        }
        Command::Report { results, out } => {
            let rows = aggregate(&read_trials(&results)?);
            let out = out.unwrap_or_else(|| results.join("summary.csv"));
            write_summary_csv(&rows, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn io_error(path: impl Into<PathBuf>, source: io::Error) -> Error {
    Error::Io { path: path.into(), source }
}

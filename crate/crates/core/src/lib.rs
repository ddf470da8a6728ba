//! Frequent itemset mining under local differential privacy.
//!
//! Users each hold a transaction (a set of items) and send a single randomized
//! report. The analyst reconstructs a noisy FP-tree level by level and mines
//! the top-k itemsets from it. A single-pass baseline miner, exact mining and
//! evaluation metrics are included for comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod encoding;
pub mod error;
pub mod exact_miner;
pub mod harness;
pub mod itemset;
pub mod ledger;
pub mod metrics;
pub mod miner;
pub mod noisy_tree;
pub mod oracle;
pub mod params;
pub mod postprocess;
pub mod svim;
pub mod svsm;

pub use error::{Error, Result};

//! Tuning parameters shared by both mining pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the three reporting groups are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    /// Disjoint random groups; each user reports once. Required for privacy.
    #[default]
    Disjoint,
    /// Every stage sees every user. Only meaningful with a non-private oracle,
    /// where it removes sampling error.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinerParams {
    /// Each tree level keeps at most `floor(xi * k)` candidate prefixes.
    pub xi: f64,
    pub cutdown: bool,
    /// Percentile of pruned transaction lengths used as the tree height.
    pub height_percentile: f64,
    /// Percentile of pruned lengths used as the padding length when
    /// estimating item (and, in the baseline, itemset) frequencies.
    pub length_percentile: f64,
    /// Fractions of users assigned to item discovery, length estimation and
    /// tree queries.
    pub group_fractions: [f64; 3],
    /// Split of the item-discovery group across its three steps.
    pub item_step_fractions: [f64; 3],
    pub pwc: bool,
    pub cci: bool,
    pub npb: bool,
    pub iwc: bool,
    /// Weight of queried prefix counts against guessed ones.
    pub omega_prefix: f64,
    /// Weight of mined itemset counts against guessed ones.
    pub omega_itemset: f64,
    /// Constrained inference only runs where the child/parent guess ratio
    /// reaches this threshold.
    pub theta0: f64,
    pub cci_repetitions: usize,
    /// Per-item damping of guessing frequencies.
    pub gamma: f64,
    /// The itemset re-ranking considers this many times `k` mined itemsets.
    pub iwc_pool_factor: usize,
    pub allocation: Allocation,
    /// Shortest itemset either miner reports. Set to 2 to leave out single
    /// items, which both miners learn the same way.
    pub min_itemset_len: usize,
}

impl Default for MinerParams {
    fn default() -> Self {
        MinerParams {
            xi: 3.0,
            cutdown: true,
            height_percentile: 0.8,
            length_percentile: 0.9,
            group_fractions: [0.5, 0.1, 0.4],
            item_step_fractions: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            pwc: true,
            cci: true,
            npb: true,
            iwc: true,
            omega_prefix: 0.9,
            omega_itemset: 0.7,
            theta0: 0.3,
            cci_repetitions: 5,
            gamma: 0.8,
            iwc_pool_factor: 2,
            allocation: Allocation::Disjoint,
            min_itemset_len: 1,
        }
    }
}

impl MinerParams {
    /// Weights tuned for point-of-sale style data with many short baskets.
    pub fn retail() -> Self {
        MinerParams {
            omega_prefix: 0.7,
            omega_itemset: 0.5,
            ..Self::default()
        }
    }

    /// All four optimizations switched off.
    pub fn unoptimized(self) -> Self {
        MinerParams {
            pwc: false,
            cci: false,
            npb: false,
            iwc: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        if self.min_itemset_len == 0 {
            return Err(Error::invalid("min_itemset_len must be at least 1"));
        }
        if !(self.xi >= 1.0) {
            return Err(Error::invalid(format!("xi must be at least 1, got {}", self.xi)));
        }
        open_unit("height_percentile", self.height_percentile)?;
        open_unit("length_percentile", self.length_percentile)?;
        open_unit("theta0", self.theta0)?;
        unit("omega_prefix", self.omega_prefix)?;
        unit("omega_itemset", self.omega_itemset)?;
        unit("gamma", self.gamma)?;
        for (name, fractions) in [
            ("group_fractions", &self.group_fractions),
            ("item_step_fractions", &self.item_step_fractions),
        ] {
            let sum: f64 = fractions.iter().sum();
            if fractions.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "{name} must be non-negative and sum to 1, got {fractions:?}"
                )));
            }
        }
        if self.cci_repetitions == 0 {
            return Err(Error::invalid("cci_repetitions must be at least 1"));
        }
        if self.iwc_pool_factor == 0 {
            return Err(Error::invalid("iwc_pool_factor must be at least 1"));
        }
        Ok(())
    }

    /// Candidate prefixes kept per level.
    pub fn level_width(&self, k: usize) -> usize {
        ((self.xi * k as f64).floor() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        MinerParams::default().validate().unwrap();
        MinerParams::retail().validate().unwrap();
        assert_eq!(MinerParams::default().level_width(20), 60);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let bad = [
            MinerParams { xi: 0.5, ..Default::default() },
            MinerParams { omega_prefix: 1.5, ..Default::default() },
            MinerParams { theta0: 0.0, ..Default::default() },
            MinerParams { group_fractions: [0.5, 0.5, 0.5], ..Default::default() },
            MinerParams { cci_repetitions: 0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn json_fills_missing_fields() {
        let p: MinerParams = serde_json::from_str(r#"{"xi": 2.0, "allocation": "shared"}"#).unwrap();
        assert_eq!(p.xi, 2.0);
        assert_eq!(p.allocation, Allocation::Shared);
        assert_eq!(p.theta0, 0.3);
        assert!(serde_json::from_str::<MinerParams>(r#"{"zeta": 1}"#).is_err());
    }
}

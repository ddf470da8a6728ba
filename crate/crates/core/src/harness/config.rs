use std::fs;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::dataset::SyntheticParams;
use crate::error::{Error, Result};
use crate::miner::MinerKind;
use crate::params::MinerParams;

/// Environment variable that, when set, replaces the configured output
/// directory.
pub const OUTPUT_ENV: &str = "LDP_FPMINER_OUTPUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    /// An SPMF-format transaction file.
    File { path: PathBuf },
    Synthetic {
        n: usize,
        d: usize,
        #[serde(default)]
        params: SyntheticParams,
        #[serde(default)]
        seed: u64,
    },
}

/// One miner configuration in an experiment. In JSON either a bare miner
/// name (`"fpminer"`) or an object with a label and parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSpec {
    pub label: String,
    pub miner: MinerKind,
    /// Fields merged over the experiment's base parameters.
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl VariantSpec {
    pub fn plain(miner: MinerKind) -> Self {
        VariantSpec {
            label: miner.name().to_string(),
            miner,
            params: serde_json::Map::new(),
        }
    }

    /// The base parameters with this variant's overrides applied.
    pub fn resolve(&self, base: &MinerParams) -> Result<MinerParams> {
        let mut value = serde_json::to_value(base).expect("parameters serialize");
        let object = value.as_object_mut().expect("parameters are an object");
        for (key, v) in &self.params {
            object.insert(key.clone(), v.clone());
        }
        let params: MinerParams = serde_json::from_value(value)
            .map_err(|e| Error::invalid(format!("variant {}: {e}", self.label)))?;
        params.validate()?;
        Ok(params)
    }
}

impl<'de> Deserialize<'de> for VariantSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(MinerKind),
            Full {
                #[serde(default)]
                label: Option<String>,
                miner: MinerKind,
                #[serde(default)]
                params: serde_json::Map<String, serde_json::Value>,
            },
        }
        match Raw::deserialize(deserializer) {
            Ok(Raw::Name(miner)) => Ok(VariantSpec::plain(miner)),
            Ok(Raw::Full { label, miner, params }) => Ok(VariantSpec {
                label: label.unwrap_or_else(|| miner.name().to_string()),
                miner,
                params,
            }),
            Err(_) => Err(D::Error::custom(
                "expected a miner name or an object with `miner`, optional `label` and `params`",
            )),
        }
    }
}

fn both_miners() -> Vec<VariantSpec> {
    vec![VariantSpec::plain(MinerKind::FpMiner), VariantSpec::plain(MinerKind::Svsm)]
}

fn twenty() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "both_miners")]
    pub miners: Vec<VariantSpec>,
    pub ks: Vec<usize>,
    pub epsilons: Vec<f64>,
    #[serde(default = "twenty")]
    pub trials: usize,
    #[serde(default)]
    pub params: MinerParams,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::invalid("ks must be a non-empty list of positive integers"));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::invalid("epsilons must be a non-empty list of positive numbers"));
        }
        if self.miners.is_empty() {
            return Err(Error::invalid("at least one miner is required"));
        }
        let mut labels: Vec<&str> = self.miners.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("miner labels must be distinct"));
        }
        for variant in &self.miners {
            variant.resolve(&self.params)?;
        }
        Ok(())
    }

    /// The output directory, unless overridden by [`OUTPUT_ENV`].
    pub fn output_root(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

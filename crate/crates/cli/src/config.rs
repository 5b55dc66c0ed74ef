//! Config file sections, flag overrides, and the canonical config digest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use semev_core::ContestParams;
use semev_pipeline::{PipelineConfig, SynthConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContestSection {
    #[serde(alias = "V")]
    pub v: f64,
    #[serde(alias = "Psi")]
    pub psi: f64,
    pub r: f64,
    #[serde(alias = "C_I")]
    pub c_i: f64,
    #[serde(alias = "C_B")]
    pub c_b: f64,
}

impl Default for ContestSection {
    fn default() -> Self {
        ContestSection { v: 1.0, psi: 2.0, r: 1.0, c_i: 0.0, c_b: 0.0 }
    }
}

impl ContestSection {
    pub fn params(&self) -> CliResult<ContestParams> {
        Ok(ContestParams::new(self.v, self.psi, self.r, self.c_i, self.c_b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Axis {
    PrizeRatio,
    R,
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub log: bool,
    /// Proposer share used for the cost columns when the axis is not alpha.
    pub alpha: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { axis: Axis::PrizeRatio, from: 2.0, to: 1000.0, steps: 50, log: true, alpha: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SimMode {
    /// Independent one-shot contests.
    Race,
    /// Repeated contests under an issuer proposer share.
    Repeated,
    /// Simultaneous grid best-response dynamics.
    Adaptive,
    /// Noisy priority-auction micro model.
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub mode: SimMode,
    pub trials: u64,
    pub regime: String,
    pub strategy_i: String,
    pub strategy_b: String,
    /// Issuer proposer share; setting it selects repeated mode.
    pub alpha: Option<f64>,
    pub rounds: usize,
    /// Upper end of the best-response grid; defaults to twice the larger equilibrium bid.
    pub grid_hi: Option<f64>,
    pub grid_steps: usize,
    pub start: Option<[f64; 2]>,
    pub noise: f64,
    pub bid_ratios: Option<Vec<f64>>,
    pub trials_csv: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            mode: SimMode::Race,
            trials: 100_000,
            regime: "public-public".into(),
            strategy_i: "equilibrium".into(),
            strategy_b: "equilibrium".into(),
            alpha: None,
            rounds: 200,
            grid_hi: None,
            grid_steps: 40_000,
            start: None,
            noise: 0.5,
            bid_ratios: None,
            trials_csv: false,
        }
    }
}

/// Whole config document; every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub contest: ContestSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
    pub pipeline: PipelineConfig,
    pub synth: SynthConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

/// Sorted keys, integral floats written as integers, no whitespace.
pub fn canonical_json(value: &Value) -> String {
    fn normalize(v: &Value) -> Value {
        match v {
            Value::Number(n) => match n.as_f64() {
                Some(f) if n.is_f64() && f.fract() == 0.0 && f.abs() < 9.007_199_254_740_992e15 => {
                    Value::from(f as i64)
                }
                _ => v.clone(),
            },
            Value::Array(a) => Value::Array(a.iter().map(normalize).collect()),
            Value::Object(o) => {
                let mut sorted: Vec<(&String, &Value)> = o.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(b.0));
                Value::Object(sorted.into_iter().map(|(k, v)| (k.clone(), normalize(v))).collect())
            }
            _ => v.clone(),
        }
    }
    normalize(value).to_string()
}

pub fn config_hash<T: Serialize>(config: &T) -> CliResult<String> {
    let value = serde_json::to_value(config).map_err(|e| CliError::Internal(e.into()))?;
    Ok(hex::encode(Sha256::digest(canonical_json(&value).as_bytes())))
}

//! Event-log rows and their file formats.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferEvent {
    pub token: String,
    pub tx_id: String,
    pub block_time: i64,
    pub from_addr: String,
    pub to_addr: String,
    pub amount: Amount,
    pub reverted: bool,
}

impl TransferEvent {
    pub fn validate(&self) -> Result<(), String> {
        if self.amount.is_negative() {
            return Err(format!("negative amount {}", self.amount));
        }
        if self.block_time <= 0 {
            return Err(format!("block_time must be positive, got {}", self.block_time));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SanctionKind {
    Blacklist,
    Unblacklist,
    DestroyFunds,
    Reissue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SanctionEvent {
    pub token: String,
    pub address: String,
    pub kind: SanctionKind,
    #[serde(default)]
    pub t_submit: Option<i64>,
    pub t_exec: i64,
}

impl SanctionEvent {
    pub fn validate(&self) -> Result<(), String> {
        match self.t_submit {
            Some(t) if t > self.t_exec => Err(format!("t_submit {t} after t_exec {}", self.t_exec)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelCategory {
    Intermediary,
    ExchangeDepositCluster,
    MixerCore,
    Other,
    Unknown,
}

impl LabelCategory {
    /// Shared infrastructure that the adversarial filter drops.
    pub fn is_infrastructure(self) -> bool {
        matches!(
            self,
            LabelCategory::Intermediary | LabelCategory::ExchangeDepositCluster | LabelCategory::MixerCore
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddressLabel {
    pub address: String,
    pub category: LabelCategory,
}

fn read_jsonl<T>(path: &Path, check: impl Fn(&T) -> Result<(), String>) -> Result<Vec<T>, PipelineError>
where
    T: for<'de> Deserialize<'de>,
{
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| PipelineError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let row: T = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        check(&row).map_err(parse_err)?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_transfers(path: &Path) -> Result<Vec<TransferEvent>, PipelineError> {
    read_jsonl(path, TransferEvent::validate)
}

pub fn read_sanctions(path: &Path) -> Result<Vec<SanctionEvent>, PipelineError> {
    read_jsonl(path, SanctionEvent::validate)
}

/// Reads `address,category`; an address may appear only once.
pub fn read_labels(path: &Path) -> Result<Vec<AddressLabel>, PipelineError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| PipelineError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    let mut seen = std::collections::HashSet::new();
    let mut labels = Vec::new();
    for rec in reader.deserialize::<AddressLabel>() {
        let line = |e: &csv::Error| e.position().map_or(0, |p| p.line() as usize);
        let label = rec.map_err(|e| PipelineError::Parse {
            path: path.to_path_buf(),
            line: line(&e),
            message: e.to_string(),
        })?;
        if !seen.insert(label.address.clone()) {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: labels.len() + 2,
                message: format!("duplicate label for {}", label.address),
            });
        }
        labels.push(label);
    }
    Ok(labels)
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut buf, row).map_err(|e| PipelineError::Serialize(e.to_string()))?;
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn labels_to_csv(labels: &[AddressLabel]) -> Result<Vec<u8>, PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for l in labels {
        w.serialize(l).map_err(|e| PipelineError::Serialize(e.to_string()))?;
    }
    w.flush().map_err(|e| PipelineError::Serialize(e.to_string()))?;
    w.into_inner().map_err(|e| PipelineError::Serialize(e.to_string()))
}

pub mod pipeline;
pub mod simulate;
pub mod solve;
pub mod sweep;
pub mod synth;

use serde::Serialize;
use serde_json::Value;

use crate::config::{ContestSection, FileConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, Sink};
use crate::{ContestArgs, Format};

/// Everything a command needs, after config and flags are merged.
pub struct Ctx {
    pub config: FileConfig,
    pub seed: u64,
    pub format: Option<Format>,
    pub sink: Sink,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// The effective settings, hashed into the manifest.
    pub effective: Value,
    pub counts: Option<Value>,
    /// Seed actually used, recorded in the manifest.
    pub seed: u64,
}

pub(crate) fn merge_contest(base: &ContestSection, args: &ContestArgs) -> ContestSection {
    ContestSection {
        v: args.v.unwrap_or(base.v),
        psi: args.psi.unwrap_or(base.psi),
        r: args.r.unwrap_or(base.r),
        c_i: args.c_i.unwrap_or(base.c_i),
        c_b: args.c_b.unwrap_or(base.c_b),
    }
}

pub(crate) fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Internal(e.into()))
}

pub(crate) fn json_bytes<T: Serialize>(x: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(x).map_err(|e| CliError::Internal(e.into()))?;
    v.push(b'\n');
    Ok(v)
}

pub(crate) fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Internal(e.into()))?;
    }
    w.into_inner().map_err(|e| CliError::Internal(anyhow::anyhow!("{e}")))
}

/// One-row CSV from a JSON object; nested values are written as JSON text.
pub(crate) fn object_csv(value: &Value) -> CliResult<Vec<u8>> {
    let Value::Object(map) = value else {
        return Err(CliError::Internal(anyhow::anyhow!("expected a JSON object")));
    };
    let cell = |v: &Value| match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.into());
    w.write_record(map.keys()).map_err(err)?;
    w.write_record(map.values().map(cell)).map_err(err)?;
    w.into_inner().map_err(|e| CliError::Internal(anyhow::anyhow!("{e}")))
}

//! Where results go: stdout, or files in an output directory with a manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// File name inside the output directory, or `-` for stdout.
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub started: u64,
    pub finished: u64,
    pub artifacts: Vec<Artifact>,
    /// Command-specific counts, e.g. the pipeline filter funnel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<serde_json::Value>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let unwritable = |e: std::io::Error| CliError::usage(format!("cannot write {}: {e}", path.display()));
    let mut builder = tempfile::Builder::new();
    // Temp files default to owner-only access; results are ordinary files.
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    let mut tmp = builder.tempfile_in(dir).map_err(unwritable)?;
    tmp.write_all(bytes).map_err(unwritable)?;
    tmp.as_file().sync_all().map_err(unwritable)?;
    tmp.persist(path).map_err(|e| unwritable(e.error))?;
    Ok(())
}

pub enum Sink {
    Stdout,
    Dir(PathBuf),
}

impl Sink {
    pub fn new(out: Option<&Path>) -> CliResult<Self> {
        match out {
            None => Ok(Sink::Stdout),
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
                Ok(Sink::Dir(dir.to_path_buf()))
            }
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        match self {
            Sink::Stdout => None,
            Sink::Dir(d) => Some(d),
        }
    }

    /// Emits one artifact; on stdout the name is ignored.
    pub fn emit(&self, name: &str, bytes: &[u8]) -> CliResult<Artifact> {
        let name = match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Internal(e.into()))?;
                "-".to_string()
            }
            Sink::Dir(d) => {
                write_atomic(&d.join(name), bytes)?;
                name.to_string()
            }
        };
        Ok(Artifact { name, bytes: bytes.len() as u64, sha256: sha256_hex(bytes) })
    }

    /// Manifest next to the artifacts, or on stderr in stdout mode.
    pub fn finish(&self, manifest: &RunManifest) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Internal(e.into()))?;
        bytes.push(b'\n');
        match self {
            Sink::Stdout => {
                std::io::stderr().write_all(&bytes).map_err(|e| CliError::Internal(e.into()))?;
                Ok(())
            }
            Sink::Dir(d) => write_atomic(&d.join(MANIFEST_FILE), &bytes),
        }
    }
}

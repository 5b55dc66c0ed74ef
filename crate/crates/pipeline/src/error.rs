use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unimodal gap distribution: no valley found, supply tau explicitly")]
    UnimodalGaps,

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("every EM restart collapsed for every k in {k_min}..={k_max}")]
    AllRestartsCollapsed { k_min: usize, k_max: usize },

    #[error("invalid boundaries: {0}")]
    Boundaries(String),

    #[error("seed mismatch: pipeline ran with {pipeline}, ground truth generated with {truth}")]
    SeedMismatch { pipeline: u64, truth: u64 },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}

use semev_core::ContestError;
use semev_pipeline::PipelineError;

/// Maps every failure onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or input files: exit 2.
    Usage(String),
    /// Parameters outside the model's domain: exit 2.
    Domain(String),
    /// Anything else: exit 1.
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Domain(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
            CliError::Internal(e) => write!(f, "internal error: {e:#}"),
        }
    }
}

impl From<ContestError> for CliError {
    fn from(e: ContestError) -> Self {
        if e.is_domain() {
            CliError::Domain(e.to_string())
        } else {
            CliError::Internal(e.into())
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Serialize(_) => CliError::Internal(e.into()),
            PipelineError::Io { .. } | PipelineError::Parse { .. } | PipelineError::Config(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

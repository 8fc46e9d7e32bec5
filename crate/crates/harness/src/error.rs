use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] fqf_core::Error),

    #[error("gradient check failed: {suite} max relative error {max_rel_error:e} >= {tolerance:e}")]
    GradcheckFailed { suite: &'static str, max_rel_error: f64, tolerance: f64 },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use fqf_core::Error as E;
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::GradcheckFailed { .. } => 2,
            Self::Core(e) => match e {
                E::IntegrationDiverged { .. } | E::NonFiniteLogits | E::Diverged { .. } | E::NonFiniteLoss { .. } => 2,
                _ => 1,
            },
        }
    }
}

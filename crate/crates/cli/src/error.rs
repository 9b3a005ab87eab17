use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("solver did not converge after {sweeps} sweeps (max update {max_update:.3e}); partial field written")]
    NotConverged { sweeps: usize, max_update: f64 },

    #[error("verification failed: {0} check(s)")]
    VerificationFailed(usize),

    #[error("missing artifact {}; run `{}` first", .path.display(), .producer)]
    MissingArtifact { path: PathBuf, producer: &'static str },

    #[error(transparent)]
    Core(#[from] signorini::Error),

    #[error("{}: {}", .path.display(), .source)]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 parse, 3 nonconvergence, 4 verification
    /// failure, 5 missing artifact, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Usage(_) => 2,
            Self::NotConverged { .. } => 3,
            Self::VerificationFailed(_) => 4,
            Self::MissingArtifact { .. } => 5,
            Self::Core(signorini::Error::NotConverged(_)) => 3,
            Self::Core(_) | Self::Io { .. } | Self::Json(_) => 1,
        }
    }
}

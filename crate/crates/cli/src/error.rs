use serde_json::json;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Compute(#[from] fading_ic::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        use fading_ic::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Failed(_) => "failed",
            CliError::Compute(e) => match e {
                E::Domain { .. } => "domain",
                E::Accuracy { .. } => "accuracy",
                E::Bracket { .. } => "bracket",
                E::Constraint(_) => "constraint",
                E::InvalidModel(_) => "invalid_model",
                E::MomentDivergence { .. } => "moment_divergence",
                E::NonConvergence { .. } => "non_convergence",
                E::HeavyTail(_) => "heavy_tail",
            },
        }
    }

    /// Argument-level library errors become usage errors.
    pub fn as_usage(self) -> Self {
        use fading_ic::Error as E;
        match self {
            CliError::Compute(e @ (E::Domain { .. } | E::Constraint(_) | E::InvalidModel(_))) => {
                CliError::Usage(e.to_string())
            }
            other => other,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

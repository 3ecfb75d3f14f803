use std::path::PathBuf;

use levsg_core::analytic::AnalyticError;
use levsg_core::closure::ClosureError;
use levsg_core::dynamics::DynamicsError;
use levsg_core::estimates::EstimateError;
use levsg_core::field::FieldError;
use levsg_core::ModelError;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid estimate input: {0}")]
    Estimate(#[from] EstimateError),
    #[error("field evaluation failed: {0}")]
    Field(#[from] FieldError),
    #[error("closed-form protocol failed: {0}")]
    Analytic(#[from] AnalyticError),
    #[error("integration failed: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("closure failed: {0}")]
    Closure(#[from] ClosureError),
}

impl CliError {
    /// 1 for bad input or IO, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Io { .. }
            | CliError::Csv { .. }
            | CliError::Model(_)
            | CliError::Estimate(_)
            | CliError::Dynamics(DynamicsError::Model(_) | DynamicsError::NonPositive(_))
            | CliError::Closure(
                ClosureError::Model(_)
                | ClosureError::InvalidSetting(_)
                | ClosureError::PlanTooShort(_),
            ) => 1,
            _ => 2,
        }
    }
}

use std::io;
use std::process::ExitCode;

use safeopt_core::gp::GpError;
use safeopt_core::network::NetworkError;
use safeopt_core::safe_bo::{CampaignError, PlantError};
use thiserror::Error;

/// Failure classes of one invocation. Each maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("plant error: {0}")]
    Plant(String),
    #[error("campaign error: {0}")]
    Campaign(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 2 is left to the argument parser for usage errors.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 3,
            CliError::Plant(_) => 4,
            CliError::Campaign(_) => 5,
            CliError::Output(_) => 6,
        })
    }
}

impl From<CampaignError> for CliError {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::Input(msg) => CliError::Config(msg),
            CampaignError::Plant(p) => CliError::Plant(p.to_string()),
            other => CliError::Campaign(other.to_string()),
        }
    }
}

impl From<PlantError> for CliError {
    fn from(e: PlantError) -> Self {
        CliError::Plant(e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<GpError> for CliError {
    fn from(e: GpError) -> Self {
        CliError::Config(e.to_string())
    }
}

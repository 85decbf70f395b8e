//! Error classification and exit codes.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 numerical failure,
//! 4 mathematical infeasibility (the request asks for an object that
//! provably does not exist).

use bdflow_core::integrator::IntegratorError;
use bdflow_core::lyapunov::LyapunovError;
use bdflow_core::objective::ObjectiveError;
use bdflow_core::quadform::QuadformError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<QuadformError> for CliError {
    fn from(e: QuadformError) -> Self {
        match e {
            QuadformError::BetaInvalid { .. } | QuadformError::UnsupportedOrder { .. } => {
                CliError::Config(e.to_string())
            }
            QuadformError::BetaInfeasible { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<IntegratorError> for CliError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::UnsupportedOrder { .. }
            | IntegratorError::InvalidConfig { .. }
            | IntegratorError::DimensionMismatch { .. }
            | IntegratorError::BranchIndex { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<LyapunovError> for CliError {
    fn from(e: LyapunovError) -> Self {
        match e {
            LyapunovError::EmptyRange { .. } => CliError::Infeasible(e.to_string()),
            LyapunovError::BetaOutOfRange { .. }
            | LyapunovError::WrongOrder { .. }
            | LyapunovError::DecompositionMismatch { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ObjectiveError> for CliError {
    fn from(e: ObjectiveError) -> Self {
        match e {
            ObjectiveError::ProxDiverged { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

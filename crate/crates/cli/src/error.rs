use std::path::Path;
use std::process::ExitCode;

use melnikov_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration that fails to parse or validate.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Numerical(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// 2 for anything traceable to the scenario itself, 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        let input = match self {
            CliError::Input(_) => true,
            CliError::Io { .. } => false,
            CliError::Numerical(e) => matches!(
                e,
                CoreError::InvalidGrid(_)
                    | CoreError::InvalidArgument(_)
                    | CoreError::LengthMismatch { .. }
                    | CoreError::PeriodMismatch { .. }
                    | CoreError::SourceNearBandEdge { .. }
                    | CoreError::NotInAnnihilationRegime { .. }
                    | CoreError::ContourTooSmall { .. }
                    | CoreError::NotKdVSymmetric
                    | CoreError::UnstableTimeStep { .. }
                    | CoreError::BoxTooSmall { .. }
                    | CoreError::PoleAtDivisor { .. }
                    | CoreError::NonConvergentDirection { .. }
            ),
        };
        ExitCode::from(if input { 2 } else { 1 })
    }
}

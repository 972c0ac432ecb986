use std::path::PathBuf;

use dampwave_core::exact::ExactError;
use dampwave_core::fv::FvError;
use dampwave_core::viscous::ViscousError;
use dampwave_core::ProblemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Viscous(#[from] ViscousError),
    #[error(transparent)]
    Fv(#[from] FvError),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 3 for solver failures, 4 for
    /// I/O and data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Validation(_) | HarnessError::Problem(_) => 2,
            HarnessError::Viscous(ViscousError::InvalidConfig(_)) => 2,
            HarnessError::Fv(FvError::InvalidGrid(_) | FvError::BadCfl(_) | FvError::DomainTooSmall { .. }) => 2,
            HarnessError::Exact(_) | HarnessError::Viscous(_) | HarnessError::Fv(_) => 3,
            HarnessError::Data(_) | HarnessError::Io { .. } => 4,
        }
    }
}

//! CLI error type carrying the process exit code.
//!
//! Exit codes: 0 ok, 1 usage, 2 validation failure, 3 precondition failure.

use crate::model_file::CheckItem;
use cmm_core::CmmError;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Populated when validation produced a check list worth printing.
    pub checks: Vec<CheckItem>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
            checks: Vec::new(),
        }
    }

    pub fn validation(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
            checks: Vec::new(),
        }
    }

    pub fn failed_validation(checks: Vec<CheckItem>) -> CliError {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (residual {:.3e})", c.invariant, c.residual))
            .collect();
        CliError {
            code: 2,
            message: format!("validation failed: {}", failed.join("; ")),
            checks,
        }
    }

    pub fn from_core(err: CmmError) -> CliError {
        let code = match &err {
            CmmError::Precondition(_) | CmmError::Conditioning { .. } => 3,
            CmmError::Lookup(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: err.to_string(),
            checks: Vec::new(),
        }
    }
}

impl From<CmmError> for CliError {
    fn from(err: CmmError) -> CliError {
        CliError::from_core(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::usage(format!("io error: {err}"))
    }
}

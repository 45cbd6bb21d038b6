use std::fmt;

use layeredbvp::Error;

pub const OK: u8 = 0;
pub const VERIFY_FAILED: u8 = 1;
pub const INVALID_CONFIG: u8 = 2;
pub const ASSUMPTION: u8 = 3;
pub const SOLVER: u8 = 4;

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: INVALID_CONFIG,
            message: msg.into(),
        }
    }

    pub fn io(what: &str, e: std::io::Error) -> Self {
        Self {
            code: SOLVER,
            message: format!("{what}: {e}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AssumptionViolated { .. } => ASSUMPTION,
            Error::InvalidProblem(_) | Error::Serialization(_) => INVALID_CONFIG,
            _ => SOLVER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

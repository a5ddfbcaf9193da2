use std::fmt::Display;

pub const SUCCESS: u8 = 0;
pub const ABORT: u8 = 2;
pub const CONFIG_ERROR: u8 = 3;
pub const VERIFY_FAILED: u8 = 4;

/// A command that could not produce its output.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Display) -> Self {
        Self {
            code: CONFIG_ERROR,
            message: message.to_string(),
        }
    }
}

/// Library errors reach the CLI only through user-supplied parameters,
/// files or limits, so all of them are configuration errors.
impl From<dpa_core::Error> for Failure {
    fn from(e: dpa_core::Error) -> Self {
        Self::config(e)
    }
}

pub type Outcome = Result<u8, Failure>;

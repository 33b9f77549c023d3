use std::fmt;
use std::path::Path;

use pqla::Error;

pub const CONFIG: u8 = 2;
pub const SIMULATION: u8 = 3;
pub const ESTIMATION: u8 = 4;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: CONFIG, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::config(format!("{}: {e}", path.display()))
    }

    /// Classifies by error kind: bad input is a config error, path
    /// blow-ups are simulation errors, degenerate fields are estimation
    /// errors.
    pub fn from_core(e: Error) -> Self {
        let code = match &e {
            Error::Explosion { .. } | Error::NonFinite { .. } | Error::Embedding { .. } => SIMULATION,
            Error::SingularDiffusion { .. }
            | Error::SingularInformation(_)
            | Error::OutsideDomain(_)
            | Error::DegenerateSample(_) => ESTIMATION,
            Error::InvalidGrid(_)
            | Error::InvalidModel(_)
            | Error::InvalidArgument(_)
            | Error::Format(_)
            | Error::Io(_)
            | Error::Json(_) => CONFIG,
        };
        Failure { code, message: e.to_string() }
    }

    /// Same message, forced code; used where the stage decides the class.
    pub fn at_stage(e: Error, code: u8) -> Self {
        let f = Failure::from_core(e);
        if f.code == CONFIG {
            f
        } else {
            Failure { code, ..f }
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
        Failure::from_core(e)
    }
}

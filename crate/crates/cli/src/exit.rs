use std::fmt;
use std::process::ExitCode;

use docpriv::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 2,
    Data = 3,
    VerificationFailed = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

/// An error with the exit status it should produce.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Usage,
            error: error.into(),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Data,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

/// Library errors caused by the invocation rather than the input files.
fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidEpsilon(_)
            | Error::ZeroLength
            | Error::ZeroTrials
            | Error::ZeroDimension
            | Error::NotOneDimensional(_)
            | Error::TooLarge { .. }
    )
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_usage(&e) {
            Failure::usage(e)
        } else {
            Failure::data(e)
        }
    }
}

pub type CliResult<T = Status> = Result<T, Failure>;

/// Attaches a message to a library error while keeping its exit status.
pub trait Context<T> {
    fn context_with(self, msg: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for docpriv::Result<T> {
    fn context_with(self, msg: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| {
            let mut f = Failure::from(e);
            f.error = f.error.context(msg());
            f
        })
    }
}

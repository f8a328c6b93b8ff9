//! Command implementations behind the `sortition-audit` binary.
//!
//! Each command is a pure function of its arguments plus the filesystem;
//! given the same flags and seed it writes byte-identical outputs. The only
//! timestamp lives in the run manifest written next to each output, and
//! output files reference their manifest by path (JSON field or a leading
//! `#` comment in CSV).

pub mod commands;
pub mod manifest;
pub mod opts;

use std::fmt;
use std::process::ExitCode;

/// Errors split by exit class: usage errors exit 2, everything else 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<sortition_audit::Error> for CliError {
    fn from(e: sortition_audit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn exit_code(result: CliResult<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

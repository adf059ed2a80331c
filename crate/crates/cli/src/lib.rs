//! Support library for the `boss` command-line tool: file formats
//! (graph edge lists, data CSV, shuffle maps, reports) and run manifests.
//!
//! Errors carry their exit class: usage problems (bad flags or requests
//! the configuration cannot satisfy) exit with code 1, data problems
//! (unreadable, malformed, or degenerate inputs) with code 2.

pub mod io;
pub mod manifest;

use std::fmt;

/// A command failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// The request itself is invalid (exit code 1).
    Usage(String),
    /// An input file or its contents are unusable (exit code 2).
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

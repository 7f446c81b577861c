//! Command implementations behind the `chiplace` binary.
//!
//! Everything the binary does is callable as a library function so tests
//! can drive commands without spawning processes; `main` only parses flags
//! and maps [`CliError`] to exit codes.

pub mod commands;
pub mod io;

/// Process exit codes, stable across releases.
pub mod exit_codes {
    pub const OK: i32 = 0;
    /// Malformed or invalid input files and flags.
    pub const INVALID_INPUT: i32 = 2;
    /// No legal compact placement exists within the stage-one schedule.
    pub const INFEASIBLE: i32 = 3;
    /// The thermal solver failed to converge.
    pub const NON_CONVERGENCE: i32 = 4;
}

/// Everything that can go wrong while running a command.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or syntactically malformed input.
    Parse(String),
    /// Well-formed input violating a structural invariant.
    Validation(String),
    /// Stage one found no legal packing.
    Infeasible(String),
    /// The thermal solve did not reach its residual target.
    NonConvergence(String),
    /// Output files could not be written.
    Io(std::io::Error),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) | CliError::Io(_) => {
                exit_codes::INVALID_INPUT
            }
            CliError::Infeasible(_) => exit_codes::INFEASIBLE,
            CliError::NonConvergence(_) => exit_codes::NON_CONVERGENCE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            CliError::NonConvergence(msg) => write!(f, "thermal solver: {msg}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

//! Command line front end for `charfun-core`: tuple and symbol files, and the
//! commands behind the `charfun-kit` binary.

pub mod commands;
pub mod format;

use charfun_core::charfun::CharfunError;
use charfun_core::dilation::DilationError;
use charfun_core::equivalence::EquivalenceError;
use charfun_core::fock::FockError;
use charfun_core::tuple::TupleError;
use thiserror::Error;

pub use commands::{run, Builtin, Cli, Command, Outcome, Status};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("not comparable: {0}")]
    NotComparable(String),
    #[error("{0}")]
    Math(String),
    #[error("{0}; lower --depth or --steps")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::NotComparable(_) => EXIT_INPUT,
            CliError::Math(_) => EXIT_FAIL,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<TupleError> for CliError {
    fn from(e: TupleError) -> Self {
        match e {
            TupleError::DimensionMismatch(_) => CliError::Input(e.to_string()),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<CharfunError> for CliError {
    fn from(e: CharfunError) -> Self {
        match e {
            CharfunError::Fock(f) => f.into(),
            CharfunError::Tuple(t) => t.into(),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<DilationError> for CliError {
    fn from(e: DilationError) -> Self {
        match e {
            DilationError::Fock(f) => f.into(),
            DilationError::Charfun(c) => c.into(),
            DilationError::Tuple(t) => t.into(),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<EquivalenceError> for CliError {
    fn from(e: EquivalenceError) -> Self {
        match e {
            EquivalenceError::NotComparable(msg) => CliError::NotComparable(msg),
            EquivalenceError::Charfun(c) => c.into(),
            EquivalenceError::Tuple(t) => t.into(),
            other => CliError::Math(other.to_string()),
        }
    }
}

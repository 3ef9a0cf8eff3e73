use alloc::boxed::Box;
use alloc::string::String;

use crate::group::Element;

/// Errors raised by the library.
///
/// The variants fall in two families: validation failures (bad input, a
/// precondition that does not hold) and budget failures (a bounded search
/// ran out of room). The CLI maps them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid group descriptor: {0}")]
    InvalidGroup(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid set expression: {0}")]
    InvalidSet(String),
    #[error("invalid requirement: {0}")]
    InvalidRequirement(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty input")]
    EmptyInput,
    #[error("duplicate point at positions {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },
    #[error("stream exhausted while processing requirement {requirement}: needed {needed}")]
    InsufficientStream { requirement: usize, needed: String },
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("images of {left} and {right} coincide")]
    InjectivityConflict { left: Box<Element>, right: Box<Element> },
}

impl Error {
    /// True for errors caused by a bounded search running out of budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_) | Error::InsufficientStream { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by model construction, parsing and simulation input checks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("task {id}: {reason}")]
    InvalidTask { id: usize, reason: String },
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("priority assignment has {got} entries, task set has {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("task index {0} out of range")]
    TaskIndex(usize),
    #[error("interference term needs two distinct tasks (got {0} twice)")]
    SameTask(usize),
    #[error("offset {offset} outside [0, {limit})")]
    OffsetRange { offset: u64, limit: u64 },
    #[error("invalid job sequence: {0}")]
    JobSequence(String),
    #[error("invalid generator spec: {0}")]
    GenSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

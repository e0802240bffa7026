use thiserror::Error;

use crate::phase1::GenerationResult;
use crate::phase2::{MemoryGuardDecision, SolutionSet};

/// Errors raised by the pure derivations and shape checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible: {required} shifts required but only {slots} schedulable slots")]
    Infeasible { required: u64, slots: u64 },
    #[error("choose({n}, {k}) is undefined: k exceeds n")]
    Domain { n: u64, k: u64 },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("cell ({row}, {column}) is a free day")]
    NotWorkingCell { row: usize, column: usize },
    #[error("cell ({row}, {column}) is out of range")]
    OutOfRange { row: usize, column: usize },
    #[error("shift type {index} is not in the catalog of {catalog_len}")]
    UnknownShift { index: usize, catalog_len: usize },
    #[error("search space too large to enumerate: {0}")]
    TooLarge(String),
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("generation cancelled after {} combinations", .0.combinations_examined)]
    Cancelled(Box<GenerationResult>),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(
        "estimated memory {} B exceeds threshold {} B; confirmation required",
        .0.estimated_bytes,
        .0.threshold_bytes
    )]
    MemoryGuard(MemoryGuardDecision),
    #[error("solve cancelled after {} candidates", .0.candidates_examined)]
    Cancelled(Box<SolutionSet>),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation failed on line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("unsupported combination file version {0}")]
    Version(String),
    #[error("shift catalogs differ between merged schedules")]
    CatalogMismatch,
    #[error(transparent)]
    Core(#[from] CoreError),
}

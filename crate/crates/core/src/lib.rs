//! Two-phase generation of N-shift rotational workforce schedules.
//!
//! Phase 1 ([`phase1`]) enumerates work/free patterns over the rotation
//! cycle and filters them through staffing, weekly-rest and free-day
//! clustering constraints. Phase 2 ([`phase2`]) assigns shift types to the
//! working days of a chosen pattern and keeps the assignments that satisfy
//! the rest-between-shifts and per-shift staffing rules. [`io`] persists
//! phase-1 results and exports final schedules as CSV.

pub mod bench;
pub mod error;
pub mod io;
pub mod job;
pub mod model;
pub mod phase1;
pub mod phase2;

pub use error::{CoreError, GenerateError, IoError, SolveError};
pub use job::JobControl;
pub use model::{
    derive_total_shifts, estimate_memory_bytes, expand_to_week_matrix, total_combination_count,
    AssignmentMatrix, BooleanShiftArray, Cell, CoverageTable, Fingerprint, ScheduleParams, ShiftType,
    WeekMatrix,
};
pub use phase1::{
    check_coverage, check_free_day_clustering, check_weekly_rest, generate, generate_with,
    weekend_off_count, GenerationMode, GenerationRequest, GenerationResult,
};
pub use phase2::{
    build_coverage_table, memory_guard, resolve_method, solve, solve_with, validate_assignment, CellFlag,
    CoverageStatus, Diagnostics, MemoryGuardDecision, SolutionSet, SolveMethod, SolveRequest,
};

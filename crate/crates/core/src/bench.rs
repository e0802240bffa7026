//! Timing suites for both phases. Times are reported, never asserted.

use std::time::Instant;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{GenerateError, SolveError};
use crate::model::{
    derive_total_shifts, total_combination_count, AssignmentMatrix, BooleanShiftArray, ScheduleParams,
    DAYS_PER_WEEK,
};
use crate::phase1::{generate, GenerationRequest};
use crate::phase2::{memory_guard, solve, SolveMethod, SolveRequest, DEFAULT_MEMORY_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phase1Case {
    pub label: &'static str,
    pub shift_types: usize,
    pub working_days: usize,
    pub weeks: usize,
}

impl Phase1Case {
    pub fn params(&self) -> ScheduleParams {
        ScheduleParams::reference(self.shift_types, self.working_days, self.weeks)
    }
}

/// Minimum-cycle cases for one, two and three shifts.
pub const PHASE1_CASES: [Phase1Case; 4] = [
    Phase1Case {
        label: "Single-shift, 5 days/week",
        shift_types: 1,
        working_days: 5,
        weeks: 1,
    },
    Phase1Case {
        label: "Single-shift, 7 days/week",
        shift_types: 1,
        working_days: 7,
        weeks: 2,
    },
    Phase1Case {
        label: "Two-shift, 7 days/week",
        shift_types: 2,
        working_days: 7,
        weeks: 4,
    },
    Phase1Case {
        label: "Three-shift, 7 days/week",
        shift_types: 3,
        working_days: 7,
        weeks: 5,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase1Row {
    pub label: String,
    pub weeks: usize,
    pub time_fast: f64,
    pub time_full: Option<f64>,
    /// Candidates a full run visits; from the count formula when the full
    /// run is skipped.
    pub combinations: BigUint,
    pub solutions: Option<usize>,
}

pub fn run_phase1(case: &Phase1Case, full: bool) -> Result<Phase1Row, GenerateError> {
    let params = case.params();
    let fast = generate(&GenerationRequest::fast(params.clone()))?;
    let shifts = derive_total_shifts(&params)?;
    let mut row = Phase1Row {
        label: case.label.to_owned(),
        weeks: case.weeks,
        time_fast: fast.elapsed,
        time_full: None,
        combinations: total_combination_count(params.slots() as u64, shifts as u64)?,
        solutions: None,
    };
    if full {
        let result = generate(&GenerationRequest::full(params))?;
        row.time_full = Some(result.elapsed);
        row.combinations = result.combinations_examined;
        row.solutions = Some(result.solutions_found);
    }
    Ok(row)
}

/// Cases run by default, up to `max_weeks`; the five-week three-shift full
/// run only with `extreme`.
pub fn phase1_plan(max_weeks: usize, extreme: bool) -> Vec<(Phase1Case, bool)> {
    PHASE1_CASES
        .iter()
        .filter(|c| c.weeks <= max_weeks)
        .map(|c| (*c, extreme || c.weeks < 5))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Phase2Case {
    pub shift_types: usize,
    pub working_cells: usize,
    pub weeks: usize,
}

pub const PHASE2_CASES: [Phase2Case; 4] = [
    Phase2Case {
        shift_types: 2,
        working_cells: 14,
        weeks: 3,
    },
    Phase2Case {
        shift_types: 2,
        working_cells: 18,
        weeks: 4,
    },
    Phase2Case {
        shift_types: 3,
        working_cells: 14,
        weeks: 3,
    },
    Phase2Case {
        shift_types: 3,
        working_cells: 18,
        weeks: 4,
    },
];

impl Phase2Case {
    pub fn params(&self) -> ScheduleParams {
        ScheduleParams::reference(self.shift_types, DAYS_PER_WEEK, self.weeks)
    }

    /// Working days spread evenly over the cycle.
    pub fn template(&self) -> AssignmentMatrix {
        let params = self.params();
        let days = params.cycle_days();
        let mut bits = vec![false; days];
        for i in 0..self.working_cells.min(days) {
            bits[i * days / self.working_cells] = true;
        }
        let origin = BooleanShiftArray::for_params(bits, &params);
        AssignmentMatrix::from_origin(origin, &params).expect("template matches params")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase2Row {
    pub shift_types: usize,
    pub working_cells: usize,
    pub weeks: usize,
    pub combinations: BigUint,
    pub solutions: Option<usize>,
    pub estimated_bytes: BigUint,
    pub time: Option<f64>,
}

/// Runs the Cartesian method unless the memory guard objects and
/// `confirm` is off, in which case only the estimate is reported.
pub fn run_phase2(case: &Phase2Case, confirm: bool) -> Result<Phase2Row, SolveError> {
    let params = case.params();
    let guard = memory_guard(&params, case.working_cells, DEFAULT_MEMORY_THRESHOLD);
    let mut row = Phase2Row {
        shift_types: case.shift_types,
        working_cells: case.working_cells,
        weeks: case.weeks,
        combinations: BigUint::from(case.shift_types).pow(case.working_cells as u32),
        solutions: None,
        estimated_bytes: guard.estimated_bytes.clone(),
        time: None,
    };
    if guard.requires_confirmation && !confirm {
        return Ok(row);
    }
    let mut request = SolveRequest::new(case.template(), params).with_method(SolveMethod::Cartesian);
    request.confirm_memory = confirm;
    let started = Instant::now();
    let set = solve(&request)?;
    row.time = Some(started.elapsed().as_secs_f64());
    row.combinations = set.candidates_examined;
    row.solutions = Some(set.solutions.len());
    Ok(row)
}

/// Least-squares fit of `time = scale * exp(rate * weeks)` on log time.
/// Returns `(scale, rate)`, or `None` with fewer than two usable points.
pub fn exponential_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, t)| t > 0.0)
        .map(|&(w, t)| (w, t.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let rate = sxy / sxx;
    Some(((mean_y - rate * mean_x).exp(), rate))
}

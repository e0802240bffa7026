//! Phase 2: assign shift types to the working days of one boolean array.
//!
//! Two search methods are provided. The Cartesian method materializes the
//! full product table (one byte per cell, `N^d * d` bytes) before filtering
//! it; the recursive method walks the same space depth-first and keeps only
//! accepted matrices. Both visit every assignment of the unpinned working
//! cells exactly once and return the same solutions in row-major
//! lexicographic order.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, SolveError};
use crate::job::JobControl;
use crate::model::{
    estimate_memory_bytes, expand_to_week_matrix, AssignmentMatrix, Cell, CoverageTable,
    ScheduleParams, DAYS_PER_WEEK, HOURS_PER_DAY, HOUR_EPS,
};

/// Cartesian table size, in bytes, above which a solve needs confirmation.
pub const DEFAULT_MEMORY_THRESHOLD: u64 = 1_000_000_000;

const CANCEL_STRIDE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolveMethod {
    /// Cartesian unless the memory estimate crosses the threshold.
    #[default]
    Auto,
    Cartesian,
    Recursive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryGuardDecision {
    pub estimated_bytes: BigUint,
    pub threshold_bytes: u64,
    pub requires_confirmation: bool,
}

pub fn memory_guard(params: &ScheduleParams, working_cells: usize, threshold_bytes: u64) -> MemoryGuardDecision {
    let estimated_bytes = estimate_memory_bytes(params.n_shift_types() as u32, working_cells as u32);
    let requires_confirmation = estimated_bytes > BigUint::from(threshold_bytes);
    MemoryGuardDecision {
        estimated_bytes,
        threshold_bytes,
        requires_confirmation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub template: AssignmentMatrix,
    /// `(row, column)` cells whose template value is kept.
    pub pinned: BTreeSet<(usize, usize)>,
    pub method: SolveMethod,
    pub params: ScheduleParams,
    pub confirm_memory: bool,
    pub memory_threshold: u64,
}

impl SolveRequest {
    pub fn new(template: AssignmentMatrix, params: ScheduleParams) -> Self {
        Self {
            template,
            pinned: BTreeSet::new(),
            method: SolveMethod::Auto,
            params,
            confirm_memory: false,
            memory_threshold: DEFAULT_MEMORY_THRESHOLD,
        }
    }

    pub fn with_method(mut self, method: SolveMethod) -> Self {
        self.method = method;
        self
    }

    pub fn pin(mut self, row: usize, column: usize) -> Self {
        self.pinned.insert((row, column));
        self
    }

    pub fn confirmed(mut self) -> Self {
        self.confirm_memory = true;
        self
    }

    /// Working cells the search is free to change, row-major.
    pub fn open_cells(&self) -> Vec<usize> {
        self.template
            .cells()
            .iter()
            .enumerate()
            .filter(|&(i, c)| {
                c.is_working() && !self.pinned.contains(&(i / DAYS_PER_WEEK, i % DAYS_PER_WEEK))
            })
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub solutions: Vec<AssignmentMatrix>,
    pub candidates_examined: BigUint,
    pub method: SolveMethod,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellFlag {
    Ok,
    RestViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoverageStatus {
    Ok,
    Understaffed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Row-major, one flag per cell of the week grid.
    pub cells: Vec<CellFlag>,
    /// `coverage[day][shift]` for the schedulable days of the week.
    pub coverage: Vec<Vec<CoverageStatus>>,
    pub coverage_table: CoverageTable,
}

impl Diagnostics {
    pub fn rest_violations(&self) -> usize {
        self.cells.iter().filter(|&&f| f == CellFlag::RestViolation).count()
    }

    pub fn understaffed(&self) -> usize {
        self.coverage
            .iter()
            .flatten()
            .filter(|&&s| s == CoverageStatus::Understaffed)
            .count()
    }

    pub fn violations(&self) -> usize {
        self.rest_violations() + self.understaffed()
    }

    pub fn is_feasible(&self) -> bool {
        self.violations() == 0
    }
}

/// Precomputed shift timing and thresholds for repeated validation.
#[derive(Debug, Clone)]
pub struct Validator {
    starts: Vec<f64>,
    ends: Vec<f64>,
    shift_types: usize,
    working_days: usize,
    cycle_days: usize,
    min_rest: f64,
    min_workers: u32,
}

impl Validator {
    pub fn new(params: &ScheduleParams) -> Self {
        Self {
            starts: params.shift_catalog.iter().map(|s| s.start_hour).collect(),
            ends: params
                .shift_catalog
                .iter()
                .map(|s| s.start_hour + s.duration)
                .collect(),
            shift_types: params.n_shift_types(),
            working_days: params.working_days,
            cycle_days: params.cycle_days(),
            min_rest: params.min_rest_between_shifts,
            min_workers: params.min_workers_per_shift,
        }
    }

    /// Hours between the end of one shift and the start of the next, `gap`
    /// days later.
    #[inline]
    fn rest(&self, prev: u8, next: u8, gap: usize) -> f64 {
        gap as f64 * HOURS_PER_DAY + self.starts[next as usize] - self.ends[prev as usize]
    }

    #[inline]
    fn rest_ok(&self, prev: u8, next: u8, gap: usize) -> bool {
        self.rest(prev, next, gap) + HOUR_EPS >= self.min_rest
    }

    /// Visits each consecutive pair of working days around the cycle,
    /// wrapping from the last one back to the first.
    fn for_each_pair(&self, cells: &[Cell], mut f: impl FnMut(usize, u8, usize, u8) -> bool) -> bool {
        let mut first: Option<(usize, u8)> = None;
        let mut prev: Option<(usize, u8)> = None;
        for (i, cell) in cells.iter().enumerate() {
            if let Cell::Shift(s) = *cell {
                if let Some((p, ps)) = prev {
                    if !f(p, ps, i, s) {
                        return false;
                    }
                } else {
                    first = Some((i, s));
                }
                prev = Some((i, s));
            }
        }
        match (prev, first) {
            (Some((p, ps)), Some((q, qs))) => f(p, ps, q, qs),
            _ => true,
        }
    }

    fn gap(&self, prev: usize, next: usize) -> usize {
        if next > prev {
            next - prev
        } else {
            next + self.cycle_days - prev
        }
    }

    fn coverage_counts(&self, cells: &[Cell]) -> CoverageTable {
        let mut table = CoverageTable::zeroed(self.shift_types);
        for (i, cell) in cells.iter().enumerate() {
            if let Cell::Shift(s) = *cell {
                table.counts[i % DAYS_PER_WEEK][s as usize] += 1;
            }
        }
        table
    }

    /// Early-exit feasibility test used inside the searches.
    pub fn feasible(&self, cells: &[Cell], counts: &mut Vec<u32>) -> bool {
        let rest_ok = self.for_each_pair(cells, |p, ps, n, ns| self.rest_ok(ps, ns, self.gap(p, n)));
        if !rest_ok {
            return false;
        }
        if self.min_workers == 0 {
            return true;
        }
        counts.clear();
        counts.resize(DAYS_PER_WEEK * self.shift_types, 0);
        for (i, cell) in cells.iter().enumerate() {
            if let Cell::Shift(s) = *cell {
                counts[(i % DAYS_PER_WEEK) * self.shift_types + s as usize] += 1;
            }
        }
        counts[..self.working_days * self.shift_types]
            .iter()
            .all(|&c| c >= self.min_workers)
    }

    pub fn diagnose(&self, cells: &[Cell]) -> Diagnostics {
        let mut flags = vec![CellFlag::Ok; cells.len()];
        self.for_each_pair(cells, |p, ps, n, ns| {
            if !self.rest_ok(ps, ns, self.gap(p, n)) {
                flags[n] = CellFlag::RestViolation;
            }
            true
        });
        let coverage_table = self.coverage_counts(cells);
        let coverage = coverage_table.counts[..self.working_days]
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| {
                        if c < self.min_workers {
                            CoverageStatus::Understaffed
                        } else {
                            CoverageStatus::Ok
                        }
                    })
                    .collect()
            })
            .collect();
        Diagnostics {
            cells: flags,
            coverage,
            coverage_table,
        }
    }
}

fn check_cells(matrix: &AssignmentMatrix, params: &ScheduleParams) -> Result<(), CoreError> {
    matrix.check_shape(params)?;
    for &cell in matrix.cells() {
        if let Cell::Shift(s) = cell {
            if s as usize >= params.n_shift_types() {
                return Err(CoreError::UnknownShift {
                    index: s as usize,
                    catalog_len: params.n_shift_types(),
                });
            }
        }
    }
    Ok(())
}

/// Rest between consecutive working days and staffing per day and shift.
pub fn validate_assignment(matrix: &AssignmentMatrix, params: &ScheduleParams) -> Result<Diagnostics, CoreError> {
    check_cells(matrix, params)?;
    Ok(Validator::new(params).diagnose(matrix.cells()))
}

/// Workers per day of week and shift type, summed over all weeks.
pub fn build_coverage_table(matrix: &AssignmentMatrix, params: &ScheduleParams) -> Result<CoverageTable, CoreError> {
    check_cells(matrix, params)?;
    Ok(Validator::new(params).coverage_counts(matrix.cells()))
}

pub fn solve(request: &SolveRequest) -> Result<SolutionSet, SolveError> {
    solve_with(request, &JobControl::new())
}

/// Checks the request and picks the method `solve` would run, or the
/// memory-guard decision when confirmation is missing.
pub fn resolve_method(request: &SolveRequest) -> Result<SolveMethod, SolveError> {
    let params = &request.params;
    params.validate()?;
    check_cells(&request.template, params)?;
    let expected = expand_to_week_matrix(request.template.origin(), params)?;
    for (i, (&on, cell)) in expected.cycle().iter().zip(request.template.cells()).enumerate() {
        if on != cell.is_working() {
            return Err(CoreError::NotWorkingCell {
                row: i / DAYS_PER_WEEK,
                column: i % DAYS_PER_WEEK,
            }
            .into());
        }
    }
    for &(row, column) in &request.pinned {
        if row >= params.weeks || column >= DAYS_PER_WEEK {
            return Err(CoreError::OutOfRange { row, column }.into());
        }
        if !request.template.get(row, column).is_working() {
            return Err(CoreError::NotWorkingCell { row, column }.into());
        }
    }

    let guard = memory_guard(params, request.open_cells().len(), request.memory_threshold);
    let method = match request.method {
        SolveMethod::Auto if guard.requires_confirmation => {
            if !request.confirm_memory {
                return Err(SolveError::MemoryGuard(guard));
            }
            SolveMethod::Recursive
        }
        SolveMethod::Auto => SolveMethod::Cartesian,
        SolveMethod::Cartesian if guard.requires_confirmation && !request.confirm_memory => {
            return Err(SolveError::MemoryGuard(guard));
        }
        other => other,
    };
    Ok(method)
}

pub fn solve_with(request: &SolveRequest, control: &Arc<JobControl>) -> Result<SolutionSet, SolveError> {
    let method = resolve_method(request)?;
    let params = &request.params;
    let open = request.open_cells();
    let total = BigUint::from(params.n_shift_types()).pow(open.len() as u32);
    control.set_total(total.to_u64().unwrap_or(u64::MAX));
    let validator = Validator::new(params);
    let search = Search {
        template: &request.template,
        open: &open,
        shift_types: params.n_shift_types() as u8,
        validator: &validator,
        control,
    };
    let (solutions, examined, complete) = match method {
        SolveMethod::Recursive => search.recursive(),
        _ => search.cartesian(&total)?,
    };
    let set = SolutionSet {
        solutions,
        candidates_examined: BigUint::from(examined),
        method,
        truncated: !complete,
    };
    if !complete {
        return Err(SolveError::Cancelled(Box::new(set)));
    }
    Ok(set)
}

struct Search<'a> {
    template: &'a AssignmentMatrix,
    open: &'a [usize],
    shift_types: u8,
    validator: &'a Validator,
    control: &'a JobControl,
}

impl Search<'_> {
    fn base_cells(&self) -> Vec<Cell> {
        let mut cells = self.template.cells().to_vec();
        for &i in self.open {
            cells[i] = Cell::Shift(0);
        }
        cells
    }

    /// Builds the whole product table, then filters it row by row.
    fn cartesian(&self, total: &BigUint) -> Result<(Vec<AssignmentMatrix>, u64, bool), CoreError> {
        let width = self.open.len();
        let rows = total
            .to_usize()
            .filter(|rows| rows.checked_mul(width.max(1)).is_some())
            .ok_or_else(|| CoreError::TooLarge(format!("{total} candidates cannot be materialized")))?;
        let base = self.base_cells();
        if width == 0 {
            let mut counts = Vec::new();
            self.control.advance(1);
            let ok = self.validator.feasible(&base, &mut counts);
            let solutions = if ok { vec![self.template.with_cells(base)] } else { Vec::new() };
            return Ok((solutions, 1, true));
        }

        let radix = self.shift_types as usize;
        let mut table = vec![0u8; rows * width];
        table.par_chunks_mut(width).enumerate().for_each(|(mut r, row)| {
            for slot in row.iter_mut().rev() {
                *slot = (r % radix) as u8;
                r /= radix;
            }
        });

        let block = CANCEL_STRIDE as usize;
        let blocks: Vec<Option<(Vec<Vec<Cell>>, u64)>> = table
            .par_chunks(width * block)
            .map(|chunk| {
                if self.control.is_cancelled() {
                    return None;
                }
                let mut cells = base.clone();
                let mut counts = Vec::new();
                let mut accepted = Vec::new();
                for row in chunk.chunks_exact(width) {
                    for (&i, &s) in self.open.iter().zip(row) {
                        cells[i] = Cell::Shift(s);
                    }
                    if self.validator.feasible(&cells, &mut counts) {
                        accepted.push(cells.clone());
                    }
                }
                let examined = (chunk.len() / width) as u64;
                self.control.advance(examined);
                Some((accepted, examined))
            })
            .collect();

        let mut solutions = Vec::new();
        let mut examined = 0;
        for block in blocks {
            let Some((accepted, n)) = block else {
                return Ok((solutions, examined, false));
            };
            examined += n;
            solutions.extend(accepted.into_iter().map(|c| self.template.with_cells(c)));
        }
        Ok((solutions, examined, true))
    }

    /// Depth-first walk from the all-first-shift state. Each level raises one
    /// open cell, strictly to the right of the previous level's cell, to a
    /// non-first shift; every assignment is reached along exactly one path.
    fn recursive(&self) -> (Vec<AssignmentMatrix>, u64, bool) {
        struct Walk<'s, 'a> {
            search: &'s Search<'a>,
            cells: Vec<Cell>,
            counts: Vec<u32>,
            accepted: HashSet<Vec<Cell>>,
            examined: u64,
            cancelled: bool,
        }

        impl Walk<'_, '_> {
            fn visit(&mut self) {
                self.examined += 1;
                if self.examined.is_multiple_of(CANCEL_STRIDE) {
                    self.search.control.advance(CANCEL_STRIDE);
                    self.cancelled = self.search.control.is_cancelled();
                }
                if !self.accepted.contains(&self.cells)
                    && self.search.validator.feasible(&self.cells, &mut self.counts)
                {
                    self.accepted.insert(self.cells.clone());
                }
            }

            fn descend(&mut self, from: usize) {
                for shift in 1..self.search.shift_types {
                    for pos in from..self.search.open.len() {
                        if self.cancelled {
                            return;
                        }
                        let cell = self.search.open[pos];
                        self.cells[cell] = Cell::Shift(shift);
                        self.visit();
                        self.descend(pos + 1);
                        self.cells[cell] = Cell::Shift(0);
                    }
                }
            }
        }

        let mut walk = Walk {
            search: self,
            cells: self.base_cells(),
            counts: Vec::new(),
            accepted: HashSet::new(),
            examined: 0,
            cancelled: false,
        };
        walk.visit();
        walk.descend(0);
        self.control.advance(walk.examined % CANCEL_STRIDE);

        let mut solutions: Vec<Vec<Cell>> = walk.accepted.into_iter().collect();
        solutions.sort_unstable();
        let solutions = solutions
            .into_iter()
            .map(|c| self.template.with_cells(c))
            .collect();
        (solutions, walk.examined, !walk.cancelled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_bits, BooleanShiftArray, ShiftType};

    fn two_shift_params(weeks: usize) -> ScheduleParams {
        let mut p = ScheduleParams::reference(2, 7, weeks);
        p.shift_catalog = vec![ShiftType::new("D", 6.0, 8.33), ShiftType::new("E", 14.0, 8.33)];
        p
    }

    fn template(bits: &str, params: &ScheduleParams) -> AssignmentMatrix {
        let origin = BooleanShiftArray::for_params(parse_bits(bits).unwrap(), params);
        AssignmentMatrix::from_origin(origin, params).unwrap()
    }

    #[test]
    fn evening_then_day_flags_the_day_shift() {
        let p = two_shift_params(1);
        let mut m = template("0001100", &p);
        m.set(0, 3, 1, 2).unwrap();
        let d = validate_assignment(&m, &p).unwrap();
        assert_eq!(d.cells[4], CellFlag::RestViolation);
        assert_eq!(d.cells[3], CellFlag::Ok);
        assert_eq!(d.rest_violations(), 1);
        let v = Validator::new(&p);
        assert!((v.rest(1, 0, 1) - 7.67).abs() < 1e-9);
    }

    #[test]
    fn all_free_is_understaffed_without_rest_flags() {
        let p = two_shift_params(2);
        let m = template(&"0".repeat(14), &p);
        let d = validate_assignment(&m, &p).unwrap();
        assert_eq!(d.rest_violations(), 0);
        assert_eq!(d.understaffed(), 7 * 2);
    }

    #[test]
    fn all_day_shifts_rest_fine() {
        let p = two_shift_params(2);
        let m = template(&"1".repeat(14), &p);
        let d = validate_assignment(&m, &p).unwrap();
        assert_eq!(d.rest_violations(), 0);
        assert!((Validator::new(&p).rest(0, 0, 1) - 15.67).abs() < 1e-9);
    }

    #[test]
    fn coverage_counts_single_evening() {
        let p = two_shift_params(1);
        let mut m = template("0010000", &p);
        m.set(0, 2, 1, 2).unwrap();
        let t = build_coverage_table(&m, &p).unwrap();
        assert_eq!(t.get(2, 1), 1);
        assert_eq!(t.total(), 1);
    }

    #[test]
    fn set_rejects_free_and_unknown() {
        let p = two_shift_params(1);
        let mut m = template("0010000", &p);
        assert_eq!(m.set(0, 0, 1, 2), Err(CoreError::NotWorkingCell { row: 0, column: 0 }));
        assert!(matches!(m.set(0, 2, 2, 2), Err(CoreError::UnknownShift { .. })));
        assert!(matches!(m.set(1, 2, 0, 2), Err(CoreError::OutOfRange { .. })));
    }

    #[test]
    fn guard_decisions() {
        let p3 = ScheduleParams::reference(3, 7, 4);
        let g = memory_guard(&p3, 18, DEFAULT_MEMORY_THRESHOLD);
        assert_eq!(g.estimated_bytes, BigUint::from(6_973_568_802u64));
        assert!(g.requires_confirmation);
        let p2 = ScheduleParams::reference(2, 7, 4);
        let g = memory_guard(&p2, 18, DEFAULT_MEMORY_THRESHOLD);
        assert_eq!(g.estimated_bytes, BigUint::from(4_718_592u32));
        assert!(!g.requires_confirmation);
        let p1 = ScheduleParams::reference(1, 7, 4);
        let g = memory_guard(&p1, 20, DEFAULT_MEMORY_THRESHOLD);
        assert_eq!(g.estimated_bytes, BigUint::from(20u32));
        assert!(!g.requires_confirmation);
    }

    #[test]
    fn auto_requires_confirmation_over_threshold() {
        let mut p = two_shift_params(1);
        p.min_workers_per_shift = 0;
        let m = template("1111111", &p);
        let mut req = SolveRequest::new(m, p);
        req.memory_threshold = 100;
        assert!(matches!(solve(&req), Err(SolveError::MemoryGuard(g)) if g.requires_confirmation));
        let explicit = req.clone().with_method(SolveMethod::Cartesian);
        assert!(matches!(solve(&explicit), Err(SolveError::MemoryGuard(_))));
        let set = solve(&req.confirmed()).unwrap();
        assert_eq!(set.method, SolveMethod::Recursive);
        assert_eq!(set.candidates_examined, BigUint::from(128u32));
    }

    #[test]
    fn pinned_cells_must_be_working() {
        let p = two_shift_params(1);
        let req = SolveRequest::new(template("1100000", &p), p).pin(0, 3);
        assert!(matches!(
            solve(&req),
            Err(SolveError::Core(CoreError::NotWorkingCell { row: 0, column: 3 }))
        ));
    }

    #[test]
    fn no_open_cells_is_one_candidate() {
        let mut p = two_shift_params(1);
        p.min_workers_per_shift = 0;
        let req = SolveRequest::new(template("1000000", &p), p).pin(0, 0);
        for method in [SolveMethod::Cartesian, SolveMethod::Recursive] {
            let set = solve(&req.clone().with_method(method)).unwrap();
            assert_eq!(set.candidates_examined, BigUint::from(1u32));
            assert_eq!(set.solutions.len(), 1);
        }
    }

    #[test]
    fn cancelled_solve_reports_partial() {
        let mut p = two_shift_params(2);
        p.min_workers_per_shift = 0;
        let req = SolveRequest::new(template(&"1".repeat(14), &p), p);
        let control = JobControl::new();
        control.cancel();
        for method in [SolveMethod::Cartesian, SolveMethod::Recursive] {
            let r = solve_with(&req.clone().with_method(method), &control);
            assert!(matches!(r, Err(SolveError::Cancelled(s)) if s.truncated), "{method:?}");
        }
    }
}

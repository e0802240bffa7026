//! Phase 1: enumerate boolean shift arrays and keep those passing the
//! coverage, weekly-rest and free-day clustering constraints.
//!
//! Candidates are the `n_S`-subsets of the `n_W * n_wd` schedulable slots,
//! visited in lexicographic order of their index tuples. Every constraint
//! is evaluated directly on the sorted index tuple, so rejected candidates
//! are never materialized.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, GenerateError};
use crate::job::JobControl;
use crate::model::{
    derive_total_shifts, slot_to_cycle, total_combination_count, BooleanShiftArray, Fingerprint,
    ScheduleParams, DAYS_PER_WEEK, HOURS_PER_DAY, HOURS_PER_WEEK, HOUR_EPS, WEEKEND,
};

pub const DEFAULT_FAST_LIMIT: usize = 100;

/// How often (in candidates) a worker looks at the cancel flag.
const CANCEL_STRIDE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GenerationMode {
    /// Stop after `fast_limit` accepted arrays.
    Fast,
    /// Visit the whole candidate space.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub params: ScheduleParams,
    pub mode: GenerationMode,
    #[serde(default = "default_fast_limit")]
    pub fast_limit: usize,
    #[serde(default)]
    pub cluster_free_days: bool,
}

fn default_fast_limit() -> usize {
    DEFAULT_FAST_LIMIT
}

impl GenerationRequest {
    pub fn full(params: ScheduleParams) -> Self {
        Self {
            params,
            mode: GenerationMode::Full,
            fast_limit: DEFAULT_FAST_LIMIT,
            cluster_free_days: false,
        }
    }

    pub fn fast(params: ScheduleParams) -> Self {
        Self {
            mode: GenerationMode::Fast,
            ..Self::full(params)
        }
    }

    pub fn with_clustering(mut self, on: bool) -> Self {
        self.cluster_free_days = on;
        self
    }

    pub fn with_fast_limit(mut self, limit: usize) -> Self {
        self.fast_limit = limit;
        self
    }

    /// Parameter checks plus the shift-count feasibility test.
    pub fn validate(&self) -> Result<(), CoreError> {
        self.params.validate()?;
        derive_total_shifts(&self.params)?;
        if self.fast_limit == 0 {
            return Err(CoreError::InvalidParams("fast limit must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub request: GenerationRequest,
    pub arrays: Vec<BooleanShiftArray>,
    pub combinations_examined: BigUint,
    pub solutions_found: usize,
    /// Wall-clock seconds.
    pub elapsed: f64,
    pub truncated: bool,
}

/// Constraint evaluator precomputed from one parameter set.
#[derive(Debug, Clone)]
pub struct Phase1Filter {
    working_days: usize,
    weeks: usize,
    cycle_days: usize,
    min_per_day: usize,
    shift_length: f64,
    anchor: f64,
    weekly_rest: f64,
    min_free_cluster: Option<usize>,
}

impl Phase1Filter {
    pub fn new(params: &ScheduleParams, cluster_free_days: bool) -> Self {
        Self {
            working_days: params.working_days,
            weeks: params.weeks,
            cycle_days: params.cycle_days(),
            min_per_day: params.n_shift_types(),
            shift_length: params.shift_length,
            anchor: params.anchor_start_hour,
            weekly_rest: params.weekly_rest,
            min_free_cluster: cluster_free_days.then_some(params.min_free_cluster),
        }
    }

    /// `slots` must be strictly increasing slot indices of working days.
    pub fn accepts(&self, slots: &[usize], scratch: &mut Scratch) -> bool {
        scratch.cycle.clear();
        scratch
            .cycle
            .extend(slots.iter().map(|&s| slot_to_cycle(s, self.working_days)));
        self.coverage_ok(slots)
            && self.min_free_cluster.is_none_or(|n| cluster_ok(&scratch.cycle, self.cycle_days, n))
            && self.rest_ok(&scratch.cycle, &mut scratch.weeks)
    }

    fn coverage_ok(&self, slots: &[usize]) -> bool {
        let mut sums = [0usize; DAYS_PER_WEEK];
        for &s in slots {
            sums[s % self.working_days] += 1;
        }
        sums[..self.working_days].iter().all(|&c| c >= self.min_per_day)
    }

    /// `cycle` holds strictly increasing day positions of the expanded cycle.
    fn rest_ok(&self, cycle: &[usize], touched: &mut Vec<bool>) -> bool {
        let period = self.weeks as f64 * HOURS_PER_WEEK;
        let Some((&first, &last)) = cycle.first().zip(cycle.last()) else {
            return self.weekly_rest <= period + HOUR_EPS;
        };
        touched.clear();
        touched.resize(self.weeks, false);
        let mut remaining = self.weeks;
        // Marks the weeks a long enough free interval touches; returns how
        // many were newly marked.
        let mark = |start: f64, len: f64, touched: &mut Vec<bool>| -> usize {
            if len + HOUR_EPS < self.weekly_rest || len <= 0.0 {
                return 0;
            }
            let (lo, hi) = if len >= period {
                (0, self.weeks)
            } else {
                let start = start.rem_euclid(period);
                let end = start + len;
                (
                    (start / HOURS_PER_WEEK).floor() as usize,
                    (end / HOURS_PER_WEEK).ceil() as usize,
                )
            };
            let mut fresh = 0;
            for k in lo..hi {
                let w = k % self.weeks;
                if !touched[w] {
                    touched[w] = true;
                    fresh += 1;
                }
            }
            fresh
        };
        let end_of = |day: usize| day as f64 * HOURS_PER_DAY + self.anchor + self.shift_length;
        let start_of = |day: usize| day as f64 * HOURS_PER_DAY + self.anchor;
        for pair in cycle.windows(2) {
            let gap_start = end_of(pair[0]);
            remaining -= mark(gap_start, start_of(pair[1]) - gap_start, touched);
            if remaining == 0 {
                return true;
            }
        }
        let gap_start = end_of(last);
        remaining -= mark(gap_start, start_of(first) + period - gap_start, touched);
        remaining == 0
    }
}

/// Reusable buffers for [`Phase1Filter::accepts`].
#[derive(Debug, Default)]
pub struct Scratch {
    cycle: Vec<usize>,
    weeks: Vec<bool>,
}

fn cluster_ok(cycle: &[usize], cycle_days: usize, min_run: usize) -> bool {
    let (Some(&first), Some(&last)) = (cycle.first(), cycle.last()) else {
        return cycle_days >= min_run;
    };
    let run_ok = |run: usize| run == 0 || run >= min_run;
    cycle.windows(2).all(|p| run_ok(p[1] - p[0] - 1)) && run_ok(cycle_days - 1 - last + first)
}

fn working_slots(array: &BooleanShiftArray) -> Vec<usize> {
    array
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

/// Every schedulable day of week is worked by at least N workers.
pub fn check_coverage(array: &BooleanShiftArray, params: &ScheduleParams) -> Result<bool, CoreError> {
    array.check_shape(params)?;
    Ok(Phase1Filter::new(params, false).coverage_ok(&working_slots(array)))
}

/// Every calendar week touches a shift-free interval of at least the weekly
/// rest. Shifts start at the anchor hour and the cycle wraps around.
pub fn check_weekly_rest(array: &BooleanShiftArray, params: &ScheduleParams) -> Result<bool, CoreError> {
    array.check_shape(params)?;
    let cycle: Vec<usize> = working_slots(array)
        .into_iter()
        .map(|s| slot_to_cycle(s, params.working_days))
        .collect();
    Ok(Phase1Filter::new(params, false).rest_ok(&cycle, &mut Vec::new()))
}

/// Every maximal run of free days on the circular expanded cycle has at
/// least `min_run` days.
pub fn check_free_day_clustering(
    array: &BooleanShiftArray,
    params: &ScheduleParams,
    min_run: usize,
) -> Result<bool, CoreError> {
    array.check_shape(params)?;
    let cycle: Vec<usize> = working_slots(array)
        .into_iter()
        .map(|s| slot_to_cycle(s, params.working_days))
        .collect();
    Ok(cluster_ok(&cycle, params.cycle_days(), min_run.max(1)))
}

/// Number of weeks with both Saturday and Sunday free.
pub fn weekend_off_count(array: &BooleanShiftArray, params: &ScheduleParams) -> Result<usize, CoreError> {
    let matrix = crate::model::expand_to_week_matrix(array, params)?;
    Ok((0..matrix.weeks())
        .filter(|&w| WEEKEND.iter().all(|&c| !matrix.get(w, c)))
        .count())
}

/// Lexicographic `k`-subsets of `0..n`, stepped the same way as
/// itertools-style combination generators.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    indices: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            indices: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    /// Starts at the combination of lexicographic rank `rank`.
    pub fn starting_at(n: usize, k: usize, rank: u64, table: &BinomialTable) -> Self {
        let mut indices = Vec::with_capacity(k);
        let mut rank = rank;
        let mut next = 0;
        for i in 0..k {
            loop {
                let rest = table.get(n - next - 1, k - i - 1);
                if rank < rest {
                    break;
                }
                rank -= rest;
                next += 1;
            }
            indices.push(next);
            next += 1;
        }
        Self {
            n,
            indices,
            started: false,
            done: k > n,
        }
    }

    /// The current tuple, after at least one call to [`Self::advance`].
    pub fn current(&self) -> &[usize] {
        &self.indices
    }

    /// Moves to the next tuple; returns false once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let k = self.indices.len();
        let n = self.n;
        match (0..k).rev().find(|&i| self.indices[i] != i + n - k) {
            Some(i) => {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                true
            }
            None => {
                self.done = true;
                false
            }
        }
    }
}

/// Pascal's triangle up to `n`, saturating at `u64::MAX`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<u64>>,
}

impl BinomialTable {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut row = vec![1u64; i + 1];
            for j in 1..i {
                row[j] = rows[i - 1][j - 1].saturating_add(rows[i - 1][j]);
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.rows[n][k]
        }
    }
}

struct Chunk {
    arrays: Vec<BooleanShiftArray>,
    examined: u64,
    complete: bool,
}

/// Runs phase 1 to completion (or until cancelled through `control`).
pub fn generate(request: &GenerationRequest) -> Result<GenerationResult, GenerateError> {
    generate_with(request, &JobControl::new())
}

pub fn generate_with(
    request: &GenerationRequest,
    control: &Arc<JobControl>,
) -> Result<GenerationResult, GenerateError> {
    request.validate()?;
    let started = Instant::now();
    let params = &request.params;
    let shifts = derive_total_shifts(params)?;
    let slots = params.slots();
    let total = total_combination_count(slots as u64, shifts as u64)?;
    let filter = Phase1Filter::new(params, request.cluster_free_days);
    let fingerprint = params.fingerprint();

    let (arrays, examined, truncated, cancelled) = match request.mode {
        GenerationMode::Fast => {
            control.set_total(total.to_u64().unwrap_or(u64::MAX));
            let chunk = run_fast(slots, shifts, &filter, fingerprint, request.fast_limit, control);
            let truncated = chunk.arrays.len() >= request.fast_limit;
            (chunk.arrays, chunk.examined, truncated, !chunk.complete)
        }
        GenerationMode::Full => {
            let total = total.to_u64().ok_or_else(|| {
                CoreError::TooLarge(format!("{total} combinations exceed the enumerable range"))
            })?;
            control.set_total(total);
            run_full(slots, shifts, total, &filter, fingerprint, control)
        }
    };

    let result = GenerationResult {
        request: request.clone(),
        solutions_found: arrays.len(),
        arrays,
        combinations_examined: BigUint::from(examined),
        elapsed: started.elapsed().as_secs_f64(),
        truncated: truncated || cancelled,
    };
    if cancelled {
        return Err(GenerateError::Cancelled(Box::new(result)));
    }
    Ok(result)
}

fn run_fast(
    slots: usize,
    shifts: usize,
    filter: &Phase1Filter,
    fingerprint: Fingerprint,
    limit: usize,
    control: &JobControl,
) -> Chunk {
    let mut combos = Combinations::new(slots, shifts);
    let mut scratch = Scratch::default();
    let mut arrays = Vec::new();
    let mut examined = 0u64;
    let mut pending = 0u64;
    while combos.advance() {
        examined += 1;
        pending += 1;
        if filter.accepts(combos.current(), &mut scratch) {
            arrays.push(BooleanShiftArray::from_positions(slots, combos.current(), fingerprint));
            if arrays.len() >= limit {
                break;
            }
        }
        if pending == CANCEL_STRIDE {
            control.advance(pending);
            pending = 0;
            if control.is_cancelled() {
                return Chunk {
                    arrays,
                    examined,
                    complete: false,
                };
            }
        }
    }
    control.advance(pending);
    Chunk {
        arrays,
        examined,
        complete: true,
    }
}

fn run_full(
    slots: usize,
    shifts: usize,
    total: u64,
    filter: &Phase1Filter,
    fingerprint: Fingerprint,
    control: &JobControl,
) -> (Vec<BooleanShiftArray>, u64, bool, bool) {
    let table = BinomialTable::new(slots);
    let workers = rayon::current_num_threads() as u64;
    let chunk_len = (total / (workers * 16)).max(CANCEL_STRIDE);
    let chunk_count = total.div_ceil(chunk_len);

    let chunks: Vec<Chunk> = (0..chunk_count)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk_len;
            let len = chunk_len.min(total - start);
            let mut combos = Combinations::starting_at(slots, shifts, start, &table);
            let mut scratch = Scratch::default();
            let mut arrays = Vec::new();
            let mut examined = 0u64;
            while examined < len {
                if examined.is_multiple_of(CANCEL_STRIDE) && control.is_cancelled() {
                    control.advance(examined % CANCEL_STRIDE);
                    return Chunk {
                        arrays,
                        examined,
                        complete: false,
                    };
                }
                let stepped = combos.advance();
                debug_assert!(stepped);
                examined += 1;
                if filter.accepts(combos.current(), &mut scratch) {
                    arrays.push(BooleanShiftArray::from_positions(slots, combos.current(), fingerprint));
                }
                if examined.is_multiple_of(CANCEL_STRIDE) {
                    control.advance(CANCEL_STRIDE);
                }
            }
            control.advance(examined % CANCEL_STRIDE);
            Chunk {
                arrays,
                examined,
                complete: true,
            }
        })
        .collect();

    let mut arrays = Vec::new();
    let mut examined = 0;
    let mut cancelled = false;
    for chunk in chunks {
        if cancelled {
            break;
        }
        examined += chunk.examined;
        arrays.extend(chunk.arrays);
        cancelled = !chunk.complete;
    }
    (arrays, examined, false, cancelled)
}

//! Domain types shared by both phases and the pure count derivations.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CoreError;

pub const DAYS_PER_WEEK: usize = 7;
pub const HOURS_PER_DAY: f64 = 24.0;
pub const HOURS_PER_WEEK: f64 = 168.0;

/// Token used for a free day in exports and labels.
pub const FREE_TOKEN: &str = "0";

/// Slack for comparisons on hour quantities given as decimals (8.33 h and friends).
pub(crate) const HOUR_EPS: f64 = 1e-9;

pub const DAY_NAMES: [&str; DAYS_PER_WEEK] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

/// Column indices of the weekend inside a week row.
pub const WEEKEND: [usize; 2] = [5, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftType {
    pub label: String,
    pub start_hour: f64,
    pub duration: f64,
}

impl ShiftType {
    pub fn new(label: impl Into<String>, start_hour: f64, duration: f64) -> Self {
        Self {
            label: label.into(),
            start_hour,
            duration,
        }
    }

    /// Default catalog: day 06:00, evening 14:00, night 22:00, then further
    /// labels every eight hours.
    pub fn default_catalog(count: usize, duration: f64) -> Vec<ShiftType> {
        const PRESET: [(&str, f64); 3] = [("D", 6.0), ("E", 14.0), ("N", 22.0)];
        (0..count)
            .map(|i| match PRESET.get(i) {
                Some(&(label, start)) => ShiftType::new(label, start, duration),
                None => ShiftType::new(format!("S{i}"), (6.0 + 8.0 * i as f64) % 24.0, duration),
            })
            .collect()
    }
}

/// All user inputs of a planning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Schedulable days per week, 1..=7, counted from Monday.
    pub working_days: usize,
    /// Weeks in the cycle; also the number of workers.
    pub weeks: usize,
    /// Shift length in hours.
    pub shift_length: f64,
    /// Weekly working hours per worker.
    pub weekly_hours: f64,
    /// Minimum single continuous rest that must touch every week, in hours.
    pub weekly_rest: f64,
    /// Minimum length of a run of free days; 1 disables clustering.
    pub min_free_cluster: usize,
    #[serde(default)]
    pub shift_catalog: Vec<ShiftType>,
    #[serde(default = "default_min_rest")]
    pub min_rest_between_shifts: f64,
    #[serde(default = "default_min_workers")]
    pub min_workers_per_shift: u32,
    /// Uniform shift start used by the phase-1 rest arithmetic.
    #[serde(default = "default_anchor")]
    pub anchor_start_hour: f64,
}

fn default_min_rest() -> f64 {
    11.0
}

fn default_min_workers() -> u32 {
    1
}

fn default_anchor() -> f64 {
    8.0
}

impl ScheduleParams {
    pub fn new(
        shift_types: usize,
        working_days: usize,
        weeks: usize,
        shift_length: f64,
        weekly_hours: f64,
        weekly_rest: f64,
    ) -> Self {
        Self {
            working_days,
            weeks,
            shift_length,
            weekly_hours,
            weekly_rest,
            min_free_cluster: 1,
            shift_catalog: ShiftType::default_catalog(shift_types, shift_length),
            min_rest_between_shifts: default_min_rest(),
            min_workers_per_shift: default_min_workers(),
            anchor_start_hour: default_anchor(),
        }
    }

    /// The reference parameter set: 8.33 h shifts, 36 h weeks, 36 h weekly
    /// rest, free days clustered in pairs when clustering is requested.
    pub fn reference(shift_types: usize, working_days: usize, weeks: usize) -> Self {
        let mut params = Self::new(shift_types, working_days, weeks, 8.33, 36.0, 36.0);
        params.min_free_cluster = 2;
        params
    }

    pub fn n_shift_types(&self) -> usize {
        self.shift_catalog.len()
    }

    /// Length of the boolean shift array.
    pub fn slots(&self) -> usize {
        self.weeks * self.working_days
    }

    /// Length of the expanded cycle, padding included.
    pub fn cycle_days(&self) -> usize {
        self.weeks * DAYS_PER_WEEK
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |msg: String| Err(CoreError::InvalidParams(msg));
        if self.shift_catalog.is_empty() {
            return bad("shift catalog must contain at least one shift type".into());
        }
        if self.shift_catalog.len() > u8::MAX as usize {
            return bad("at most 255 shift types are supported".into());
        }
        if !(1..=DAYS_PER_WEEK).contains(&self.working_days) {
            return bad(format!("working days {} not in 1..=7", self.working_days));
        }
        if self.weeks == 0 {
            return bad("at least one week is required".into());
        }
        if !(self.shift_length.is_finite() && self.shift_length > 0.0) {
            return bad(format!("shift length {} must be positive", self.shift_length));
        }
        if !(self.weekly_hours.is_finite() && self.weekly_hours >= 0.0) {
            return bad(format!("weekly hours {} must be non-negative", self.weekly_hours));
        }
        if !(self.weekly_rest.is_finite() && (0.0..=HOURS_PER_WEEK).contains(&self.weekly_rest)) {
            return bad(format!("weekly rest {} not in 0..=168", self.weekly_rest));
        }
        if self.min_free_cluster == 0 || self.min_free_cluster > self.cycle_days() {
            return bad(format!(
                "free-day cluster {} not in 1..={}",
                self.min_free_cluster,
                self.cycle_days()
            ));
        }
        if !self.min_rest_between_shifts.is_finite() || self.min_rest_between_shifts < 0.0 {
            return bad("minimum rest between shifts must be non-negative".into());
        }
        if !(0.0..HOURS_PER_DAY).contains(&self.anchor_start_hour) {
            return bad(format!("anchor start hour {} not in [0,24)", self.anchor_start_hour));
        }
        for (i, shift) in self.shift_catalog.iter().enumerate() {
            if shift.label.is_empty()
                || shift.label == FREE_TOKEN
                || !shift.label.chars().all(|c| c.is_ascii_alphanumeric())
            {
                return bad(format!("shift label {:?} is not a usable label", shift.label));
            }
            if self.shift_catalog[..i].iter().any(|s| s.label == shift.label) {
                return bad(format!("duplicate shift label {:?}", shift.label));
            }
            if !(0.0..HOURS_PER_DAY).contains(&shift.start_hour) {
                return bad(format!("shift {} starts outside [0,24)", shift.label));
            }
            if !(shift.duration.is_finite() && shift.duration > 0.0) {
                return bad(format!("shift {} has non-positive duration", shift.label));
            }
        }
        Ok(())
    }

    /// Stable digest of the parameters, stamped on every generated array.
    pub fn fingerprint(&self) -> Fingerprint {
        let canonical = serde_json::to_vec(self).expect("params serialize");
        let digest = Sha256::digest(&canonical);
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        Fingerprint(u64::from_be_bytes(word))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub u64);

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        u64::from_str_radix(&text, 16)
            .map(Fingerprint)
            .map_err(serde::de::Error::custom)
    }
}

/// One phase-1 candidate: working (true) and free (false) days over the
/// schedulable slots of the cycle, week after week.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanShiftArray {
    bits: Box<[bool]>,
    fingerprint: Fingerprint,
}

impl BooleanShiftArray {
    pub fn new(bits: impl Into<Box<[bool]>>, fingerprint: Fingerprint) -> Self {
        Self {
            bits: bits.into(),
            fingerprint,
        }
    }

    pub fn for_params(bits: impl Into<Box<[bool]>>, params: &ScheduleParams) -> Self {
        Self::new(bits, params.fingerprint())
    }

    pub(crate) fn from_positions(len: usize, positions: &[usize], fingerprint: Fingerprint) -> Self {
        let mut bits = vec![false; len];
        for &p in positions {
            bits[p] = true;
        }
        Self::new(bits, fingerprint)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub(crate) fn check_shape(&self, params: &ScheduleParams) -> Result<(), CoreError> {
        if self.bits.len() != params.slots() {
            return Err(CoreError::Shape {
                expected: params.slots(),
                actual: self.bits.len(),
            });
        }
        Ok(())
    }
}

/// Parses a string over `{0,1}` into bits.
pub fn parse_bits(text: &str) -> Option<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ArrayRepr {
    bits: String,
    fingerprint: Fingerprint,
}

impl Serialize for BooleanShiftArray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ArrayRepr {
            bits: self.to_bitstring(),
            fingerprint: self.fingerprint,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BooleanShiftArray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = ArrayRepr::deserialize(d)?;
        let bits = parse_bits(&repr.bits)
            .ok_or_else(|| serde::de::Error::custom("bits must be a string over {0,1}"))?;
        Ok(Self::new(bits, repr.fingerprint))
    }
}

/// Week-matrix view: `weeks` rows of seven days, padding columns free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeekMatrix {
    weeks: usize,
    cells: Vec<bool>,
}

impl WeekMatrix {
    pub fn weeks(&self) -> usize {
        self.weeks
    }

    pub fn get(&self, row: usize, column: usize) -> bool {
        self.cells[row * DAYS_PER_WEEK + column]
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.cells[row * DAYS_PER_WEEK..(row + 1) * DAYS_PER_WEEK]
    }

    /// Flattened cycle in calendar order.
    pub fn cycle(&self) -> &[bool] {
        &self.cells
    }

    pub fn column_sums(&self) -> [usize; DAYS_PER_WEEK] {
        let mut sums = [0; DAYS_PER_WEEK];
        for (i, &on) in self.cells.iter().enumerate() {
            sums[i % DAYS_PER_WEEK] += on as usize;
        }
        sums
    }
}

/// Maps slot index `i` of the boolean array onto its position in the
/// expanded seven-day cycle.
#[inline]
pub(crate) fn slot_to_cycle(slot: usize, working_days: usize) -> usize {
    (slot / working_days) * DAYS_PER_WEEK + slot % working_days
}

pub fn expand_to_week_matrix(
    array: &BooleanShiftArray,
    params: &ScheduleParams,
) -> Result<WeekMatrix, CoreError> {
    array.check_shape(params)?;
    let mut cells = vec![false; params.cycle_days()];
    for (slot, &on) in array.bits().iter().enumerate() {
        cells[slot_to_cycle(slot, params.working_days)] = on;
    }
    Ok(WeekMatrix {
        weeks: params.weeks,
        cells,
    })
}

/// Total working shifts per cycle: the smallest integer covering
/// `weeks * weekly_hours / shift_length`.
pub fn derive_total_shifts(params: &ScheduleParams) -> Result<usize, CoreError> {
    if params.shift_length.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(CoreError::InvalidParams("shift length must be positive".into()));
    }
    let exact = params.weeks as f64 * params.weekly_hours / params.shift_length;
    // Decimal inputs such as 40/8 may land a hair above the integer.
    let shifts = (exact - HOUR_EPS).ceil().max(0.0) as u64;
    let slots = params.slots() as u64;
    if shifts > slots {
        return Err(CoreError::Infeasible {
            required: shifts,
            slots,
        });
    }
    Ok(shifts as usize)
}

/// `n choose k`, exact.
pub fn total_combination_count(n: u64, k: u64) -> Result<BigUint, CoreError> {
    if k > n {
        return Err(CoreError::Domain { n, k });
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    // acc * (n - k + i) / i stays integral at every step.
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    Ok(acc)
}

/// Bytes needed to materialize every assignment of `shift_types` types to
/// `working_cells` cells, one byte per cell.
pub fn estimate_memory_bytes(shift_types: u32, working_cells: u32) -> BigUint {
    if working_cells == 0 {
        return BigUint::zero();
    }
    BigUint::from(shift_types).pow(working_cells) * working_cells
}

/// Phase-2 cell: a free day or an index into the shift catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<u8>", into = "Option<u8>")]
pub enum Cell {
    Free,
    Shift(u8),
}

impl Cell {
    pub fn shift(self) -> Option<u8> {
        match self {
            Cell::Free => None,
            Cell::Shift(s) => Some(s),
        }
    }

    pub fn is_working(self) -> bool {
        matches!(self, Cell::Shift(_))
    }
}

impl From<Option<u8>> for Cell {
    fn from(value: Option<u8>) -> Self {
        value.map_or(Cell::Free, Cell::Shift)
    }
}

impl From<Cell> for Option<u8> {
    fn from(cell: Cell) -> Self {
        cell.shift()
    }
}

/// Phase-2 state over the `weeks x 7` grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentMatrix {
    weeks: usize,
    cells: Vec<Cell>,
    origin: Arc<BooleanShiftArray>,
}

impl AssignmentMatrix {
    /// Expands `origin` and puts the first shift type on every working day.
    pub fn from_origin(origin: BooleanShiftArray, params: &ScheduleParams) -> Result<Self, CoreError> {
        let matrix = expand_to_week_matrix(&origin, params)?;
        let cells = matrix
            .cycle()
            .iter()
            .map(|&on| if on { Cell::Shift(0) } else { Cell::Free })
            .collect();
        Ok(Self {
            weeks: params.weeks,
            cells,
            origin: Arc::new(origin),
        })
    }

    pub(crate) fn with_cells(&self, cells: Vec<Cell>) -> Self {
        debug_assert_eq!(cells.len(), self.cells.len());
        Self {
            weeks: self.weeks,
            cells,
            origin: Arc::clone(&self.origin),
        }
    }

    pub fn weeks(&self) -> usize {
        self.weeks
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn origin(&self) -> &BooleanShiftArray {
        &self.origin
    }

    pub fn get(&self, row: usize, column: usize) -> Cell {
        self.cells[row * DAYS_PER_WEEK + column]
    }

    pub fn row(&self, row: usize) -> &[Cell] {
        &self.cells[row * DAYS_PER_WEEK..(row + 1) * DAYS_PER_WEEK]
    }

    pub fn working_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.is_working()).count()
    }

    /// Replaces the shift on a working day. Free days stay free.
    pub fn set(&mut self, row: usize, column: usize, shift: u8, catalog_len: usize) -> Result<(), CoreError> {
        if row >= self.weeks || column >= DAYS_PER_WEEK {
            return Err(CoreError::OutOfRange { row, column });
        }
        if shift as usize >= catalog_len {
            return Err(CoreError::UnknownShift {
                index: shift as usize,
                catalog_len,
            });
        }
        let cell = &mut self.cells[row * DAYS_PER_WEEK + column];
        if !cell.is_working() {
            return Err(CoreError::NotWorkingCell { row, column });
        }
        *cell = Cell::Shift(shift);
        Ok(())
    }

    pub(crate) fn check_shape(&self, params: &ScheduleParams) -> Result<(), CoreError> {
        let expected = params.cycle_days();
        if self.weeks != params.weeks || self.cells.len() != expected {
            return Err(CoreError::Shape {
                expected,
                actual: self.cells.len(),
            });
        }
        Ok(())
    }

    /// Rotates rows so that week `by` becomes the first row.
    pub fn rotate_weeks(&self, by: usize) -> Vec<Cell> {
        let shift = (by % self.weeks.max(1)) * DAYS_PER_WEEK;
        let mut cells = self.cells.clone();
        cells.rotate_left(shift);
        cells
    }
}

/// Worker counts per day of week and shift type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTable {
    /// `counts[day][shift]`.
    pub counts: Vec<Vec<u32>>,
}

impl CoverageTable {
    pub fn zeroed(shift_types: usize) -> Self {
        Self {
            counts: vec![vec![0; shift_types]; DAYS_PER_WEEK],
        }
    }

    pub fn get(&self, day: usize, shift: usize) -> u32 {
        self.counts[day][shift]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().map(|&c| c as u64).sum()
    }

    pub fn add(&mut self, other: &CoverageTable) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }
}

//! Brute-force oracles. Nothing here calls into the searches under test;
//! constraints are re-derived from scratch on an integer time grid.

#![allow(dead_code)]

use rws_core::{Cell, ScheduleParams};

fn representable(hours: f64, res: i64) -> bool {
    let scaled = hours * res as f64;
    (scaled - scaled.round()).abs() < 1e-6
}

/// Coarsest grid (time units per hour) on which every hour input is exact.
pub fn resolution(p: &ScheduleParams) -> i64 {
    let inputs = [p.anchor_start_hour, p.shift_length, p.weekly_rest];
    [1, 2, 4, 100]
        .into_iter()
        .find(|&res| inputs.iter().all(|&h| representable(h, res)))
        .expect("hour inputs must be multiples of 0.01")
}

fn units(hours: f64, res: i64) -> i64 {
    (hours * res as f64).round() as i64
}

/// Expanded seven-day cycle of a bit pattern.
pub fn expand(bits: &[bool], working_days: usize, weeks: usize) -> Vec<bool> {
    let mut cycle = Vec::with_capacity(weeks * 7);
    for w in 0..weeks {
        for d in 0..7 {
            cycle.push(d < working_days && bits[w * working_days + d]);
        }
    }
    cycle
}

pub fn coverage(bits: &[bool], p: &ScheduleParams) -> bool {
    let cycle = expand(bits, p.working_days, p.weeks);
    (0..p.working_days).all(|d| (0..p.weeks).filter(|&w| cycle[w * 7 + d]).count() >= p.n_shift_types())
}

/// Marks busy time units on the circular cycle and scans free runs.
pub fn weekly_rest(bits: &[bool], p: &ScheduleParams) -> bool {
    let cycle = expand(bits, p.working_days, p.weeks);
    let res = resolution(p);
    let period = (p.weeks as i64) * 168 * res;
    let mut busy = vec![false; period as usize];
    for (day, &on) in cycle.iter().enumerate() {
        if on {
            let start = day as i64 * 24 * res + units(p.anchor_start_hour, res);
            for t in start..start + units(p.shift_length, res) {
                busy[t.rem_euclid(period) as usize] = true;
            }
        }
    }
    let need = units(p.weekly_rest, res);
    let week = 168 * res;
    let mut touched = vec![false; p.weeks];
    if busy.iter().all(|&b| !b) {
        return need <= period;
    }
    // Start scanning right after a busy unit so no run is split by the wrap.
    let origin = (0..period).find(|&t| busy[t as usize]).unwrap() + 1;
    let mut t = 0;
    while t < period {
        let at = |k: i64| busy[((origin + k).rem_euclid(period)) as usize];
        if at(t) {
            t += 1;
            continue;
        }
        let run_start = t;
        while t < period && !at(t) {
            t += 1;
        }
        let len = t - run_start;
        if len >= need {
            for k in run_start..t {
                let abs = (origin + k).rem_euclid(period);
                touched[(abs / week) as usize] = true;
            }
        }
    }
    touched.iter().all(|&x| x)
}

pub fn clustering(bits: &[bool], p: &ScheduleParams, min_run: usize) -> bool {
    let cycle = expand(bits, p.working_days, p.weeks);
    let n = cycle.len();
    if cycle.iter().all(|&b| !b) {
        return n >= min_run;
    }
    let origin = cycle.iter().position(|&b| b).unwrap();
    let mut run = 0;
    for k in 1..=n {
        if cycle[(origin + k) % n] {
            if run > 0 && run < min_run {
                return false;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    true
}

pub fn total_shifts(p: &ScheduleParams) -> usize {
    let exact = p.weeks as f64 * p.weekly_hours / p.shift_length;
    let floor = exact.floor();
    if (exact - floor).abs() < 1e-9 {
        floor as usize
    } else {
        floor as usize + 1
    }
}

/// All accepted bit patterns, ordered by their tuple of 1-positions.
pub fn phase1_brute_force(p: &ScheduleParams, cluster: bool) -> Vec<Vec<bool>> {
    let len = p.weeks * p.working_days;
    assert!(len <= 20, "oracle only for small cycles");
    let k = total_shifts(p);
    let mut accepted: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
    for mask in 0u32..(1u32 << len) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let bits: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
        let ok = coverage(&bits, p)
            && weekly_rest(&bits, p)
            && (!cluster || clustering(&bits, p, p.min_free_cluster));
        if ok {
            let ones = (0..len).filter(|&i| bits[i]).collect();
            accepted.push((ones, bits));
        }
    }
    accepted.sort();
    accepted.into_iter().map(|(_, b)| b).collect()
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u128; (n + 1) as usize];
    row[0] = 1;
    for i in 1..=n as usize {
        for j in (1..=i).rev() {
            row[j] += row[j - 1];
        }
    }
    row[k as usize]
}

/// Hour-level rest check on absolute clock times of the flattened cycle.
pub fn assignment_ok(cells: &[Cell], p: &ScheduleParams) -> bool {
    let n = cells.len();
    let period = n as f64 * 24.0;
    let shifts: Vec<(f64, f64)> = cells
        .iter()
        .enumerate()
        .filter_map(|(day, c)| {
            c.shift().map(|s| {
                let t = &p.shift_catalog[s as usize];
                let start = day as f64 * 24.0 + t.start_hour;
                (start, start + t.duration)
            })
        })
        .collect();
    for i in 0..shifts.len() {
        let (_, end) = shifts[i];
        let (next_start, _) = if i + 1 < shifts.len() {
            shifts[i + 1]
        } else {
            (shifts[0].0 + period, 0.0)
        };
        if next_start - end < p.min_rest_between_shifts - 1e-9 {
            return false;
        }
    }
    for day in 0..p.working_days {
        for s in 0..p.n_shift_types() {
            let count = (0..p.weeks)
                .filter(|&w| cells[w * 7 + day] == Cell::Shift(s as u8))
                .count();
            if (count as u32) < p.min_workers_per_shift {
                return false;
            }
        }
    }
    true
}

/// Every assignment of the open cells, counting in base N with the first
/// open cell most significant; returns accepted cell vectors in order.
pub fn phase2_brute_force(base: &[Cell], open: &[usize], p: &ScheduleParams) -> Vec<Vec<Cell>> {
    let radix = p.n_shift_types() as u64;
    let total = radix.pow(open.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut cells = base.to_vec();
        let mut rest = code;
        for &i in open.iter().rev() {
            cells[i] = Cell::Shift((rest % radix) as u8);
            rest /= radix;
        }
        if assignment_ok(&cells, p) {
            out.push(cells);
        }
    }
    out
}

mod common;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use rws_core::{
    solve, validate_assignment, AssignmentMatrix, BooleanShiftArray, Cell, ScheduleParams, ShiftType,
    SolveMethod, SolveRequest,
};

const STARTS: [f64; 4] = [6.0, 14.0, 22.0, 10.0];

#[derive(Debug, Clone)]
struct Instance {
    params: ScheduleParams,
    bits: Vec<bool>,
    pinned: Vec<(usize, usize, u8)>,
}

impl Instance {
    fn template(&self) -> AssignmentMatrix {
        let origin = BooleanShiftArray::for_params(self.bits.clone(), &self.params);
        let mut m = AssignmentMatrix::from_origin(origin, &self.params).unwrap();
        for &(r, c, s) in &self.pinned {
            m.set(r, c, s, self.params.n_shift_types()).unwrap();
        }
        m
    }

    fn request(&self, method: SolveMethod) -> SolveRequest {
        let mut req = SolveRequest::new(self.template(), self.params.clone()).with_method(method);
        req.pinned = self.pinned.iter().map(|&(r, c, _)| (r, c)).collect();
        req
    }

    fn open_cells(&self) -> Vec<usize> {
        let pinned: BTreeSet<usize> = self.pinned.iter().map(|&(r, c, _)| r * 7 + c).collect();
        self.template()
            .cells()
            .iter()
            .enumerate()
            .filter(|&(i, c)| c.is_working() && !pinned.contains(&i))
            .map(|(i, _)| i)
            .collect()
    }
}

fn instances() -> impl Strategy<Value = Instance> {
    (
        1usize..=3,
        1usize..=3,
        prop::sample::select(vec![5usize, 6, 7]),
        prop::sample::select(vec![6.0, 8.0, 8.33, 10.0]),
        prop::sample::select(vec![0.0, 8.0, 11.0, 16.0]),
        0u32..=1,
        any::<u64>(),
        any::<u64>(),
    )
        .prop_filter_map("search space too big", |(n, weeks, wd, ts, rest, workers, seed, pin_seed)| {
            let mut p = ScheduleParams::new(n, wd, weeks, ts, 0.0, 0.0);
            p.shift_catalog = (0..n)
                .map(|i| ShiftType::new(["D", "E", "N"][i], STARTS[i], ts))
                .collect();
            p.min_rest_between_shifts = rest;
            p.min_workers_per_shift = workers;
            let bits: Vec<bool> = (0..p.slots()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let mut pinned = Vec::new();
            for (slot, &on) in bits.iter().enumerate() {
                let h = pin_seed.rotate_left(slot as u32 * 7);
                if on && h % 5 == 0 {
                    pinned.push((slot / wd, slot % wd, ((h >> 8) % n as u64) as u8));
                }
            }
            let open = bits.iter().filter(|&&b| b).count() - pinned.len();
            ((n as f64).powi(open as i32) <= 1e5).then_some(Instance { params: p, bits, pinned })
        })
}

fn cell_sets(set: &rws_core::SolutionSet) -> Vec<Vec<Cell>> {
    set.solutions.iter().map(|m| m.cells().to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn methods_agree_with_brute_force(inst in instances()) {
        let cart = solve(&inst.request(SolveMethod::Cartesian)).unwrap();
        let rec = solve(&inst.request(SolveMethod::Recursive)).unwrap();
        let open = inst.open_cells();
        let mut base = inst.template().cells().to_vec();
        for &i in &open {
            base[i] = Cell::Shift(0);
        }
        let oracle = common::phase2_brute_force(&base, &open, &inst.params);
        prop_assert_eq!(&cell_sets(&cart), &oracle);
        prop_assert_eq!(&cell_sets(&rec), &oracle);
        let total = BigUint::from(inst.params.n_shift_types()).pow(open.len() as u32);
        prop_assert_eq!(&cart.candidates_examined, &total);
        prop_assert_eq!(&rec.candidates_examined, &total);
    }

    #[test]
    fn solutions_revalidate_and_rejects_do_not(inst in instances()) {
        let set = solve(&inst.request(SolveMethod::Cartesian)).unwrap();
        let accepted: BTreeSet<Vec<Cell>> = cell_sets(&set).into_iter().collect();
        prop_assert_eq!(accepted.len(), set.solutions.len());
        for m in &set.solutions {
            prop_assert_eq!(validate_assignment(m, &inst.params).unwrap().violations(), 0);
            for &(r, c, s) in &inst.pinned {
                prop_assert_eq!(m.get(r, c), Cell::Shift(s));
            }
        }
        let template = inst.template();
        let open = inst.open_cells();
        let n = inst.params.n_shift_types() as u64;
        for code in 0..n.pow(open.len() as u32) {
            let mut cells = template.cells().to_vec();
            let mut rest = code;
            for &i in open.iter().rev() {
                cells[i] = Cell::Shift((rest % n) as u8);
                rest /= n;
            }
            if accepted.contains(&cells) {
                continue;
            }
            let mut m = template.clone();
            for (i, c) in cells.iter().enumerate() {
                if let Cell::Shift(s) = c {
                    m.set(i / 7, i % 7, *s, n as usize).unwrap();
                }
            }
            prop_assert!(validate_assignment(&m, &inst.params).unwrap().violations() >= 1);
        }
    }

    #[test]
    fn tightening_never_enlarges(inst in instances(), extra_rest in 0.0f64..10.0, extra_workers in 0u32..2) {
        let loose = solve(&inst.request(SolveMethod::Cartesian)).unwrap();
        let mut tight_inst = inst.clone();
        tight_inst.params.min_rest_between_shifts += extra_rest;
        tight_inst.params.min_workers_per_shift += extra_workers;
        let tight = solve(&tight_inst.request(SolveMethod::Cartesian)).unwrap();
        let loose: BTreeSet<Vec<Cell>> = cell_sets(&loose).into_iter().collect();
        for s in cell_sets(&tight) {
            prop_assert!(loose.contains(&s));
        }
    }

    #[test]
    fn count_invariant_under_week_rotation(inst in instances(), by in 0usize..3) {
        let mut rotated = inst.clone();
        prop_assume!(rotated.pinned.is_empty());
        let wd = inst.params.working_days;
        rotated.bits.rotate_left((by % inst.params.weeks) * wd);
        let a = solve(&inst.request(SolveMethod::Cartesian)).unwrap();
        let b = solve(&rotated.request(SolveMethod::Cartesian)).unwrap();
        prop_assert_eq!(a.solutions.len(), b.solutions.len());
    }

    #[test]
    fn single_shift_type_has_one_assignment(inst in instances()) {
        let mut one = inst.clone();
        one.params.shift_catalog.truncate(1);
        one.params.min_workers_per_shift = 0;
        one.pinned.clear();
        let set = solve(&one.request(SolveMethod::Auto)).unwrap();
        prop_assert_eq!(&set.candidates_examined, &BigUint::from(1u32));
        prop_assert!(set.solutions.len() <= 1);
    }
}

fn day_evening(weeks: usize) -> ScheduleParams {
    let mut p = ScheduleParams::reference(2, 7, weeks);
    p.shift_catalog = vec![ShiftType::new("D", 6.0, 8.33), ShiftType::new("E", 14.0, 8.33)];
    p
}

#[test]
fn adjacent_pair_matches_four_case_enumeration() {
    let mut p = day_evening(1);
    p.min_workers_per_shift = 0;
    let origin = BooleanShiftArray::for_params(vec![true, true, false, false, false, false, false], &p);
    let template = AssignmentMatrix::from_origin(origin, &p).unwrap();

    // Monday/Tuesday: evening->day leaves 24 + 6 - 22.33 = 7.67 h, every
    // other pairing (and the wrap back to Monday) leaves at least 11 h.
    let mut expected = Vec::new();
    for mon in 0..2u8 {
        for tue in 0..2u8 {
            let mut cells = template.cells().to_vec();
            cells[0] = Cell::Shift(mon);
            cells[1] = Cell::Shift(tue);
            if common::assignment_ok(&cells, &p) {
                expected.push(cells);
            }
        }
    }
    assert_eq!(expected.len(), 3);
    for method in [SolveMethod::Cartesian, SolveMethod::Recursive] {
        let set = solve(&SolveRequest::new(template.clone(), p.clone()).with_method(method)).unwrap();
        assert_eq!(cell_sets(&set), expected, "{method:?}");
        assert_eq!(set.candidates_examined, BigUint::from(4u32));
        assert!(!set.solutions.iter().any(|m| m.get(0, 0) == Cell::Shift(1) && m.get(0, 1) == Cell::Shift(0)));
    }
}

#[test]
fn candidate_counts_for_fourteen_open_cells() {
    // 14 working days over three weeks; the first row pins nothing.
    let mut bits = vec![false; 21];
    for i in [0, 1, 2, 3, 4, 7, 8, 9, 10, 14, 15, 16, 17, 18] {
        bits[i] = true;
    }
    for (n, expected) in [(2usize, 16_384u64), (3, 4_782_969)] {
        let mut p = ScheduleParams::reference(n, 7, 3);
        p.min_workers_per_shift = 0;
        let origin = BooleanShiftArray::for_params(bits.clone(), &p);
        let template = AssignmentMatrix::from_origin(origin, &p).unwrap();
        let set = solve(&SolveRequest::new(template, p).with_method(SolveMethod::Cartesian)).unwrap();
        assert_eq!(set.candidates_examined, BigUint::from(expected));
    }
}

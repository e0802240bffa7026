mod common;

use num_bigint::BigUint;
use proptest::prelude::*;
use rws_core::{
    check_coverage, check_free_day_clustering, check_weekly_rest, derive_total_shifts, generate,
    total_combination_count, BooleanShiftArray, GenerationRequest, ScheduleParams,
};

fn small_params() -> impl Strategy<Value = (ScheduleParams, bool)> {
    (
        1usize..=3,
        1usize..=7,
        1usize..=4,
        prop::sample::select(vec![6.0, 8.0, 8.5, 10.0, 12.0]),
        prop::sample::select(vec![0.0, 8.0, 16.0, 24.0, 30.0, 36.0, 40.0]),
        prop::sample::select(vec![0.0, 11.0, 24.0, 36.0, 48.0, 60.0]),
        prop::sample::select(vec![0.0, 6.0, 8.0, 20.5]),
        1usize..=3,
        any::<bool>(),
    )
        .prop_filter_map(
            "cycle too long or infeasible",
            |(n, wd, weeks, ts, tw, tr, anchor, cluster, on)| {
                if wd * weeks > 16 {
                    return None;
                }
                let mut p = ScheduleParams::new(n, wd, weeks, ts, tw, tr);
                p.anchor_start_hour = anchor;
                p.min_free_cluster = cluster.min(7 * weeks);
                derive_total_shifts(&p).ok()?;
                Some((p, on))
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn full_generation_matches_brute_force((params, cluster) in small_params()) {
        let expected = common::phase1_brute_force(&params, cluster);
        let result = generate(&GenerationRequest::full(params.clone()).with_clustering(cluster)).unwrap();
        let got: Vec<Vec<bool>> = result.arrays.iter().map(|a| a.bits().to_vec()).collect();
        prop_assert_eq!(got, expected);
        let k = common::total_shifts(&params) as u64;
        let n = params.slots() as u64;
        prop_assert_eq!(result.combinations_examined, BigUint::from(common::binomial(n, k)));
        prop_assert_eq!(result.solutions_found, result.arrays.len());
        prop_assert!(!result.truncated);
    }

    #[test]
    fn fast_is_prefix_of_full((params, cluster) in small_params(), limit in 1usize..40) {
        let full = generate(&GenerationRequest::full(params.clone()).with_clustering(cluster)).unwrap();
        let fast = generate(
            &GenerationRequest::fast(params).with_clustering(cluster).with_fast_limit(limit),
        )
        .unwrap();
        let take = limit.min(full.arrays.len());
        prop_assert_eq!(&fast.arrays[..], &full.arrays[..take]);
        if fast.truncated {
            prop_assert_eq!(fast.solutions_found, limit);
        }
        prop_assert!(fast.combinations_examined <= full.combinations_examined);
    }

    #[test]
    fn emitted_arrays_repass_constraints((params, cluster) in small_params()) {
        let result = generate(&GenerationRequest::full(params.clone()).with_clustering(cluster)).unwrap();
        let k = derive_total_shifts(&params).unwrap();
        for a in &result.arrays {
            prop_assert_eq!(a.popcount(), k);
            prop_assert!(check_coverage(a, &params).unwrap());
            prop_assert!(check_weekly_rest(a, &params).unwrap());
            if cluster {
                prop_assert!(check_free_day_clustering(a, &params, params.min_free_cluster).unwrap());
            }
            prop_assert_eq!(a.fingerprint(), params.fingerprint());
        }
    }

    #[test]
    fn predicates_agree_with_oracle(
        (params, _) in small_params(),
        seed in any::<u64>(),
    ) {
        let len = params.slots();
        let bits: Vec<bool> = (0..len).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let a = BooleanShiftArray::for_params(bits.clone(), &params);
        prop_assert_eq!(check_coverage(&a, &params).unwrap(), common::coverage(&bits, &params));
        prop_assert_eq!(check_weekly_rest(&a, &params).unwrap(), common::weekly_rest(&bits, &params));
        for run in 1..=3 {
            prop_assert_eq!(
                check_free_day_clustering(&a, &params, run).unwrap(),
                common::clustering(&bits, &params, run)
            );
        }
    }

    #[test]
    fn clustering_invariant_under_week_rotation(
        weeks in 1usize..=4,
        wd in 1usize..=7,
        seed in any::<u64>(),
        run in 1usize..=4,
        by in 0usize..4,
    ) {
        let p = ScheduleParams::new(1, wd, weeks, 8.0, 0.0, 0.0);
        let len = p.slots();
        let bits: Vec<bool> = (0..len).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let mut rotated = bits.clone();
        rotated.rotate_left((by % weeks) * wd);
        let a = BooleanShiftArray::for_params(bits, &p);
        let b = BooleanShiftArray::for_params(rotated, &p);
        prop_assert_eq!(
            check_free_day_clustering(&a, &p, run).unwrap(),
            check_free_day_clustering(&b, &p, run).unwrap()
        );
    }

    #[test]
    fn binomial_symmetry(n in 0u64..200, k in 0u64..200) {
        prop_assume!(k <= n);
        prop_assert_eq!(total_combination_count(n, k).unwrap(), total_combination_count(n, n - k).unwrap());
    }
}

#[test]
fn pascal_rule_exhaustive_to_forty() {
    for n in 1..=40u64 {
        for k in 1..n {
            let lhs = total_combination_count(n, k).unwrap();
            let rhs = total_combination_count(n - 1, k - 1).unwrap() + total_combination_count(n - 1, k).unwrap();
            assert_eq!(lhs, rhs, "C({n},{k})");
        }
        assert_eq!(total_combination_count(n, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(total_combination_count(n, n).unwrap(), BigUint::from(1u32));
    }
}

#[test]
fn counts_beyond_sixty_four_bits() {
    let big = total_combination_count(120, 60).unwrap();
    assert_eq!(big.to_string(), common::binomial(120, 60).to_string());
    assert!(big > BigUint::from(u64::MAX));
}

#[test]
fn reference_two_week_matches_grid_oracle() {
    let params = ScheduleParams::reference(1, 7, 2);
    let expected = common::phase1_brute_force(&params, false);
    let result = generate(&GenerationRequest::full(params)).unwrap();
    let got: Vec<Vec<bool>> = result.arrays.iter().map(|a| a.bits().to_vec()).collect();
    assert_eq!(got, expected);
}

#[test]
fn fully_worked_single_week_cycle_is_rejected() {
    // Every working day taken and a rest demand longer than one off-shift gap.
    for (wd, ts) in [(7, 8.33), (5, 8.0)] {
        let mut p = ScheduleParams::new(1, wd, 1, ts, wd as f64 * ts, 24.0 - ts + 1.0);
        p.working_days = wd;
        let r = generate(&GenerationRequest::full(p.clone())).unwrap();
        assert_eq!(r.combinations_examined, BigUint::from(1u32));
        if wd == 7 {
            assert_eq!(r.solutions_found, 0);
        } else {
            // the weekend gives 72 - ts hours
            assert_eq!(r.solutions_found, 1);
        }
    }
}

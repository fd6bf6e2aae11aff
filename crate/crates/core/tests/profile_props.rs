mod common;

use common::*;
use mdmp::profile::ROW_BLOCK;
use mdmp::{mp_ab_join, mp_self_join, MultivariateSeries, Profile32, ProfileVariant};
use proptest::prelude::*;

fn assert_close(got: &[f64], want: &[f64]) {
    let err = max_abs_diff(got, want);
    assert!(err <= 1e-6, "error {err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn matches_tensor_oracle(seed in any::<u64>(), d in 1usize..4, m in 4usize..10, k in 1usize..4) {
        let mut r = rng(seed);
        let a = random_series(&mut r, 6 * m, d, m);
        let b = random_series(&mut r, 5 * m, d, m);
        for variant in ProfileVariant::ALL {
            let got = mp_ab_join(&a, &b, m, variant, k).unwrap();
            let want = oracle_profile(&a, &b, m, variant, k, false).unwrap();
            for (i, row) in want.values.iter().enumerate() {
                prop_assert!(max_abs_diff(got.values.row(i), row) <= 1e-6);
            }
            let got = mp_self_join(&a, m, variant, k).unwrap();
            let want = oracle_profile(&a, &a, m, variant, k, true).unwrap();
            for (i, row) in want.values.iter().enumerate() {
                prop_assert!(max_abs_diff(got.values.row(i), row) <= 1e-6);
            }
        }
    }

    #[test]
    fn structural_invariants(seed in any::<u64>(), d in 2usize..6, k in 1usize..3) {
        let m = 8;
        let s = random_series(&mut rng(seed), 150, d, m);
        let pre_sort = mp_self_join(&s, m, ProfileVariant::PRE_SORT, k).unwrap();
        let pre_max = mp_self_join(&s, m, ProfileVariant::PRE_MAX, k).unwrap();
        let post_sort = mp_self_join(&s, m, ProfileVariant::POST_SORT, k).unwrap();
        let post_max = mp_self_join(&s, m, ProfileVariant::POST_MAX, k).unwrap();
        prop_assert_eq!(pre_max.column(0).unwrap(), pre_sort.column(0).unwrap());
        prop_assert_eq!(post_max.column(0).unwrap(), post_sort.column(0).unwrap());
        prop_assert_eq!(pre_sort.width(), d);
        prop_assert_eq!(post_max.width(), 1);
        for row in post_sort.values.iter_rows() {
            prop_assert!(row.windows(2).all(|w| w[0] >= w[1]));
        }
        let dims = post_sort.source_dims.as_ref().unwrap();
        for r in dims.iter_rows() {
            let mut seen = r.to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..d).collect::<Vec<_>>());
        }
    }

    #[test]
    fn pre_dominates_post_for_nearest_neighbor(seed in any::<u64>(), d in 1usize..5) {
        let m = 8;
        let s = random_series(&mut rng(seed), 140, d, m);
        let pre = mp_self_join(&s, m, ProfileVariant::PRE_SORT, 1).unwrap().column(0).unwrap();
        let post = mp_self_join(&s, m, ProfileVariant::POST_SORT, 1).unwrap().column(0).unwrap();
        for (p, q) in pre.iter().zip(&post) {
            prop_assert!(p >= q);
        }
    }

    #[test]
    fn larger_k_never_lowers_the_profile(seed in any::<u64>(), d in 1usize..4) {
        let m = 6;
        let s = random_series(&mut rng(seed), 120, d, m);
        for variant in ProfileVariant::ALL {
            let mut last: Option<Vec<f64>> = None;
            for k in 1..=4 {
                let values = mp_self_join(&s, m, variant, k).unwrap().values.into_vec();
                if let Some(prev) = &last {
                    prop_assert!(values.iter().zip(prev).all(|(a, b)| a >= b), "{} k={}", variant, k);
                }
                last = Some(values);
            }
        }
    }
}

#[test]
fn univariate_variants_coincide() {
    let s = random_series(&mut rng(1), 200, 1, 10);
    let base = mp_self_join(&s, 10, ProfileVariant::PRE_MAX, 2).unwrap();
    for variant in ProfileVariant::ALL {
        let p = mp_self_join(&s, 10, variant, 2).unwrap();
        assert_close(p.values.as_slice(), base.values.as_slice());
        assert_eq!(p.indices, base.indices, "{variant}");
    }
}

#[test]
fn identical_for_any_thread_count() {
    let s = random_series(&mut rng(2), 2 * ROW_BLOCK + 300, 3, 16);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                ProfileVariant::ALL
                    .map(|v| mp_self_join(&s, 16, v, 2).unwrap())
                    .map(|p| (p.values.into_vec(), p.indices.into_vec()))
            })
    };
    let one = run(1);
    for threads in [2, 3, 5] {
        assert_eq!(run(threads), one, "{threads} threads");
    }
}

#[test]
fn profile_shapes() {
    let a = random_series(&mut rng(3), 120, 4, 8);
    let b = random_series(&mut rng(4), 90, 4, 8);
    let p = mp_ab_join(&a, &b, 8, ProfileVariant::PRE_SORT, 1).unwrap();
    assert_eq!((p.values.rows(), p.values.cols()), (113, 4));
    assert_eq!((p.indices.rows(), p.indices.cols()), (113, 4));
    assert!(p.indices.as_slice().iter().all(|&j| j < 83));
    assert!(p.source_dims.is_none());
}

#[test]
fn single_precision_profile() {
    let a = random_series(&mut rng(6), 200, 3, 10);
    let a32 = MultivariateSeries::from_columns(
        a.columns()
            .iter()
            .map(|c| c.iter().map(|&v| v as f32).collect())
            .collect(),
    )
    .unwrap();
    let p64 = mp_self_join(&a, 10, ProfileVariant::PRE_MAX, 1).unwrap();
    let p32: Profile32 = mp_self_join(&a32, 10, ProfileVariant::PRE_MAX, 1).unwrap();
    for (x, y) in p64.values.as_slice().iter().zip(p32.values.as_slice()) {
        assert!((x - f64::from(*y)).abs() < 1e-2);
    }
}

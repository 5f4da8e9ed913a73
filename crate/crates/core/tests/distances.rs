mod common;

use common::oracle::brute_force;
use proptest::prelude::*;
use sprocket::distances::{self, DistanceMeasure, MeasureKind};
use sprocket::dispatch;

fn series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
}

fn elastic() -> impl Strategy<Value = MeasureKind> {
    prop_oneof![
        Just(MeasureKind::Dtw),
        (0.01f64..1.0).prop_map(|g| MeasureKind::Wdtw { g }),
        (0.0f64..2.0).prop_map(|omega| MeasureKind::Adtw { omega }),
        (-1.0f64..1.0).prop_map(|gap| MeasureKind::Erp { gap }),
        (0.0f64..0.5, 0.0f64..2.0).prop_map(|(nu, lambda)| MeasureKind::Twe { nu, lambda }),
        (0.1f64..2.0).prop_map(|c| MeasureKind::Msm { c }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_enumeration(kind in elastic(), a in series(6), b in series(6), w in prop::option::of(0usize..4)) {
        let got = dispatch(&DistanceMeasure::new(kind, w), &a, &b).unwrap();
        let want = brute_force(&kind, &a, &b, w);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{kind:?} w={w:?}: {got} vs {want}");
    }

    #[test]
    fn symmetric_on_equal_lengths(kind in elastic(), (a, b) in (1usize..20).prop_flat_map(|n| (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n))), w in prop::option::of(0usize..5)) {
        let m = DistanceMeasure::new(kind, w);
        let ab = dispatch(&m, &a, &b).unwrap();
        let ba = dispatch(&m, &b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(dispatch(&m, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn band_is_monotone(kind in elastic(), a in series(12), b in series(12)) {
        let full = dispatch(&DistanceMeasure::new(kind, None), &a, &b).unwrap();
        let mut last = f64::INFINITY;
        for w in 0..=a.len().max(b.len()) {
            let d = dispatch(&DistanceMeasure::new(kind, Some(w)), &a, &b).unwrap();
            prop_assert!(d <= last + 1e-12, "w={w}: {d} > {last}");
            last = d;
        }
        prop_assert_eq!(last, full);
    }

    #[test]
    fn euclidean_triangle(v in (1usize..30).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), 3))) {
        let d = |x: &[f64], y: &[f64]| distances::euclidean(x, y).unwrap();
        prop_assert!(d(&v[0], &v[2]) <= d(&v[0], &v[1]) + d(&v[1], &v[2]) + 1e-9);
    }
}

#[test]
fn dtw_warping_example_matches_enumeration() {
    let a = [1.0, 2.0, 3.0];
    let b = [1.0, 2.0, 2.0, 3.0];
    assert_eq!(brute_force(&MeasureKind::Dtw, &a, &b, None), 0.0);
    assert_eq!(distances::dtw(&a, &b, None).unwrap(), 0.0);
}

#[test]
fn adtw_without_penalty_is_dtw() {
    let mut rng = common::rng(17);
    for _ in 0..100 {
        let a = common::random_vec(&mut rng, 15);
        let b = common::random_vec(&mut rng, 15);
        let w = Some(3);
        let x = distances::adtw(&a, &b, 0.0, w).unwrap();
        let y = distances::dtw(&a, &b, w).unwrap();
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn length_five_references() {
    let mut rng = common::rng(3);
    for _ in 0..50 {
        let a = common::random_vec(&mut rng, 5);
        let b = common::random_vec(&mut rng, 5);
        for kind in [MeasureKind::Wdtw { g: 0.05 }, MeasureKind::Twe { nu: 0.001, lambda: 1.0 }] {
            let got = dispatch(&DistanceMeasure::unbanded(kind), &a, &b).unwrap();
            assert!((got - brute_force(&kind, &a, &b, None)).abs() <= 1e-9);
        }
    }
}

#[test]
fn elastic_measures_cost_more_than_euclidean() {
    use std::time::Instant;
    let mut rng = common::rng(5);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..200)
        .map(|_| (common::random_vec(&mut rng, 300), common::random_vec(&mut rng, 300)))
        .collect();
    let time = |m: DistanceMeasure| {
        let mut ws = distances::CostMatrixWorkspace::new();
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let t = Instant::now();
            let mut acc = 0.0;
            for (a, b) in &pairs {
                acc += distances::dispatch_with(&m, a, b, &mut ws).unwrap();
            }
            std::hint::black_box(acc);
            best = best.min(t.elapsed().as_secs_f64());
        }
        best
    };
    let e = time(DistanceMeasure::unbanded(MeasureKind::Euclidean));
    let d = time(DistanceMeasure::new(MeasureKind::Dtw, Some(17)));
    assert!(d >= 20.0 * e, "dtw {d}s vs euclidean {e}s");
}

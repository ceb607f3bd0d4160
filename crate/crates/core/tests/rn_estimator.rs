use covshift_core::rn_estimator::{
    christoffel, clipped_values, covariance_spectrum, effective_dimension, estimate_beta, estimate_beta_with,
    kulsif_closed_form, lambda_star, n_infinity, ChristoffelProfile,
};
use covshift_core::{FilterSpec, KernelSpec, Point, SampleSet, SolveRoute};
use proptest::prelude::*;

mod common;

fn set(xs: &[f64]) -> SampleSet {
    SampleSet::from_scalars(xs.to_vec(), 0).unwrap()
}

fn gk(sigma: f64) -> KernelSpec {
    KernelSpec::gaussian(sigma).unwrap()
}

/// `<K_x, (lambda + T_N)^{-1} K_x>` solved in the coefficient space of the
/// joint span `{K(., x_1), ..., K(., x_N), K(., x)}`.
fn joint_span_christoffel(sigma: f64, xs: &[f64], x: f64, lambda: f64) -> f64 {
    let mut pts = xs.to_vec();
    pts.push(x);
    let g = common::gram_rows(sigma, &pts, &pts);
    let n = xs.len();
    let size = n + 1;
    let a: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let t = if i < n { g[i][j] / n as f64 } else { 0.0 };
                    t + if i == j { lambda } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let mut e = vec![0.0; size];
    e[n] = 1.0;
    let coef = common::dense_solve(&a, &e);
    (0..size).map(|j| g[n][j] * coef[j]).sum()
}

#[test]
fn single_point_examples() {
    let zero = set(&[0.0]);
    let tik = estimate_beta(&zero, &zero, &gk(1.0), FilterSpec::Tikhonov, 1.0).unwrap();
    assert!((tik.function.value(&[0.0]) - 0.5).abs() < 1e-15);
    let cut = estimate_beta(&zero, &zero, &gk(1.0), FilterSpec::SpectralCutoff, 0.5).unwrap();
    assert!((cut.function.value(&[0.0]) - 1.0).abs() < 1e-15);
    let ku = kulsif_closed_form(&zero, &zero, &gk(1.0), 1.0).unwrap();
    assert!((ku.function.value(&[0.0]) - 0.5).abs() < 1e-15);
    let far = kulsif_closed_form(&zero, &zero, &gk(1.0), 1e9).unwrap();
    assert!(far.function.value(&[0.0]).abs() < 1e-8);
    let p = Point::scalar(0.0).unwrap();
    assert!((christoffel(&zero, &gk(1.0), 1.0, &p).unwrap() - 0.5).abs() < 1e-15);
    assert!((effective_dimension(&zero, &gk(1.0), 1.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn errors() {
    let a = set(&[0.0, 1.0]);
    let empty = SampleSet::empty(1);
    assert!(estimate_beta(&a, &empty, &gk(1.0), FilterSpec::Tikhonov, 0.1).is_err());
    assert!(estimate_beta(&a, &a, &gk(1.0), FilterSpec::Tikhonov, 0.0).is_err());
    let two_d = SampleSet::new(2, vec![0.0, 0.0], None, 0).unwrap();
    assert!(estimate_beta(&a, &two_d, &gk(1.0), FilterSpec::Tikhonov, 0.1).is_err());
}

#[test]
fn clipping() {
    let k = gk(1.0);
    let src = set(&[0.0]);
    let est = estimate_beta(&src, &src, &k, FilterSpec::Tikhonov, 1.0).unwrap();
    let v = est.function.value(&[0.0]);
    let capped = est.clone().with_clip(0.0, Some(0.25 * v)).unwrap();
    assert_eq!(clipped_values(&capped, &set(&[0.0])).unwrap(), vec![0.25 * v]);
    let floored = est.clone().with_clip(2.0 * v, None).unwrap();
    assert_eq!(clipped_values(&floored, &set(&[0.0])).unwrap(), vec![2.0 * v]);
    assert_eq!(clipped_values(&est, &set(&[0.0])).unwrap(), vec![v]);
    assert!(clipped_values(&est, &SampleSet::empty(1)).unwrap().is_empty());
    assert!(est.clone().with_clip(-1.0, None).is_err());
    assert!(est.with_clip(1.0, Some(0.5)).is_err());
}

#[test]
fn filters_agree_across_routes() {
    let src = set(&common::uniform_draws(30, -1.0, 1.0, 5));
    let tgt = set(&common::uniform_draws(25, -0.5, 1.0, 6));
    let probes = set(&common::uniform_draws(50, -1.0, 1.0, 7));
    for f in [FilterSpec::Tikhonov, FilterSpec::IteratedTikhonov { order: 3 }] {
        let a = estimate_beta_with(&src, &tgt, &gk(0.5), f, 0.05, SolveRoute::Spectral).unwrap();
        let b = estimate_beta_with(&src, &tgt, &gk(0.5), f, 0.05, SolveRoute::Factored).unwrap();
        let va = a.function.values(&probes).unwrap();
        let vb = b.function.values(&probes).unwrap();
        assert!(common::max_abs_diff(&va, &vb) < 1e-8 * common::max_abs(&va).max(1.0));
    }
}

#[test]
fn christoffel_large_lambda_limit() {
    let src = set(&common::uniform_draws(15, -1.0, 1.0, 9));
    let p = Point::scalar(0.3).unwrap();
    let lambda = 1e6;
    let c = christoffel(&src, &gk(1.0), lambda, &p).unwrap();
    assert!((c * lambda - 1.0).abs() < 1e-5);
}

#[test]
fn christoffel_joint_span_oracle() {
    for seed in 0..5 {
        let xs = common::uniform_draws(20, -1.0, 1.0, seed);
        let src = set(&xs);
        for lambda in [1.0, 0.1, 0.01] {
            let k = gk(0.6);
            let prof = ChristoffelProfile::new(&src, &k, lambda).unwrap();
            for x in [-0.9, 0.0, 0.45, 1.3] {
                let want = joint_span_christoffel(0.6, &xs, x, lambda);
                let got = prof.at(&[x]);
                assert!((got - want).abs() < 1e-9 * want.max(1.0), "seed {seed} lambda {lambda} x {x}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn n_infinity_is_probe_maximum() {
    let src = set(&common::uniform_draws(20, -1.0, 1.0, 3));
    let k = gk(0.5);
    let single = set(&[0.2]);
    let c = christoffel(&src, &k, 0.1, &Point::scalar(0.2).unwrap()).unwrap();
    assert_eq!(n_infinity(&src, &k, 0.1, &single).unwrap(), c);
    let same = set(&[0.2, 0.2, 0.2]);
    assert_eq!(n_infinity(&src, &k, 0.1, &same).unwrap(), c);
    let grid = set(&(0..201).map(|i| -1.0 + i as f64 / 100.0).collect::<Vec<_>>());
    let prof = ChristoffelProfile::new(&src, &k, 0.1).unwrap();
    let want = grid.iter().map(|x| prof.at(x)).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(n_infinity(&src, &k, 0.1, &grid).unwrap(), want);
}

#[test]
fn effective_dimension_limits_and_spectrum() {
    let xs: Vec<f64> = (0..10).map(|i| -1.0 + 0.2 * i as f64).collect();
    let src = set(&xs);
    let k = gk(0.3);
    let spec = covariance_spectrum(&src, &k).unwrap();
    assert_eq!(spec.len(), 10);
    let from_spectrum: f64 = spec.iter().map(|m| m / (m + 0.01)).sum();
    assert!((effective_dimension(&src, &k, 0.01).unwrap() - from_spectrum).abs() < 1e-10);
    assert!((effective_dimension(&src, &k, 1e-13).unwrap() - 10.0).abs() < 1e-6);
    assert!(effective_dimension(&src, &k, 1e9).unwrap() < 1e-8);
    let ls = lambda_star(&src, &k).unwrap();
    let ratio = effective_dimension(&src, &k, ls).unwrap() / ls;
    assert!((ratio / 10.0 - 1.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn general_tikhonov_matches_closed_form(
        n in 1usize..=60,
        m in 1usize..=60,
        seed in 0u64..10_000,
        li in 0usize..3,
    ) {
        let lambda = [1.0, 0.1, 0.01][li];
        let src = set(&common::uniform_draws(n, -1.0, 1.0, seed));
        let tgt = set(&common::uniform_draws(m, -0.5, 1.0, seed + 1));
        let probes = set(&common::uniform_draws(100, -1.2, 1.2, seed + 2));
        let k = gk(0.5);
        let a = estimate_beta(&src, &tgt, &k, FilterSpec::Tikhonov, lambda).unwrap();
        let b = kulsif_closed_form(&src, &tgt, &k, lambda).unwrap();
        let va = a.function.values(&probes).unwrap();
        let vb = b.function.values(&probes).unwrap();
        prop_assert!(common::max_abs_diff(&va, &vb) <= 1e-8);
    }

    #[test]
    fn capacity_is_monotone_and_bounded(seed in 0u64..10_000, x in -1.5f64..1.5, le in -4.0f64..1.0) {
        let src = set(&common::uniform_draws(15, -1.0, 1.0, seed));
        let k = gk(0.5);
        let (l1, l2) = (10f64.powf(le), 10f64.powf(le + 0.3));
        let p = Point::scalar(x).unwrap();
        let c1 = christoffel(&src, &k, l1, &p).unwrap();
        let c2 = christoffel(&src, &k, l2, &p).unwrap();
        prop_assert!(c1 > c2);
        prop_assert!(c1 > 0.0 && c1 <= 1.0 / l1 * (1.0 + 1e-12));
        prop_assert!(effective_dimension(&src, &k, l1).unwrap() > effective_dimension(&src, &k, l2).unwrap());
    }
}

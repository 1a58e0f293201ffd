mod common;

use common::fixtures::{rng, uniform};
use common::stats;
use proptest::prelude::*;
use qsf_core::evalstats::{
    cohens_d, convergence_epoch, ln_gamma, mae, mape, mse, r2, rmse, stability, student_t_two_sided_p, t_test,
    MetricReport, StatTestResult, TestKind,
};
use qsf_core::training::EpochHistory;
use rand::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn t_tests_match_textbook_formulas() {
    let mut r = rng(40);
    for _ in 0..100 {
        let n1 = r.random_range(2..30);
        let paired = r.random_bool(0.5);
        let n2 = if paired { n1 } else { r.random_range(2..30) };
        let shift = r.random_range(-0.5..0.5);
        let a = uniform(&mut r, n1, -1.0, 1.0);
        let b: Vec<f64> = uniform(&mut r, n2, -1.0, 1.0).iter().map(|v| v + shift).collect();
        let (kind, (t, df)) = if paired {
            (TestKind::Paired, stats::paired_t(&a, &b))
        } else {
            (TestKind::PooledIndependent, stats::pooled_t(&a, &b))
        };
        let got = t_test(&a, &b, kind).unwrap();
        assert!(close(got.t_statistic, t, 1e-9), "{} vs {t}", got.t_statistic);
        assert_eq!(got.df, df);
        assert!(close(got.cohens_d, stats::cohens_d(&a, &b), 1e-9));
        let p = stats::two_sided_p(t, df);
        assert!((got.p_value - p).abs() < 1e-9, "t={t} df={df}: {} vs {p}", got.p_value);
        assert_eq!((got.n1, got.n2), (n1, n2));
    }
}

#[test]
fn degenerate_samples() {
    let a = [0.25, 0.5, 0.75];
    for kind in [TestKind::Paired, TestKind::PooledIndependent] {
        let r = t_test(&a, &a, kind).unwrap();
        assert_eq!((r.t_statistic, r.p_value, r.cohens_d), (0.0, 1.0, 0.0));
    }
    let r = t_test(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0], TestKind::Paired).unwrap();
    assert_eq!((r.t_statistic, r.p_value), (f64::INFINITY, 0.0));
    let r = t_test(&[1.0, 1.0], &[2.0, 2.0], TestKind::PooledIndependent).unwrap();
    assert_eq!((r.t_statistic, r.p_value, r.cohens_d), (f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY));

    assert!(t_test(&[1.0], &[1.0, 2.0], TestKind::PooledIndependent).is_err());
    assert!(t_test(&[1.0, 2.0], &[1.0, 2.0, 3.0], TestKind::Paired).is_err());
    assert!(t_test(&[1.0, f64::NAN], &[1.0, 2.0], TestKind::Paired).is_err());
    assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap(), -2.0);
}

#[test]
fn infinite_statistics_survive_json() {
    let r = t_test(&[1.0, 1.0], &[2.0, 2.0], TestKind::PooledIndependent).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("\"-Infinity\""), "{s}");
    let back: StatTestResult = serde_json::from_str(&s).unwrap();
    assert_eq!(back, r);
}

#[test]
fn p_values_at_known_points() {
    // df = 1 is Cauchy: P(|T| > 1) = 1/2
    assert!((student_t_two_sided_p(1.0, 1.0) - 0.5).abs() < 1e-12);
    // df = 2: P(|T| > t) = 1 - t / sqrt(2 + t^2)
    for t in [0.3, 1.0, 4.0, 25.0] {
        let want = 1.0 - t / (2.0f64 + t * t).sqrt();
        assert!((student_t_two_sided_p(t, 2.0) - want).abs() < 1e-12);
    }
    assert_eq!(student_t_two_sided_p(0.0, 7.0), 1.0);
    assert_eq!(student_t_two_sided_p(f64::NEG_INFINITY, 7.0), 0.0);
    for x in [0.5, 1.0, 3.5, 10.0, 17.0] {
        assert!((ln_gamma(x) - stats::ln_gamma_exact(x)).abs() < 1e-12);
    }
}

#[test]
fn p_values_match_trapezoid_integration() {
    let mut r = rng(41);
    for _ in 0..100 {
        let t: f64 = r.random_range(-6.0..6.0);
        let df = f64::from(r.random_range(1..=40u32));
        let want = stats::two_sided_p_trapezoid(t, df, 1e-4);
        let got = student_t_two_sided_p(t, df);
        assert!((got - want).abs() < 1e-6, "t={t} df={df}: {got} vs {want}");
    }
}

#[test]
fn metric_examples() {
    let y = [1.0, 2.0, 3.0, 4.0];
    let p = [1.5, 2.0, 2.0, 4.0];
    assert!((mae(&y, &p).unwrap() - 0.375).abs() < 1e-15);
    assert!((mse(&y, &p).unwrap() - 0.3125).abs() < 1e-15);
    assert!((rmse(&y, &p).unwrap() - 0.3125f64.sqrt()).abs() < 1e-15);
    let want_mape = 100.0 * (0.5 + 0.0 + 1.0 / 3.0 + 0.0) / 4.0;
    assert!((mape(&y, &p).unwrap().unwrap() - want_mape).abs() < 1e-12);
    assert!((r2(&y, &p).unwrap().unwrap() - (1.0 - 1.25 / 5.0)).abs() < 1e-12);
    assert_eq!(mape(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), None);
    assert_eq!(r2(&[2.0, 2.0], &[1.0, 1.0]).unwrap(), None);
    assert!(mse(&y, &p[..3]).is_err());

    let basic = MetricReport::compute(&y, &p, false).unwrap();
    assert_eq!((basic.mape, basic.r2), (None, None));
    let json = serde_json::to_string(&basic).unwrap();
    assert!(!json.contains("mape"));
    assert!(MetricReport::compute(&y, &p, true).unwrap().r2.is_some());
}

#[test]
fn stability_and_convergence() {
    let mut h = EpochHistory::default();
    for (a, b) in [(4.0, 5.0), (2.0, 3.0), (1.0, 1.0), (1.0, 1.02)] {
        h.push(a, b, 0.0);
    }
    let s = stability(&h).unwrap();
    assert!((s.test_loss_sd - stats::var(&h.test_loss).sqrt()).abs() < 1e-15);
    assert!((s.train_loss_sd - stats::var(&h.train_loss).sqrt()).abs() < 1e-15);
    assert!((s.mean_test_loss - 2.505).abs() < 1e-12);
    assert!((s.median_test_loss - 2.01).abs() < 1e-12);
    assert_eq!(convergence_epoch(&h.test_loss).unwrap(), 3);
    assert_eq!(convergence_epoch(&[1.0, 0.5, 0.504, 0.5]).unwrap(), 2);
    assert_eq!(convergence_epoch(&[0.0101, 0.0100]).unwrap(), 1);
    assert!(convergence_epoch(&[]).is_err());

    let mut one = EpochHistory::default();
    one.push(1.0, 1.0, 0.0);
    assert!(stability(&one).is_err());
}

proptest! {
    #[test]
    fn statistics_are_translation_and_scale_invariant(
        seed in any::<u64>(),
        n in 3usize..20,
        shift in -100.0f64..100.0,
        scale in 0.01f64..100.0,
    ) {
        let mut r = rng(seed);
        let a = uniform(&mut r, n, 0.0, 1.0);
        let b = uniform(&mut r, n, 0.2, 1.2);
        let map = |x: &[f64]| x.iter().map(|v| v * scale + shift).collect::<Vec<_>>();
        for kind in [TestKind::Paired, TestKind::PooledIndependent] {
            let base = t_test(&a, &b, kind).unwrap();
            let moved = t_test(&map(&a), &map(&b), kind).unwrap();
            prop_assert!(close(moved.t_statistic, base.t_statistic, 1e-7));
            prop_assert!(close(moved.cohens_d, base.cohens_d, 1e-7));
            prop_assert!((moved.p_value - base.p_value).abs() < 1e-7);
        }
    }

    #[test]
    fn p_value_is_a_probability_and_symmetric(t in -50.0f64..50.0, df in 1.0f64..200.0) {
        let p = student_t_two_sided_p(t, df);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p, student_t_two_sided_p(-t, df));
        prop_assert!(student_t_two_sided_p(t.abs() + 0.5, df) <= p);
    }
}

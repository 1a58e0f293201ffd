mod common;

use common::dense;
use common::fd::{central, rel_err};
use common::fixtures::{random_vqc, rng, uniform};
use qsf_core::vqc::{
    encode_features, prepare_state, vqc_forward, vqc_gradient, VqcParams, VqcShape,
};

#[test]
fn forward_matches_kronecker_oracle() {
    let mut r = rng(10);
    for _ in 0..40 {
        let (x, p, s) = random_vqc(&mut r, 3, 3);
        let got = vqc_forward(&x, &p).unwrap();
        let want = dense::vqc(&x, p.angles(), s);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b} for {s:?}");
            assert!(a.abs() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn one_qubit_encoding_examples() {
    let angles = encode_features(&[1.0, -1.0, 0.0]).unwrap();
    let q = std::f64::consts::FRAC_PI_4;
    assert_eq!(angles.ry, vec![q, -q, 0.0]);
    assert_eq!(angles.rz, vec![q, q, 0.0]);
    assert!(encode_features(&[f64::NAN]).is_err());

    // RZ(pi/4) RY(pi/4) H |0> by hand: <Z> = -sin(pi/4)
    let s = prepare_state(&encode_features(&[1.0]).unwrap()).unwrap();
    let m = dense::rz(q).apply(&dense::ry(q).apply(&dense::h().apply(&dense::zero_state(1))));
    assert!((s.expectation_z(0).unwrap() - dense::expect_z(&m, 0)).abs() < 1e-12);
    assert!((s.expectation_z(0).unwrap() + q.sin()).abs() < 1e-12);

    let p = VqcParams::zeros(VqcShape::new(1, 1, 3).unwrap());
    assert!((vqc_forward(&[1.0], &p).unwrap()[0] + 0.5f64.sqrt()).abs() < 1e-12);
    let p = VqcParams::zeros(VqcShape::new(2, 1, 3).unwrap());
    for z in vqc_forward(&[0.0f64, 0.0], &p).unwrap() {
        assert!(z.abs() < 1e-12);
    }
}

#[test]
fn shift_rule_matches_finite_differences() {
    let mut r = rng(11);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, p, _) = random_vqc(&mut r, 4, 3);
        let g = vqc_gradient(&x, &p).unwrap();
        let n = x.len();
        for out in 0..n {
            for k in 0..p.angles().len() {
                let numeric = central(
                    |t| {
                        let mut q = p.clone();
                        q.angles_mut()[k] = t;
                        vqc_forward(&x, &q).unwrap()[out]
                    },
                    p.angles()[k],
                    h,
                );
                worst = worst.max(rel_err(g.d_param(out, k), numeric, 1e-8));
            }
            for j in 0..n {
                let numeric = central(
                    |t| {
                        let mut y = x.clone();
                        y[j] = t;
                        vqc_forward(&y, &p).unwrap()[out]
                    },
                    x[j],
                    h,
                );
                worst = worst.max(rel_err(g.d_feature(out, j), numeric, 1e-8));
            }
        }
    }
    assert!(worst < 1e-5, "worst relative error {worst:e}");
}

#[test]
fn gradient_is_bitwise_repeatable() {
    let mut r = rng(12);
    let (x, p, _) = random_vqc(&mut r, 4, 2);
    let a = vqc_gradient(&x, &p).unwrap();
    let b = vqc_gradient(&x, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.outputs, vqc_forward(&x, &p).unwrap());
}

#[test]
fn encoding_is_monotone_and_saturates() {
    let mut r = rng(13);
    let mut xs = uniform(&mut r, 200, -50.0, 50.0);
    xs.sort_by(f64::total_cmp);
    let ry = encode_features(&xs).unwrap().ry;
    assert!(ry.windows(2).all(|w| w[0] <= w[1]));
    let far = encode_features(&[1e12, -1e12]).unwrap().ry;
    assert!((far[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    assert!((far[1] + std::f64::consts::FRAC_PI_2).abs() < 1e-11);
}

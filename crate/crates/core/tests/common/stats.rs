//! Textbook t-test formulas and a p-value from direct integration of the
//! Student-t density.

use std::f64::consts::PI;

pub fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

pub fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m) * (v - m);
    }
    s / (x.len() as f64 - 1.0)
}

pub fn pooled_sd(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    (((n1 - 1.0) * var(a) + (n2 - 1.0) * var(b)) / (n1 + n2 - 2.0)).sqrt()
}

pub fn cohens_d(a: &[f64], b: &[f64]) -> f64 {
    (mean(a) - mean(b)) / pooled_sd(a, b)
}

/// `(t, df)` of the pooled two-sample test.
pub fn pooled_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let t = (mean(a) - mean(b)) / (pooled_sd(a, b) * (1.0 / n1 + 1.0 / n2).sqrt());
    (t, n1 + n2 - 2.0)
}

/// `(t, df)` of the paired test on `a - b`.
pub fn paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    (mean(&d) / (var(&d).sqrt() / n.sqrt()), n - 1.0)
}

/// `ln Gamma(x)` for positive integer or half-integer `x`, by the recurrence
/// `Gamma(x + 1) = x Gamma(x)` from `Gamma(1) = 1` or `Gamma(1/2) = sqrt(pi)`.
pub fn ln_gamma_exact(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && x > 0.0, "unsupported argument {x}");
    let (mut acc, mut z) = if twice as i64 % 2 == 0 {
        (0.0, 1.0)
    } else {
        (0.5 * PI.ln(), 0.5)
    };
    while z < x - 0.25 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

pub fn t_density(t: f64, df: f64) -> f64 {
    let ln_k = ln_gamma_exact((df + 1.0) / 2.0) - ln_gamma_exact(df / 2.0) - 0.5 * (df * PI).ln();
    (ln_k - (df + 1.0) / 2.0 * (t * t / df).ln_1p()).exp()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Two-sided `P(|T| >= |t|)`. For `|t| <= 1` this is `1 - 2 int_0^|t|`;
/// beyond, the tail `int_|t|^inf` is mapped onto `(0, 1]` with `s = |t| / u`.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    let a = t.abs();
    if a == 0.0 {
        return 1.0;
    }
    if a.is_infinite() {
        return 0.0;
    }
    const STEPS: usize = 20_000;
    if a <= 1.0 {
        return 1.0 - 2.0 * simpson(|s| t_density(s, df), 0.0, a, STEPS);
    }
    let g = |u: f64| {
        if u == 0.0 {
            // the integrand tends to a constant only for df = 1
            if df == 1.0 {
                1.0 / (PI * a)
            } else {
                0.0
            }
        } else {
            t_density(a / u, df) * a / (u * u)
        }
    };
    2.0 * simpson(g, 0.0, 1.0, STEPS)
}

/// Same tail by the trapezoid rule on `[0, |t|]` with step `h`.
pub fn two_sided_p_trapezoid(t: f64, df: f64, h: f64) -> f64 {
    let a = t.abs();
    let n = (a / h).ceil().max(1.0) as usize;
    let step = a / n as f64;
    let mut s = 0.5 * (t_density(0.0, df) + t_density(a, df));
    for k in 1..n {
        s += t_density(k as f64 * step, df);
    }
    1.0 - 2.0 * s * step
}

use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided_p;
use super::{mean, sample_variance};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Paired,
    PooledIndependent,
}

/// Outcome of a two-sided t-test. Infinite `t_statistic` / `cohens_d` mark
/// zero-variance samples with differing means and serialize as the strings
/// `"Infinity"` / `"-Infinity"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    #[serde(with = "sentinel")]
    pub t_statistic: f64,
    pub p_value: f64,
    /// Pooled-SD effect size, reported for both test kinds.
    #[serde(with = "sentinel")]
    pub cohens_d: f64,
    pub n1: usize,
    pub n2: usize,
    pub df: f64,
    pub kind: TestKind,
}

pub(crate) mod sentinel {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "Infinity" } else { "-Infinity" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "Infinity" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-Infinity" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("unexpected value '{s}'"))),
        }
    }
}

fn check_len(a: &[f64], what: &str) -> Result<()> {
    if a.len() < 2 {
        return Err(Error::Data(format!("{what} needs at least 2 values, got {}", a.len())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("{what} contains non-finite values")));
    }
    Ok(())
}

fn pooled_sd(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    (((n1 - 1.0) * sample_variance(a) + (n2 - 1.0) * sample_variance(b)) / (n1 + n2 - 2.0)).sqrt()
}

/// `num / den` with the zero-denominator rule: 0 when `num` is 0, else +-inf.
fn degenerate_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        num.signum() * f64::INFINITY
    }
}

/// Standardized mean difference `(mean(a) - mean(b)) / s_p`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, "first sample")?;
    check_len(b, "second sample")?;
    Ok(degenerate_ratio(mean(a) - mean(b), pooled_sd(a, b)))
}

/// Two-sided t-test of `a` against `b`.
pub fn t_test(a: &[f64], b: &[f64], kind: TestKind) -> Result<StatTestResult> {
    check_len(a, "first sample")?;
    check_len(b, "second sample")?;
    let (t, df) = match kind {
        TestKind::Paired => {
            if a.len() != b.len() {
                return Err(Error::Data(format!(
                    "paired samples differ in length: {} vs {}",
                    a.len(),
                    b.len()
                )));
            }
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let n = d.len() as f64;
            let se = (sample_variance(&d) / n).sqrt();
            (degenerate_ratio(mean(&d), se), n - 1.0)
        }
        TestKind::PooledIndependent => {
            let (n1, n2) = (a.len() as f64, b.len() as f64);
            let se = pooled_sd(a, b) * (1.0 / n1 + 1.0 / n2).sqrt();
            (degenerate_ratio(mean(a) - mean(b), se), n1 + n2 - 2.0)
        }
    };
    Ok(StatTestResult {
        t_statistic: t,
        p_value: student_t_two_sided_p(t, df),
        cohens_d: cohens_d(a, b)?,
        n1: a.len(),
        n2: b.len(),
        df,
        kind,
    })
}

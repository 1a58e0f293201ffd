//! Error metrics, t-tests, effect sizes and loss-curve summaries.

mod special;
mod ttest;

use serde::{Deserialize, Serialize};

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_sided_p};
pub use ttest::{cohens_d, t_test, StatTestResult, TestKind};

use crate::error::{Error, Result};
use crate::training::EpochHistory;

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased (n - 1) variance.
pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn residuals(y: &[f64], y_hat: &[f64]) -> Result<Vec<f64>> {
    if y.len() != y_hat.len() {
        return Err(Error::Data(format!(
            "{} targets against {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Data("metrics of an empty set".into()));
    }
    Ok(y.iter().zip(y_hat).map(|(a, b)| a - b).collect())
}

pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    let r = residuals(y, y_hat)?;
    Ok(r.iter().map(|v| v.abs()).sum::<f64>() / r.len() as f64)
}

pub fn mse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    let r = residuals(y, y_hat)?;
    Ok(r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64)
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    Ok(mse(y, y_hat)?.sqrt())
}

/// Mean absolute percentage error in percent, over the targets that are not
/// zero. `None` when every target is zero.
pub fn mape(y: &[f64], y_hat: &[f64]) -> Result<Option<f64>> {
    residuals(y, y_hat)?;
    let terms: Vec<f64> = y
        .iter()
        .zip(y_hat)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, b)| ((a - b) / a).abs())
        .collect();
    Ok((!terms.is_empty()).then(|| 100.0 * mean(&terms)))
}

/// Coefficient of determination. `None` for constant targets.
pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<Option<f64>> {
    let r = residuals(y, y_hat)?;
    let m = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    let ss_res: f64 = r.iter().map(|v| v * v).sum();
    Ok((ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
}

impl MetricReport {
    /// MAE, MSE and RMSE; MAPE and R^2 as well when `extended`.
    pub fn compute(y: &[f64], y_hat: &[f64], extended: bool) -> Result<Self> {
        let mse = mse(y, y_hat)?;
        let (mape, r2) = if extended {
            (mape(y, y_hat)?, r2(y, y_hat)?)
        } else {
            (None, None)
        };
        Ok(Self {
            mae: mae(y, y_hat)?,
            mse,
            rmse: mse.sqrt(),
            mape,
            r2,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub train_loss_sd: f64,
    pub test_loss_sd: f64,
    pub mean_test_loss: f64,
    pub median_test_loss: f64,
}

fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Spread and centre of the loss curves.
pub fn stability(history: &EpochHistory) -> Result<StabilityReport> {
    if history.len() < 2 {
        return Err(Error::Data(format!(
            "stability needs at least 2 epochs, got {}",
            history.len()
        )));
    }
    Ok(StabilityReport {
        train_loss_sd: sample_variance(&history.train_loss).sqrt(),
        test_loss_sd: sample_variance(&history.test_loss).sqrt(),
        mean_test_loss: mean(&history.test_loss),
        median_test_loss: median(&history.test_loss),
    })
}

/// First epoch (1-based) whose loss is within 1% of the series minimum.
pub fn convergence_epoch(losses: &[f64]) -> Result<usize> {
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Data("convergence epoch of an empty or non-finite series".into()));
    }
    let bound = min + 0.01 * min.abs();
    Ok(losses.iter().position(|&v| v <= bound).expect("the minimum qualifies") + 1)
}

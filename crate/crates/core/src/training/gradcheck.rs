use super::{batch_gradient, dropout_seed, mse_loss};
use crate::datapipe::WindowedDataset;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::recurrent::{Mode, StackModel};
use crate::scalar::Scalar;

/// Largest model the checker accepts.
pub const MAX_CHECKED_PARAMS: usize = 500;

/// Gradient magnitude below which errors are measured absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// `max |a - n| / max(|a|, |n|, RELATIVE_FLOOR)` over all entries.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Tensor name and entry index of the worst relative error.
    pub worst: (String, usize),
    pub n_params: usize,
}

fn batch_loss<T: Scalar>(model: &StackModel<T>, ds: &WindowedDataset, indices: &[usize], seed: u64) -> Result<f64> {
    let mut preds = Vec::with_capacity(indices.len());
    let mut targets = Vec::with_capacity(indices.len());
    for &k in indices {
        preds.push(model.predict(&ds.sample_as::<T>(k), Mode::Train, dropout_seed(seed, 0, k))?.as_f64());
        targets.push(ds.targets()[k]);
    }
    mse_loss(&preds, &targets)
}

/// Compares the analytic gradient of the batch MSE against central
/// differences with step `h`. Dropout masks are fixed by `seed`, which keeps
/// the objective smooth in the parameters.
pub fn grad_check<T: Scalar>(
    model: &StackModel<T>,
    ds: &WindowedDataset,
    indices: &[usize],
    h: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let n_params = model.params.n_params();
    if n_params > MAX_CHECKED_PARAMS {
        return Err(Error::Config(format!(
            "{n_params} parameters exceed the gradient-check limit of {MAX_CHECKED_PARAMS}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("invalid finite-difference step {h}")));
    }
    let (_, analytic) = batch_gradient(model, ds, indices, Mode::Train, |k| dropout_seed(seed, 0, k))?;
    let analytic: Vec<(String, Vec<f64>)> = analytic
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.iter().map(|v| v.as_f64()).collect()))
        .collect();

    let mut probe = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst: (String::new(), 0),
        n_params,
    };
    for (t, (name, grad)) in analytic.iter().enumerate() {
        for (i, &a) in grad.iter().enumerate() {
            let original = probe.params.named_tensors()[t].1[i];
            probe.params.named_tensors_mut()[t].1[i] = original + T::lit(h);
            let plus = batch_loss(&probe, ds, indices, seed)?;
            probe.params.named_tensors_mut()[t].1[i] = original - T::lit(h);
            let minus = batch_loss(&probe, ds, indices, seed)?;
            probe.params.named_tensors_mut()[t].1[i] = original;

            let numeric = (plus - minus) / (2.0 * h);
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
            report.max_abs_error = report.max_abs_error.max(abs);
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = (name.clone(), i);
            }
        }
    }
    Ok(report)
}

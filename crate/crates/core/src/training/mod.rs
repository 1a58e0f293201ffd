//! MSE objective, Adam, the seeded epoch loop and gradient verification.
//!
//! Per-sample gradients inside a batch may be computed on several threads;
//! they are always reduced in sample order, so results do not depend on the
//! thread count. Dropout masks are seeded per (epoch, sample).

mod adam;
mod gradcheck;
mod history;

use std::time::Instant;

use rayon::prelude::*;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{grad_check, GradCheckReport};
pub use history::EpochHistory;

use crate::datapipe::{batch_indices, WindowedDataset};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::recurrent::{Mode, StackModel, StackParams};
use crate::rng::{derive_seed, STREAM_DROPOUT, STREAM_SHUFFLE};
use crate::scalar::Scalar;

/// Mean of squared residuals.
pub fn mse_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Data("mse of an empty set".into()));
    }
    let sum: T = pred.iter().zip(target).map(|(&p, &y)| (p - y) * (p - y)).sum();
    Ok(sum / T::from_usize(pred.len()).expect("length fits the scalar"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Zero is accepted and freezes the parameters.
    pub lr: f64,
    pub seed: u64,
    pub shuffle_train: bool,
    /// When false every wall-time entry is recorded as 0.
    pub record_wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            lr: 0.001,
            seed: 42,
            shuffle_train: true,
            record_wall_clock: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("invalid learning rate {}", self.lr)));
        }
        Ok(())
    }
}

/// Dropout seed of sample `k` in `epoch`.
pub fn dropout_seed(seed: u64, epoch: usize, k: usize) -> u64 {
    derive_seed(seed, STREAM_DROPOUT, ((epoch as u64) << 32) ^ k as u64)
}

/// Per-sample predictions and the gradient of the batch MSE.
///
/// Returns `(predictions, gradient)` where the gradient is that of
/// `mean_k (pred_k - y_k)^2` over `indices`.
pub fn batch_gradient<T: Scalar>(
    model: &StackModel<T>,
    ds: &WindowedDataset,
    indices: &[usize],
    mode: Mode,
    seed_of: impl Fn(usize) -> u64 + Sync,
) -> Result<(Vec<T>, StackParams<T>)> {
    if indices.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let scale = T::lit(2.0 / indices.len() as f64);
    let per_sample: Vec<Result<(T, StackParams<T>)>> = indices
        .par_iter()
        .map(|&k| {
            let x = ds.sample_as::<T>(k);
            let (pred, cache) = model.forward_cached(&x, mode, seed_of(k))?;
            let mut g = model.zero_grad();
            let y = T::lit(ds.targets()[k]);
            model.backward(&cache, scale * (pred - y), &mut g)?;
            Ok((pred, g))
        })
        .collect();

    let mut preds = Vec::with_capacity(indices.len());
    let mut total = model.zero_grad();
    for r in per_sample {
        let (p, g) = r?;
        preds.push(p);
        let src = g.named_tensors();
        for ((_, dst), (_, src)) in total.named_tensors_mut().into_iter().zip(src) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    Ok((preds, total))
}

/// Eval-mode predictions for every sample, in dataset order.
pub fn predict_all<T: Scalar>(model: &StackModel<T>, ds: &WindowedDataset) -> Result<Vec<T>> {
    (0..ds.len())
        .into_par_iter()
        .map(|k| model.predict(&ds.sample_as::<T>(k), Mode::Eval, 0))
        .collect()
}

/// Eval-mode MSE over the whole dataset, on scaled targets.
pub fn evaluate<T: Scalar>(model: &StackModel<T>, ds: &WindowedDataset) -> Result<f64> {
    let preds: Vec<f64> = predict_all(model, ds)?.into_iter().map(T::as_f64).collect();
    mse_loss(&preds, ds.targets())
}

fn check_dataset<T: Scalar>(model: &StackModel<T>, ds: &WindowedDataset, what: &str) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::Data(format!("{what} set is empty")));
    }
    let cfg = model.config();
    if ds.window() != cfg.window || ds.n_features() != cfg.n_features {
        return Err(Error::Data(format!(
            "{what} set has window {} x {} features, model expects {} x {}",
            ds.window(),
            ds.n_features(),
            cfg.window,
            cfg.n_features
        )));
    }
    Ok(())
}

/// Trains `model` in place and returns the per-epoch history.
pub fn train<T: Scalar>(
    model: &mut StackModel<T>,
    train_ds: &WindowedDataset,
    test_ds: &WindowedDataset,
    cfg: &TrainConfig,
) -> Result<EpochHistory> {
    train_with(model, train_ds, test_ds, cfg, |_, _| {})
}

/// [`train`], calling `on_epoch(epoch, history)` after each epoch (1-based).
pub fn train_with<T: Scalar>(
    model: &mut StackModel<T>,
    train_ds: &WindowedDataset,
    test_ds: &WindowedDataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, &EpochHistory),
) -> Result<EpochHistory> {
    cfg.validate()?;
    check_dataset(model, train_ds, "training")?;
    check_dataset(model, test_ds, "test")?;

    let mut adam = AdamState::<T>::new(cfg.lr);
    let mut history = EpochHistory::default();
    let n = train_ds.len();
    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        let shuffle_seed = derive_seed(cfg.seed, STREAM_SHUFFLE, epoch as u64);
        let mut sq_err = vec![0.0f64; n];
        for (b, batch) in batch_indices(n, cfg.batch_size, cfg.shuffle_train, shuffle_seed)
            .iter()
            .enumerate()
        {
            let context = |m: String| Error::Training(format!("epoch {} batch {}: {m}", epoch + 1, b + 1));
            let (preds, grad) = batch_gradient(model, train_ds, batch, Mode::Train, |k| {
                dropout_seed(cfg.seed, epoch, k)
            })
            .map_err(|e| match e {
                Error::Training(m) => context(m),
                other => other,
            })?;
            for (&k, p) in batch.iter().zip(&preds) {
                let r = p.as_f64() - train_ds.targets()[k];
                sq_err[k] = r * r;
            }
            let batch_loss: f64 = batch.iter().map(|&k| sq_err[k]).sum::<f64>() / batch.len() as f64;
            if !batch_loss.is_finite() {
                return Err(context("non-finite loss".into()));
            }
            adam.step(&mut model.params, &grad).map_err(|e| match e {
                Error::Training(m) => context(m),
                other => other,
            })?;
        }
        // summed in sample order so the value is independent of the shuffle
        let train_loss = sq_err.iter().sum::<f64>() / n as f64;
        let test_loss = evaluate(model, test_ds)?;
        if !test_loss.is_finite() {
            return Err(Error::Training(format!("epoch {}: non-finite test loss", epoch + 1)));
        }
        let wall = if cfg.record_wall_clock {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        history.push(train_loss, test_loss, wall);
        on_epoch(epoch + 1, &history);
    }
    Ok(history)
}

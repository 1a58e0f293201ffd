use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::frame::TimeSeriesFrame;
use super::transform::ScalerParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Supervised samples: `window` consecutive rows of every feature column
/// predict the target column on the following row.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedDataset {
    /// `[N x window x n_features]`, row-major.
    inputs: Vec<f64>,
    targets: Vec<f64>,
    window: usize,
    feature_names: Vec<String>,
    target_column: String,
    target_timestamps: Vec<NaiveDateTime>,
    scaler: Option<ScalerParams>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_column(&self) -> &str {
        &self.target_column
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target_timestamps(&self) -> &[NaiveDateTime] {
        &self.target_timestamps
    }

    pub fn scaler(&self) -> Option<&ScalerParams> {
        self.scaler.as_ref()
    }

    pub fn with_scaler(mut self, scaler: ScalerParams) -> Self {
        self.scaler = Some(scaler);
        self
    }

    /// Sample `k` as `[window x n_features]`.
    pub fn sample(&self, k: usize) -> &[f64] {
        let size = self.window * self.n_features();
        &self.inputs[k * size..(k + 1) * size]
    }

    pub fn sample_as<T: Scalar>(&self, k: usize) -> Vec<T> {
        self.sample(k).iter().map(|&v| T::lit(v)).collect()
    }

    /// The samples in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let size = self.window * self.n_features();
        Self {
            inputs: self.inputs[range.start * size..range.end * size].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            target_timestamps: self.target_timestamps[range].to_vec(),
            ..self.clone()
        }
    }
}

/// Rolling windows over every column of `frame`; the target is
/// `target_column` on the row right after each window.
pub fn make_windows(frame: &TimeSeriesFrame, window: usize, target_column: &str) -> Result<WindowedDataset> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    let len = frame.len();
    if len <= window {
        return Err(Error::Data(format!(
            "{len} rows are not enough for a window of {window} plus a target"
        )));
    }
    let target = frame.column(target_column)?;
    let cols: Vec<&[f64]> = frame.columns().map(|(_, v)| v).collect();
    let n = len - window;
    let mut inputs = Vec::with_capacity(n * window * cols.len());
    for k in 0..n {
        for row in k..k + window {
            inputs.extend(cols.iter().map(|c| c[row]));
        }
    }
    Ok(WindowedDataset {
        inputs,
        targets: target[window..].to_vec(),
        window,
        feature_names: frame.column_names().map(str::to_string).collect(),
        target_column: target_column.to_string(),
        target_timestamps: frame.timestamps()[window..].to_vec(),
        scaler: None,
    })
}

/// Sample indices grouped into batches; the final batch may be short.
pub fn batch_indices(n: usize, batch_size: usize, shuffle: bool, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    order
        .chunks(batch_size.max(1))
        .map(<[usize]>::to_vec)
        .collect()
}

pub fn batches(ds: &WindowedDataset, batch_size: usize, shuffle: bool, seed: u64) -> Vec<Vec<usize>> {
    batch_indices(ds.len(), batch_size, shuffle, seed)
}

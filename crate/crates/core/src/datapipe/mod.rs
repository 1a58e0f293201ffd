//! Ingestion, resampling, feature engineering, scaling and windowing of
//! solar power time series, plus a synthetic generator.

mod frame;
mod synth;
mod transform;
mod window;

pub use frame::{
    load_csv, load_processed_csv, read_csv, read_processed_csv, Schema, TimeSeriesFrame,
    PROCESSED_TIME_COLUMN, TIMESTAMP_FORMAT,
};
pub use synth::{synth_solar, SynthConfig};
pub use transform::{
    engineer_features, fit_scaler, interpolate_to_target, inverse_transform, lag_column_name,
    split_chronological, transform, ColumnRange, ScalerParams, TEMPORAL_COLUMNS,
};
pub use window::{batch_indices, batches, make_windows, WindowedDataset};

/// Lags applied to every power and weather column unless configured otherwise.
pub const DEFAULT_LAGS: [usize; 3] = [1, 2, 3];
pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_SPLIT: f64 = 0.8;

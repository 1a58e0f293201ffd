use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, TimeDelta, Timelike};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::frame::TimeSeriesFrame;
use crate::error::{Error, Result};

/// Resamples every column onto a uniform `target_step` grid by linear
/// interpolation. Original samples are copied through untouched.
pub fn interpolate_to_target(frame: &TimeSeriesFrame, target_step: TimeDelta) -> Result<TimeSeriesFrame> {
    if target_step <= TimeDelta::zero() {
        return Err(Error::Data("target step must be positive".into()));
    }
    let step_ms = target_step.num_milliseconds();
    let ts = frame.timestamps();
    let mut subdivisions = Vec::with_capacity(ts.len().saturating_sub(1));
    for (row, w) in ts.windows(2).enumerate() {
        let gap = (w[1] - w[0]).num_milliseconds();
        if gap % step_ms != 0 {
            return Err(Error::Data(format!(
                "spacing {}s between rows {} and {} is not a multiple of the {}s target step",
                gap / 1000,
                row + 1,
                row + 2,
                step_ms / 1000
            )));
        }
        subdivisions.push((gap / step_ms) as usize);
    }
    let total = subdivisions.iter().sum::<usize>() + usize::from(!ts.is_empty());

    let mut timestamps = Vec::with_capacity(total);
    for (k, &m) in subdivisions.iter().enumerate() {
        for j in 0..m {
            timestamps.push(ts[k] + target_step * j as i32);
        }
    }
    if let Some(&last) = ts.last() {
        timestamps.push(last);
    }

    let mut columns = IndexMap::new();
    for (name, values) in frame.columns() {
        let mut out = Vec::with_capacity(total);
        for (k, &m) in subdivisions.iter().enumerate() {
            let (a, b) = (values[k], values[k + 1]);
            out.push(a);
            for j in 1..m {
                out.push(a + (b - a) * (j as f64 / m as f64));
            }
        }
        if let Some(&last) = values.last() {
            out.push(last);
        }
        columns.insert(name.to_string(), out);
    }
    TimeSeriesFrame::new(timestamps, columns)
}

pub const TEMPORAL_COLUMNS: [&str; 4] = ["hour", "day", "month", "day_of_week"];

pub fn lag_column_name(column: &str, lag: usize) -> String {
    format!("{column}_lag{lag}")
}

/// Appends calendar columns and lag-`k` copies of every existing column, then
/// drops the leading rows whose lags are undefined.
pub fn engineer_features(frame: &TimeSeriesFrame, lags: &[usize]) -> Result<TimeSeriesFrame> {
    if lags.contains(&0) {
        return Err(Error::Data("lags must be at least 1".into()));
    }
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if max_lag >= frame.len() {
        return Err(Error::Data(format!(
            "largest lag {max_lag} needs more than {} rows",
            frame.len()
        )));
    }
    let ts = frame.timestamps();
    let calendar: [Vec<f64>; 4] = [
        ts.iter().map(|t| t.hour() as f64).collect(),
        ts.iter().map(|t| t.day() as f64).collect(),
        ts.iter().map(|t| t.month() as f64).collect(),
        ts.iter()
            .map(|t| t.weekday().num_days_from_monday() as f64)
            .collect(),
    ];
    let n = frame.len();
    let mut columns: IndexMap<String, Vec<f64>> = frame
        .columns()
        .map(|(name, v)| (name.to_string(), v[max_lag..].to_vec()))
        .collect();
    let mut insert = |name: String, values: Vec<f64>| -> Result<()> {
        if columns.insert(name.clone(), values).is_some() {
            return Err(Error::Data(format!("engineered column '{name}' already exists")));
        }
        Ok(())
    };
    for (name, values) in TEMPORAL_COLUMNS.iter().zip(calendar) {
        insert(name.to_string(), values[max_lag..].to_vec())?;
    }
    for (name, values) in frame.columns() {
        for &k in lags {
            insert(lag_column_name(name, k), values[max_lag - k..n - k].to_vec())?;
        }
    }
    TimeSeriesFrame::new(ts[max_lag..].to_vec(), columns)
}

/// Observed range of one column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn is_constant(&self) -> bool {
        self.max == self.min
    }

    pub fn scale(&self, x: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn unscale(&self, x: f64) -> f64 {
        x * (self.max - self.min) + self.min
    }
}

/// Per-column min-max ranges fitted on a training partition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalerParams {
    pub columns: BTreeMap<String, ColumnRange>,
}

impl ScalerParams {
    pub fn range(&self, column: &str) -> Result<ColumnRange> {
        self.columns
            .get(column)
            .copied()
            .ok_or_else(|| Error::State(format!("scaler has not been fitted for column '{column}'")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scaler serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scaler: Self =
            serde_json::from_str(s).map_err(|e| Error::Data(format!("scaler file: {e}")))?;
        for (name, r) in &scaler.columns {
            if !(r.min.is_finite() && r.max.is_finite()) || r.max < r.min {
                return Err(Error::Data(format!("scaler column '{name}' has an invalid range")));
            }
        }
        Ok(scaler)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&s)
    }
}

/// Fits min-max ranges on every column. Only ever call this on training rows.
pub fn fit_scaler(train: &TimeSeriesFrame) -> ScalerParams {
    let columns = train
        .columns()
        .map(|(name, values)| {
            let (min, max) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            (name.to_string(), ColumnRange { min, max })
        })
        .collect();
    ScalerParams { columns }
}

/// `x' = (x - min) / (max - min)`; constant columns map to 0. Values outside
/// the fitted range are not clipped.
pub fn transform(frame: &TimeSeriesFrame, scaler: &ScalerParams) -> Result<TimeSeriesFrame> {
    frame.map_columns(|name, values| {
        let r = scaler.range(name)?;
        Ok(values.iter().map(|&v| r.scale(v)).collect())
    })
}

pub fn inverse_transform(values: &[f64], scaler: &ScalerParams, column: &str) -> Result<Vec<f64>> {
    let r = scaler.range(column)?;
    Ok(values.iter().map(|&v| r.unscale(v)).collect())
}

/// First `floor(ratio * N)` rows train, the rest test, order preserved.
pub fn split_chronological(
    frame: &TimeSeriesFrame,
    ratio: f64,
) -> Result<(TimeSeriesFrame, TimeSeriesFrame)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n = frame.len();
    if n < 2 {
        return Err(Error::Data(format!("cannot split {n} rows")));
    }
    // tolerance so that e.g. 0.8 * 15 is not floored to 11
    let n_train = ((ratio * n as f64) + 1e-9).floor() as usize;
    let n_train = n_train.clamp(1, n - 1);
    Ok((frame.rows(0..n_train), frame.rows(n_train..n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDateTime;

    fn t0() -> NaiveDateTime {
        NaiveDateTime::parse_from_str("2006-06-15 00:00:00", "%Y-%m-%d %H:%M:%S").unwrap()
    }

    fn frame(step_min: i64, cols: &[(&str, Vec<f64>)]) -> TimeSeriesFrame {
        let n = cols[0].1.len();
        let ts = (0..n).map(|k| t0() + TimeDelta::minutes(step_min * k as i64)).collect();
        TimeSeriesFrame::new(
            ts,
            cols.iter().map(|(n, v)| (n.to_string(), v.clone())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn interpolation_midpoint_and_grid() {
        let f = frame(30, &[("x", vec![0.0, 30.0])]);
        let g = interpolate_to_target(&f, TimeDelta::minutes(15)).unwrap();
        assert_eq!(g.column("x").unwrap(), &[0.0, 15.0, 30.0]);
        let f = frame(30, &[("x", vec![0.0, 6.0]), ("k", vec![2.5, 2.5])]);
        let g = interpolate_to_target(&f, TimeDelta::minutes(5)).unwrap();
        assert_eq!(g.column("x").unwrap(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(g.column("k").unwrap(), &[2.5; 7]);
        assert_eq!(g.uniform_step(), Some(TimeDelta::minutes(5)));
        let err = interpolate_to_target(&f, TimeDelta::minutes(7)).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn calendar_and_lags() {
        let start = NaiveDateTime::parse_from_str("2006-06-15 13:35:00", "%Y-%m-%d %H:%M:%S").unwrap();
        let ts = (0..3).map(|k| start + TimeDelta::minutes(5 * k)).collect();
        let f = TimeSeriesFrame::new(ts, [("power".to_string(), vec![5.0, 7.0, 9.0])].into_iter().collect())
            .unwrap();
        let g = engineer_features(&f, &[]).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.column("hour").unwrap()[0], 13.0);
        assert_eq!(g.column("month").unwrap()[0], 6.0);
        assert_eq!(g.column("day").unwrap()[0], 15.0);
        // 2006-06-15 was a Thursday
        assert_eq!(g.column("day_of_week").unwrap()[0], 3.0);
        let g = engineer_features(&f, &[1]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.column("power_lag1").unwrap(), &[5.0, 7.0]);
        assert_eq!(g.column("power").unwrap(), &[7.0, 9.0]);
        assert!(engineer_features(&f, &[3]).is_err());
        assert!(engineer_features(&f, &[0]).is_err());
    }

    #[test]
    fn scaling_conventions() {
        let f = frame(5, &[("a", vec![0.0, 5.0, 10.0]), ("c", vec![3.0, 3.0, 3.0])]);
        let s = fit_scaler(&f);
        let g = transform(&f, &s).unwrap();
        assert_eq!(g.column("a").unwrap(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.column("c").unwrap(), &[0.0, 0.0, 0.0]);
        assert_eq!(inverse_transform(&[0.5], &s, "a").unwrap(), vec![5.0]);
        assert_eq!(inverse_transform(&[0.0], &s, "c").unwrap(), vec![3.0]);
        let unfitted = ScalerParams::default();
        assert!(matches!(transform(&f, &unfitted), Err(Error::State(_))));
        let back = ScalerParams::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn test_values_beyond_train_range_are_not_clipped() {
        let train = frame(5, &[("a", vec![0.0, 10.0])]);
        let s = fit_scaler(&train);
        let test = frame(5, &[("a", vec![-5.0, 20.0])]);
        assert_eq!(transform(&test, &s).unwrap().column("a").unwrap(), &[-0.5, 2.0]);
    }

    #[test]
    fn chronological_split() {
        let f = frame(5, &[("a", (0..10).map(f64::from).collect())]);
        let (tr, te) = split_chronological(&f, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert_eq!(te.column("a").unwrap(), &[8.0, 9.0]);
        let f5 = f.rows(0..5);
        let (tr, te) = split_chronological(&f5, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (4, 1));
        for n in 2..=10 {
            let (tr, _) = split_chronological(&f.rows(0..n), 0.8).unwrap();
            assert_eq!(tr.len(), ((4 * n) / 5).clamp(1, n - 1));
        }
    }
}

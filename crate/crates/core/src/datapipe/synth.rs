//! Synthetic utility-scale PV plant in the `simulated` schema.
//!
//! With `tau` the hour of day (fractional), `doy` the day of year and
//! `cloud_d = 1 - cloud_variability * u_d` (`u_d ~ U[0, 1)`, one draw per day):
//!
//! ```text
//! diurnal  = max(0, sin(pi * (tau - 6) / 12))
//! seasonal = 1 + 0.1 * cos(2 pi (doy - 172) / 365)
//! power    = max(0, capacity * diurnal * seasonal * cloud_d + [diurnal > 0] * N(0, noise * capacity))
//! dhi      = max(0, 900 * diurnal * seasonal * cloud_d + [diurnal > 0] * N(0, noise * 900))
//! temperature = 22 + 8 * diurnal * cloud_d + 4 * sin(2 pi (tau - 9) / 24) + N(0, 5 noise)
//! ```
//!
//! Night rows therefore carry exactly zero power, and with `noise = 0` and
//! `cloud_variability = 0` the solar-noon power is `capacity * seasonal`.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate, NaiveDateTime, TimeDelta, Timelike};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::frame::{Schema, TimeSeriesFrame};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub days: usize,
    pub step_minutes: u32,
    pub seed: u64,
    /// Noise standard deviation as a fraction of each signal's scale.
    pub noise: f64,
    /// Fraction of clear-sky output a fully overcast day can remove.
    pub cloud_variability: f64,
    pub capacity_mw: f64,
    /// First timestamp, `YYYY-MM-DD HH:MM:SS`.
    pub start: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 14,
            step_minutes: 5,
            seed: 42,
            noise: 0.02,
            cloud_variability: 0.3,
            capacity_mw: 200.0,
            start: "2006-06-01 00:00:00".into(),
        }
    }
}

impl SynthConfig {
    /// Exactly zero outside the open interval (06:00, 18:00).
    pub fn diurnal(hour: f64) -> f64 {
        if hour <= 6.0 || hour >= 18.0 {
            0.0
        } else {
            (PI * (hour - 6.0) / 12.0).sin()
        }
    }

    pub fn seasonal(day_of_year: u32) -> f64 {
        1.0 + 0.1 * (2.0 * PI * (day_of_year as f64 - 172.0) / 365.0).cos()
    }

    /// Noise-free, cloud-free power at `t`.
    pub fn clear_sky_power(&self, t: NaiveDateTime) -> f64 {
        self.capacity_mw * Self::diurnal(hour_of_day(t)) * Self::seasonal(t.ordinal())
    }

    fn validate(&self) -> Result<NaiveDateTime> {
        if self.days == 0 {
            return Err(Error::Config("days must be at least 1".into()));
        }
        if self.step_minutes == 0 || 24 * 60 % self.step_minutes != 0 {
            return Err(Error::Config(format!(
                "step of {} minutes does not divide a day",
                self.step_minutes
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise must be finite and non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.cloud_variability) {
            return Err(Error::Config("cloud_variability must lie in [0, 1]".into()));
        }
        NaiveDateTime::parse_from_str(&self.start, super::TIMESTAMP_FORMAT)
            .or_else(|_| {
                NaiveDate::parse_from_str(&self.start, "%Y-%m-%d")
                    .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists"))
            })
            .map_err(|_| Error::Config(format!("unparseable start '{}'", self.start)))
    }
}

fn hour_of_day(t: NaiveDateTime) -> f64 {
    t.hour() as f64 + t.minute() as f64 / 60.0 + t.second() as f64 / 3600.0
}

/// Generates `cfg.days` days of synthetic plant data.
pub fn synth_solar(cfg: &SynthConfig) -> Result<TimeSeriesFrame> {
    let start = cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let clouds: Vec<f64> = (0..cfg.days)
        .map(|_| 1.0 - cfg.cloud_variability * rng.random::<f64>())
        .collect();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let per_day = (24 * 60 / cfg.step_minutes) as usize;
    let n = per_day * cfg.days;
    let step = TimeDelta::minutes(cfg.step_minutes as i64);
    let names = Schema::Simulated.required_columns();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); names.len()];
    let mut timestamps = Vec::with_capacity(n);
    for k in 0..n {
        let t = start + step * k as i32;
        let day = k / per_day;
        let tau = hour_of_day(t);
        let diurnal = SynthConfig::diurnal(tau);
        let seasonal = SynthConfig::seasonal(t.ordinal());
        let cloud = clouds[day];
        // five draws per row regardless of daylight keep the stream aligned
        let mut z = [0.0; 5];
        for v in &mut z {
            *v = std_normal.sample(&mut rng);
        }
        let daylight = if diurnal > 0.0 { 1.0 } else { 0.0 };
        let power = (cfg.capacity_mw * diurnal * seasonal * cloud
            + daylight * cfg.noise * cfg.capacity_mw * z[0])
            .max(0.0);
        let dhi = (900.0 * diurnal * seasonal * cloud + daylight * cfg.noise * 900.0 * z[1]).max(0.0);
        let temperature = 22.0
            + 8.0 * diurnal * cloud
            + 4.0 * (2.0 * PI * (tau - 9.0) / 24.0).sin()
            + 5.0 * cfg.noise * z[2];
        let humidity =
            (55.0 - 25.0 * diurnal + 10.0 * (1.0 - cloud) + 10.0 * cfg.noise * z[3]).clamp(5.0, 100.0);
        let dew_point = temperature - (100.0 - humidity) / 5.0;
        let pressure = 1012.0 + 3.0 * (2.0 * PI * day as f64 / 7.0).sin();
        let wind = 3.0 + 1.5 * (2.0 * PI * tau / 24.0).sin() + (2.0 * cfg.noise * z[4]).abs();
        let zenith = 90.0 - 70.0 * (PI * (tau - 6.0) / 12.0).sin();
        let cloud_type = (10.0 * (1.0 - cloud)).round();

        let row = [
            power,
            temperature,
            dhi,
            cloud_type,
            humidity,
            dew_point,
            pressure,
            wind,
            zenith,
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
        timestamps.push(t);
    }
    let columns: IndexMap<String, Vec<f64>> =
        names.iter().map(|s| s.to_string()).zip(cols).collect();
    TimeSeriesFrame::new(timestamps, columns)
}

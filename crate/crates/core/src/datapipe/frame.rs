use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDateTime, TimeDelta};
use indexmap::IndexMap;

use crate::error::{Error, Result};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";
const REAL_PLANT_ALT_FORMAT: &str = "%d-%m-%Y %H:%M";

/// Header of the time column in processed files written by this crate.
pub const PROCESSED_TIME_COLUMN: &str = "timestamp";

/// Column layout of an input dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    /// Operational plant export: DC/AC power, yields, temperatures, irradiation.
    RealPlant,
    /// Utility-scale simulation: power in MW plus weather covariates.
    Simulated,
}

impl Schema {
    pub fn time_column(&self) -> &'static str {
        match self {
            Schema::RealPlant => "DATE_TIME",
            Schema::Simulated => "datetime",
        }
    }

    pub fn required_columns(&self) -> &'static [&'static str] {
        match self {
            Schema::RealPlant => &[
                "DC_POWER",
                "AC_POWER",
                "DAILY_YIELD",
                "TOTAL_YIELD",
                "AMBIENT_TEMPERATURE",
                "MODULE_TEMPERATURE",
                "IRRADIATION",
            ],
            Schema::Simulated => &[
                "power_mw",
                "temperature",
                "dhi",
                "cloud_type",
                "relative_humidity",
                "dew_point",
                "pressure",
                "wind_speed",
                "solar_angle",
            ],
        }
    }

    /// Column forecast by default.
    pub fn power_column(&self) -> &'static str {
        match self {
            Schema::RealPlant => "AC_POWER",
            Schema::Simulated => "power_mw",
        }
    }

    fn parse_timestamp(&self, raw: &str) -> Option<NaiveDateTime> {
        let raw = raw.trim();
        NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT)
            .ok()
            .or_else(|| match self {
                Schema::RealPlant => NaiveDateTime::parse_from_str(raw, REAL_PLANT_ALT_FORMAT).ok(),
                Schema::Simulated => None,
            })
    }
}

impl std::str::FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_plant" | "real-plant" => Ok(Schema::RealPlant),
            "simulated" => Ok(Schema::Simulated),
            other => Err(Error::Config(format!(
                "unknown schema '{other}' (expected real_plant or simulated)"
            ))),
        }
    }
}

/// Time-indexed table of named real columns.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesFrame {
    timestamps: Vec<NaiveDateTime>,
    columns: IndexMap<String, Vec<f64>>,
}

impl TimeSeriesFrame {
    /// Validates equal lengths, strictly increasing timestamps and finite values.
    pub fn new(timestamps: Vec<NaiveDateTime>, columns: IndexMap<String, Vec<f64>>) -> Result<Self> {
        for w in timestamps.windows(2).enumerate() {
            let (row, pair) = w;
            if pair[1] <= pair[0] {
                return Err(Error::Data(format!(
                    "timestamps not strictly increasing at row {}: {} follows {}",
                    row + 2,
                    pair[1],
                    pair[0]
                )));
            }
        }
        for (name, values) in &columns {
            if values.len() != timestamps.len() {
                return Err(Error::Data(format!(
                    "column '{name}' has {} values for {} timestamps",
                    values.len(),
                    timestamps.len()
                )));
            }
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "missing or non-finite value at row {}, column '{name}'",
                    row + 1
                )));
            }
        }
        Ok(Self {
            timestamps,
            columns,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Data(format!("no column named '{name}'")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    /// Frame restricted to `names`, in that order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let mut columns = IndexMap::new();
        for name in names {
            let name = name.as_ref();
            columns.insert(name.to_string(), self.column(name)?.to_vec());
        }
        Ok(Self {
            timestamps: self.timestamps.clone(),
            columns,
        })
    }

    /// Rows `range`.
    pub fn rows(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            columns: self
                .columns
                .iter()
                .map(|(k, v)| (k.clone(), v[range.clone()].to_vec()))
                .collect(),
        }
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(Error::Data(format!(
                "column '{name}' has {} values for {} rows",
                values.len(),
                self.len()
            )));
        }
        if self.columns.contains_key(&name) {
            return Err(Error::Data(format!("column '{name}' already exists")));
        }
        self.columns.insert(name, values);
        Ok(self)
    }

    pub(crate) fn map_columns<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&str, &[f64]) -> Result<Vec<f64>>,
    {
        let mut columns = IndexMap::with_capacity(self.columns.len());
        for (k, v) in &self.columns {
            columns.insert(k.clone(), f(k, v)?);
        }
        Ok(Self {
            timestamps: self.timestamps.clone(),
            columns,
        })
    }

    /// Spacing between consecutive rows when it is constant.
    pub fn uniform_step(&self) -> Option<TimeDelta> {
        let mut gaps = self.timestamps.windows(2).map(|w| w[1] - w[0]);
        let first = gaps.next()?;
        gaps.all(|g| g == first).then_some(first)
    }

    /// Writes the frame as CSV with `time_column` as the first header.
    pub fn write_csv<W: Write>(&self, writer: W, time_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<&str> = std::iter::once(time_column)
            .chain(self.column_names())
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        let cols: Vec<&Vec<f64>> = self.columns.values().collect();
        let mut record = Vec::with_capacity(cols.len() + 1);
        for (row, ts) in self.timestamps.iter().enumerate() {
            record.clear();
            record.push(ts.format(TIMESTAMP_FORMAT).to_string());
            record.extend(cols.iter().map(|c| c[row].to_string()));
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::io("flushing CSV output", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, time_column: &str) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        self.write_csv(std::io::BufWriter::new(file), time_column)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("CSV: {e}"))
}

fn parse_cell(raw: &str) -> Option<f64> {
    let t = raw.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a CSV whose time column is `time_column`. With `required = None`
/// every other column is numeric and kept; otherwise only the required
/// columns are kept (in the listed order) and all others are ignored.
fn read_frame<R: Read>(
    reader: R,
    time_column: &str,
    required: Option<&[&str]>,
    parse_time: impl Fn(&str) -> Option<NaiveDateTime>,
) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let time_idx = find(time_column)
        .ok_or_else(|| Error::Data(format!("missing required column '{time_column}'")))?;
    let wanted: Vec<(String, usize)> = match required {
        Some(req) => req
            .iter()
            .map(|&name| {
                find(name)
                    .map(|i| (name.to_string(), i))
                    .ok_or_else(|| Error::Data(format!("missing required column '{name}'")))
            })
            .collect::<Result<_>>()?,
        None => headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != time_idx)
            .map(|(i, h)| (h.to_string(), i))
            .collect(),
    };

    let mut timestamps = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        let raw_ts = record.get(time_idx).unwrap_or("");
        let ts = parse_time(raw_ts).ok_or_else(|| {
            Error::Data(format!(
                "unparseable datetime '{raw_ts}' at row {row}, column '{time_column}'"
            ))
        })?;
        if let Some(prev) = timestamps.last() {
            if ts == *prev {
                return Err(Error::Data(format!("duplicate timestamp {ts} at row {row}")));
            }
            if ts < *prev {
                return Err(Error::Data(format!(
                    "out-of-order timestamp {ts} at row {row} (previous {prev})"
                )));
            }
        }
        timestamps.push(ts);
        for ((name, idx), col) in wanted.iter().zip(values.iter_mut()) {
            let raw = record.get(*idx).unwrap_or("");
            let v = parse_cell(raw).ok_or_else(|| {
                Error::Data(format!(
                    "missing or invalid value '{raw}' at row {row}, column '{name}'"
                ))
            })?;
            col.push(v);
        }
    }
    let columns = wanted.into_iter().map(|(n, _)| n).zip(values).collect();
    TimeSeriesFrame::new(timestamps, columns)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

/// Loads and validates a raw dataset.
pub fn load_csv(path: &Path, schema: Schema) -> Result<TimeSeriesFrame> {
    read_csv(open(path)?, schema)
        .map_err(|e| annotate(e, path))
}

pub fn read_csv<R: Read>(reader: R, schema: Schema) -> Result<TimeSeriesFrame> {
    read_frame(
        reader,
        schema.time_column(),
        Some(schema.required_columns()),
        |s| schema.parse_timestamp(s),
    )
}

/// Loads a processed file (time column `timestamp`, every other column numeric).
pub fn load_processed_csv(path: &Path) -> Result<TimeSeriesFrame> {
    read_processed_csv(open(path)?).map_err(|e| annotate(e, path))
}

pub fn read_processed_csv<R: Read>(reader: R) -> Result<TimeSeriesFrame> {
    read_frame(reader, PROCESSED_TIME_COLUMN, None, |s| {
        NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT).ok()
    })
}

fn annotate(e: Error, path: &Path) -> Error {
    match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const HEADER: [&str; 4] = ["epoch", "train_loss", "test_loss", "wall_seconds"];

/// Losses and wall time per epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochHistory {
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    pub wall_seconds: Vec<f64>,
}

impl EpochHistory {
    pub fn len(&self) -> usize {
        self.train_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_loss.is_empty()
    }

    pub fn push(&mut self, train_loss: f64, test_loss: f64, wall_seconds: f64) {
        self.train_loss.push(train_loss);
        self.test_loss.push(test_loss);
        self.wall_seconds.push(wall_seconds);
    }

    /// Writes `epoch,train_loss,test_loss,wall_seconds` with 1-based epochs.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let werr = |e: csv::Error| Error::Data(format!("writing history: {e}"));
        w.write_record(HEADER).map_err(werr)?;
        for k in 0..self.len() {
            w.write_record([
                (k + 1).to_string(),
                self.train_loss[k].to_string(),
                self.test_loss[k].to_string(),
                self.wall_seconds[k].to_string(),
            ])
            .map_err(werr)?;
        }
        w.flush().map_err(|e| Error::io("writing history", e))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r
            .headers()
            .map_err(|e| Error::Data(format!("history header: {e}")))?
            .clone();
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Data(format!(
                "history header must be '{}'",
                HEADER.join(",")
            )));
        }
        let mut h = Self::default();
        for (row, rec) in r.records().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::Data(format!("history line {line}: {e}")))?;
            let num = |c: usize| -> Result<f64> {
                let v: f64 = rec[c].trim().parse().map_err(|_| {
                    Error::Data(format!("history line {line}, column {}: '{}' is not a number", HEADER[c], &rec[c]))
                })?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Data(format!(
                        "history line {line}, column {}: {v} is not finite and non-negative",
                        HEADER[c]
                    )));
                }
                Ok(v)
            };
            let epoch = num(0)?;
            if epoch != (row + 1) as f64 {
                return Err(Error::Data(format!("history line {line}: expected epoch {}", row + 1)));
            }
            h.push(num(1)?, num(2)?, num(3)?);
        }
        Ok(h)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

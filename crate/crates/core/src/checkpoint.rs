//! Model checkpoints.
//!
//! A checkpoint is a text file: a `qsf-checkpoint v1` line followed by a JSON
//! document holding the architecture, every named tensor, the seed and the
//! data-side metadata needed to predict (scaler, features, target, window).
//! Tensors are stored as `f64` with shortest round-trip formatting, so an
//! `f64` model reloads bit-for-bit.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datapipe::ScalerParams;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::recurrent::{StackConfig, StackModel};
use crate::scalar::Scalar;

pub const MAGIC: &str = "qsf-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: StackConfig,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub target_column: String,
    pub scaler: ScalerParams,
    pub tensors: BTreeMap<String, Vec<f64>>,
}

impl Checkpoint {
    pub fn from_model<T: Scalar>(
        model: &StackModel<T>,
        seed: u64,
        feature_names: Vec<String>,
        target_column: String,
        scaler: ScalerParams,
    ) -> Self {
        let tensors = model
            .params
            .named_tensors()
            .into_iter()
            .map(|(name, t)| (name, t.iter().map(|v| v.as_f64()).collect()))
            .collect();
        Self {
            config: *model.config(),
            seed,
            feature_names,
            target_column,
            scaler,
            tensors,
        }
    }

    /// Rebuilds the model; every tensor must be present with the right size.
    pub fn to_model<T: Scalar>(&self) -> Result<StackModel<T>> {
        let mut model = StackModel::<T>::zeros(self.config)?;
        let mut seen = 0;
        for (name, dst) in model.params.named_tensors_mut() {
            let src = self
                .tensors
                .get(&name)
                .ok_or_else(|| Error::State(format!("checkpoint lacks tensor '{name}'")))?;
            if src.len() != dst.len() {
                return Err(Error::State(format!(
                    "tensor '{name}' holds {} values, the architecture needs {}",
                    src.len(),
                    dst.len()
                )));
            }
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = T::lit(s);
            }
            seen += 1;
        }
        if seen != self.tensors.len() {
            return Err(Error::State(format!(
                "checkpoint has {} tensors, the architecture has {seen}",
                self.tensors.len()
            )));
        }
        Ok(model)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::State(format!("serializing checkpoint: {e}")))?;
        writeln!(w, "{MAGIC} v{VERSION}")
            .and_then(|_| writeln!(w, "{json}"))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io("writing checkpoint", e))
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)
            .map_err(|e| Error::io("reading checkpoint", e))?;
        let expected = format!("{MAGIC} v{VERSION}");
        if header.trim_end() != expected {
            return Err(Error::State(format!(
                "not a checkpoint: expected '{expected}', found '{}'",
                header.trim_end()
            )));
        }
        let ck: Self = serde_json::from_reader(r)
            .map_err(|e| Error::State(format!("malformed checkpoint body: {e}")))?;
        ck.config.validate()?;
        if ck.feature_names.len() != ck.config.n_features {
            return Err(Error::State(format!(
                "checkpoint lists {} features for a model of {}",
                ck.feature_names.len(),
                ck.config.n_features
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::read(std::io::BufReader::new(f))
    }
}

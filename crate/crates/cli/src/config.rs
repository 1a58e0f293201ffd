//! Flat `key = value` run configuration shared by every command.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use qsf_core::datapipe::{Schema, SynthConfig, DEFAULT_LAGS, DEFAULT_SPLIT, DEFAULT_WINDOW};
use qsf_core::recurrent::{ModelKind, ProjectionMode, QuantumConfig, StackConfig, VqcMode, MAX_LAYERS};
use qsf_core::training::TrainConfig;
use qsf_core::vqc::{Entangle, VqcShape, MAX_QLAYERS, MAX_VQC_QUBITS};

use crate::error::CliError;

pub const DEFAULT_OUT: &str = "qsf-out";
pub const MAX_EPOCHS: usize = 100_000;
pub const MAX_HIDDEN: usize = 1024;
pub const MAX_WINDOW: usize = 1024;
pub const MAX_THREADS: usize = 256;

/// Every key accepted in a config file, by `--set`, or through a dedicated flag.
pub const KEYS: &[&str] = &[
    "input",
    "schema",
    "step_minutes",
    "lags",
    "split",
    "days",
    "noise",
    "data",
    "train_csv",
    "test_csv",
    "scaler",
    "target",
    "features",
    "window",
    "batch_size",
    "lr",
    "epochs",
    "model",
    "hidden",
    "layers",
    "n_qubits",
    "n_qlayers",
    "n_vrotations",
    "vqc_mode",
    "entangle",
    "projection",
    "dropout",
    "seed",
    "shuffle",
    "out",
    "threads",
    "extended_metrics",
    "wall_clock",
    "checkpoint",
    "horizon",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelChoice {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub schema: Schema,
    pub step_minutes: u32,
    pub lags: Vec<usize>,
    pub split: f64,
    pub days: usize,
    pub noise: f64,
    /// Directory holding `train.csv`, `test.csv` and `scaler.json`.
    pub data: Option<PathBuf>,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub scaler: Option<PathBuf>,
    pub target: Option<String>,
    pub features: Option<Vec<String>>,
    pub window: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    pub model: ModelChoice,
    pub hidden: usize,
    pub layers: usize,
    pub n_qubits: usize,
    pub n_qlayers: usize,
    pub n_vrotations: usize,
    pub vqc_mode: VqcMode,
    pub entangle: Entangle,
    pub projection: ProjectionMode,
    pub dropout: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub out: PathBuf,
    pub threads: usize,
    pub extended_metrics: bool,
    pub wall_clock: bool,
    pub checkpoint: Option<PathBuf>,
    pub horizon: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        Self {
            input: None,
            schema: Schema::Simulated,
            step_minutes: synth.step_minutes,
            lags: DEFAULT_LAGS.to_vec(),
            split: DEFAULT_SPLIT,
            days: synth.days,
            noise: synth.noise,
            data: None,
            train_csv: None,
            test_csv: None,
            scaler: None,
            target: None,
            features: None,
            window: DEFAULT_WINDOW,
            batch_size: 32,
            lr: 0.001,
            epochs: 20,
            model: ModelChoice::Classical,
            hidden: 16,
            layers: 2,
            n_qubits: 2,
            n_qlayers: 1,
            n_vrotations: 3,
            vqc_mode: VqcMode::Four,
            entangle: Entangle::Staircase,
            projection: ProjectionMode::PerGate,
            dropout: 0.2,
            seed: synth.seed,
            shuffle: true,
            out: PathBuf::from(DEFAULT_OUT),
            threads: 1,
            extended_metrics: false,
            wall_clock: true,
            checkpoint: None,
            horizon: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::usage(format!("invalid value '{value}' for {key} (expected true or false)"))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    let v = value.trim().replace('-', "_");
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|&(_, t)| t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::usage(format!("invalid value '{value}' for {key} (expected one of {})", names.join(", ")))
        })
}

fn in_range<T: PartialOrd + std::fmt::Display>(key: &str, v: T, lo: T, hi: T) -> Result<T, CliError> {
    if v < lo || v > hi {
        return Err(CliError::usage(format!("{key} must be within {lo}..={hi}, got {v}")));
    }
    Ok(v)
}

/// Canonical key spelling: lower case with underscores.
pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl RunConfig {
    /// Sets one key. Unknown keys and out-of-range values are usage errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = normalize_key(key);
        let k = key.as_str();
        let path = || PathBuf::from(value.trim());
        match k {
            "input" => self.input = Some(path()),
            "schema" => self.schema = Schema::from_str(value.trim()).map_err(|e| CliError::usage(e.to_string()))?,
            "step_minutes" => self.step_minutes = in_range(k, parse(k, value)?, 1, 24 * 60)?,
            "lags" => {
                self.lags = parse_list(value)
                    .iter()
                    .map(|v| parse::<usize>(k, v).and_then(|l| in_range(k, l, 1, 10_000)))
                    .collect::<Result<_, _>>()?;
            }
            "split" => {
                let s: f64 = parse(k, value)?;
                if !(s > 0.0 && s < 1.0) {
                    return Err(CliError::usage(format!("split must lie in (0, 1), got {s}")));
                }
                self.split = s;
            }
            "days" => self.days = in_range(k, parse(k, value)?, 1, 3660)?,
            "noise" => {
                let n: f64 = parse(k, value)?;
                if !(n >= 0.0 && n.is_finite()) {
                    return Err(CliError::usage(format!("noise must be finite and non-negative, got {n}")));
                }
                self.noise = n;
            }
            "data" => self.data = Some(path()),
            "train_csv" => self.train_csv = Some(path()),
            "test_csv" => self.test_csv = Some(path()),
            "scaler" => self.scaler = Some(path()),
            "target" => self.target = Some(value.trim().to_string()),
            "features" => {
                let f = parse_list(value);
                if f.is_empty() {
                    return Err(CliError::usage("features must name at least one column"));
                }
                self.features = Some(f);
            }
            "window" => self.window = in_range(k, parse(k, value)?, 1, MAX_WINDOW)?,
            "batch_size" => self.batch_size = in_range(k, parse(k, value)?, 1, 1 << 20)?,
            "lr" => {
                let lr: f64 = parse(k, value)?;
                if !(lr > 0.0 && lr.is_finite()) {
                    return Err(CliError::usage(format!("lr must be positive and finite, got {lr}")));
                }
                self.lr = lr;
            }
            "epochs" => self.epochs = in_range(k, parse(k, value)?, 1, MAX_EPOCHS)?,
            "model" => {
                self.model = choice(
                    k,
                    value,
                    &[
                        ("classical", ModelChoice::Classical),
                        ("lstm", ModelChoice::Classical),
                        ("quantum", ModelChoice::Quantum),
                        ("qlstm", ModelChoice::Quantum),
                    ],
                )?
            }
            "hidden" => self.hidden = in_range(k, parse(k, value)?, 1, MAX_HIDDEN)?,
            "layers" => self.layers = in_range(k, parse(k, value)?, 0, MAX_LAYERS)?,
            "n_qubits" => self.n_qubits = in_range(k, parse(k, value)?, 2, MAX_VQC_QUBITS)?,
            "n_qlayers" => self.n_qlayers = in_range(k, parse(k, value)?, 1, MAX_QLAYERS)?,
            "n_vrotations" => self.n_vrotations = in_range(k, parse(k, value)?, 1, 64)?,
            "vqc_mode" => self.vqc_mode = choice(k, value, &[("four", VqcMode::Four), ("six", VqcMode::Six)])?,
            "entangle" => {
                self.entangle = choice(
                    k,
                    value,
                    &[("staircase", Entangle::Staircase), ("ring", Entangle::Ring)],
                )?
            }
            "projection" => {
                self.projection = choice(
                    k,
                    value,
                    &[("per_gate", ProjectionMode::PerGate), ("shared", ProjectionMode::Shared)],
                )?
            }
            "dropout" => {
                let d: f64 = parse(k, value)?;
                if !(0.0..1.0).contains(&d) {
                    return Err(CliError::usage(format!("dropout must lie in [0, 1), got {d}")));
                }
                self.dropout = d;
            }
            "seed" => self.seed = parse(k, value)?,
            "shuffle" => self.shuffle = parse_bool(k, value)?,
            "out" => self.out = path(),
            "threads" => self.threads = in_range(k, parse(k, value)?, 1, MAX_THREADS)?,
            "extended_metrics" => self.extended_metrics = parse_bool(k, value)?,
            "wall_clock" => self.wall_clock = parse_bool(k, value)?,
            "checkpoint" => self.checkpoint = Some(path()),
            "horizon" => self.horizon = Some(in_range(k, parse(k, value)?, 1, usize::MAX)?),
            _ => return Err(CliError::usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("{origin}:{}: expected key = value", n + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::usage(format!("{origin}:{}: {}", n + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("reading config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    fn data_dir(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(|| self.out.clone())
    }

    pub fn train_path(&self) -> PathBuf {
        self.train_csv.clone().unwrap_or_else(|| self.data_dir().join("train.csv"))
    }

    pub fn test_path(&self) -> PathBuf {
        self.test_csv.clone().unwrap_or_else(|| self.data_dir().join("test.csv"))
    }

    pub fn scaler_path(&self) -> PathBuf {
        self.scaler.clone().unwrap_or_else(|| self.data_dir().join("scaler.json"))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| self.out.join("model.ckpt"))
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            days: self.days,
            step_minutes: self.step_minutes,
            seed: self.seed,
            noise: self.noise,
            ..Default::default()
        }
    }

    pub fn stack_config(&self, n_features: usize) -> Result<StackConfig, CliError> {
        let model_kind = match self.model {
            ModelChoice::Classical => ModelKind::Classical,
            ModelChoice::Quantum => {
                let shape = VqcShape::new(self.n_qubits, self.n_qlayers, self.n_vrotations)?
                    .with_entangle(self.entangle);
                ModelKind::Quantum(QuantumConfig {
                    shape,
                    mode: self.vqc_mode,
                    projection: self.projection,
                })
            }
        };
        let c = StackConfig {
            n_layers: self.layers,
            n_features,
            hidden: self.hidden,
            window: self.window,
            dropout: self.dropout,
            model_kind,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            seed: self.seed,
            shuffle_train: self.shuffle,
            record_wall_clock: self.wall_clock,
        }
    }
}

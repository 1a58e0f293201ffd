//! The `qsf` command line: synthesis, preprocessing, training, evaluation,
//! comparison, prediction and grid search over LSTM and QLSTM forecasters.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::CompareInputs;
use crate::config::{RunConfig, DEFAULT_OUT};
pub use crate::error::{CliError, EXIT_DATA, EXIT_OK, EXIT_TRAINING, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "qsf", version, about = "Solar power forecasting with LSTM and statevector-simulated QLSTM models")]
pub struct Cli {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Output directory [default: qsf-out]
    #[arg(long, global = true, env = "QSF_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for per-sample gradients; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<String>,
    /// Adds MAPE and R^2 to metric reports.
    #[arg(long, global = true)]
    pub extended_metrics: bool,
    /// Records every wall-time entry as 0 so histories are byte-reproducible.
    #[arg(long, global = true)]
    pub no_wall_clock: bool,
    /// Any config key, e.g. `--set hidden=32`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic solar dataset.
    Synth(SynthArgs),
    /// Interpolate, engineer features, split and scale a raw dataset.
    Preprocess(PreprocessArgs),
    /// Train a model and write checkpoint, history and metrics.
    Train(ModelArgs),
    /// Predict with a checkpoint and write metrics.
    Evaluate(PredictArgs),
    /// Compare two training histories.
    Compare(CompareArgs),
    /// Predict with a checkpoint in physical units.
    Predict(PredictArgs),
    /// Train every combination of a small grid and rank by test MSE.
    Grid(GridArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub days: Option<String>,
    #[arg(long)]
    pub step_minutes: Option<String>,
    #[arg(long)]
    pub noise: Option<String>,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    /// `simulated` or `real_plant`
    #[arg(long)]
    pub schema: Option<String>,
    /// Interpolation target step.
    #[arg(long)]
    pub step_minutes: Option<String>,
    /// Comma-separated lag orders.
    #[arg(long)]
    pub lags: Option<String>,
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Directory with train.csv, test.csv and scaler.json [default: the output directory]
    #[arg(long, value_name = "DIR")]
    pub data: Option<String>,
    /// `classical` or `quantum`
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub layers: Option<String>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub dropout: Option<String>,
    #[arg(long)]
    pub n_qubits: Option<String>,
    #[arg(long)]
    pub n_qlayers: Option<String>,
    #[arg(long)]
    pub n_vrotations: Option<String>,
    /// `four` or `six`
    #[arg(long)]
    pub vqc_mode: Option<String>,
    /// `staircase` or `ring`
    #[arg(long)]
    pub entangle: Option<String>,
    /// Comma-separated processed column names fed to the model.
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    /// Checkpoint path [default: OUT/model.ckpt]
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// One axis, `key=v1,v2,...`; repeat for more axes.
    #[arg(long = "grid", value_name = "KEY=V1,V2", required = true)]
    pub axes: Vec<String>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<String>,
    /// Processed CSV to predict on [default: the test partition]
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    /// Number of leading windows to predict.
    #[arg(long)]
    pub horizon: Option<String>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    pub history_a: PathBuf,
    pub history_b: PathBuf,
    /// Display names, `a,b`.
    #[arg(long, value_name = "A,B")]
    pub names: Option<String>,
    /// metrics.json of the first model, embedded in the report.
    #[arg(long, value_name = "PATH")]
    pub metrics_a: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub metrics_b: Option<PathBuf>,
}

fn pairs_model(m: &ModelArgs) -> Vec<(&'static str, &Option<String>)> {
    vec![
        ("data", &m.data),
        ("model", &m.model),
        ("epochs", &m.epochs),
        ("hidden", &m.hidden),
        ("layers", &m.layers),
        ("lr", &m.lr),
        ("batch_size", &m.batch_size),
        ("window", &m.window),
        ("dropout", &m.dropout),
        ("n_qubits", &m.n_qubits),
        ("n_qlayers", &m.n_qlayers),
        ("n_vrotations", &m.n_vrotations),
        ("vqc_mode", &m.vqc_mode),
        ("entangle", &m.entangle),
        ("features", &m.features),
        ("target", &m.target),
        ("checkpoint", &m.checkpoint),
    ]
}

fn command_pairs(c: &Command) -> Vec<(&'static str, &Option<String>)> {
    match c {
        Command::Synth(a) => vec![
            ("days", &a.days),
            ("step_minutes", &a.step_minutes),
            ("noise", &a.noise),
        ],
        Command::Preprocess(a) => vec![
            ("input", &a.input),
            ("schema", &a.schema),
            ("step_minutes", &a.step_minutes),
            ("lags", &a.lags),
            ("split", &a.split),
        ],
        Command::Train(m) => pairs_model(m),
        Command::Grid(g) => pairs_model(&g.model),
        Command::Predict(p) | Command::Evaluate(p) => vec![
            ("checkpoint", &p.checkpoint),
            ("input", &p.input),
            ("horizon", &p.horizon),
        ],
        Command::Compare(_) => Vec::new(),
    }
}

/// Defaults, then the config file, then `--set`, then dedicated flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &cli.config {
        cfg.apply_file(p)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    for (k, v) in command_pairs(&cli.command) {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    if let Some(s) = &cli.seed {
        cfg.set("seed", s)?;
    }
    if let Some(t) = &cli.threads {
        cfg.set("threads", t)?;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if cli.extended_metrics {
        cfg.extended_metrics = true;
    }
    if cli.no_wall_clock {
        cfg.wall_clock = false;
    }
    if cfg.out.as_os_str().is_empty() {
        cfg.out = PathBuf::from(DEFAULT_OUT);
    }
    Ok(cfg)
}

fn compare_inputs(a: &CompareArgs) -> Result<CompareInputs, CliError> {
    let names = match &a.names {
        Some(n) => {
            let parts: Vec<&str> = n.split(',').map(str::trim).collect();
            if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
                return Err(CliError::usage(format!("--names expects two names, got '{n}'")));
            }
            [parts[0].to_string(), parts[1].to_string()]
        }
        None => ["a".to_string(), "b".to_string()],
    };
    Ok(CompareInputs {
        histories: [a.history_a.clone(), a.history_b.clone()],
        names,
        metrics: [a.metrics_a.clone(), a.metrics_b.clone()],
    })
}

/// Runs a parsed command and returns the files it wrote.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} threads: {e}", cfg.threads)))?;
    pool.install(|| match &cli.command {
        Command::Synth(_) => commands::synth(&cfg),
        Command::Preprocess(_) => commands::preprocess(&cfg),
        Command::Train(_) => commands::train(&cfg),
        Command::Evaluate(_) => commands::predict(&cfg, true),
        Command::Predict(_) => commands::predict(&cfg, false),
        Command::Compare(a) => commands::compare(&cfg, &compare_inputs(a)?),
        Command::Grid(g) => commands::grid(&cfg, &g.axes),
    })
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use qsf_core::checkpoint::Checkpoint;
use qsf_core::datapipe::{
    engineer_features, fit_scaler, interpolate_to_target, inverse_transform, load_csv, load_processed_csv,
    make_windows, split_chronological, synth_solar, transform, Schema, ScalerParams, SynthConfig,
    TimeSeriesFrame, WindowedDataset, PROCESSED_TIME_COLUMN, TIMESTAMP_FORMAT,
};
use qsf_core::evalstats::{convergence_epoch, stability, t_test, MetricReport, StabilityReport, StatTestResult, TestKind};
use qsf_core::recurrent::{ModelKind, StackConfig, StackModel};
use qsf_core::training::{predict_all, train_with, EpochHistory};
use qsf_core::Params;
use serde::Serialize;

use crate::config::{normalize_key, RunConfig};
use crate::error::CliError;

pub const MAX_GRID_COMBOS: usize = 64;

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("creating {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    generator: &'static str,
    config: &'a SynthConfig,
    rows: usize,
    columns: Vec<&'a str>,
    time_column: &'static str,
}

/// Writes `synth.csv` and `synth_manifest.json`.
pub fn synth(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sc = cfg.synth_config();
    let frame = synth_solar(&sc)?;
    ensure_dir(&cfg.out)?;
    let csv = cfg.out.join("synth.csv");
    let time_column = Schema::Simulated.time_column();
    frame.save_csv(&csv, time_column)?;
    let manifest = cfg.out.join("synth_manifest.json");
    write_json(
        &manifest,
        &SynthManifest {
            generator: "synth_solar",
            config: &sc,
            rows: frame.len(),
            columns: frame.column_names().collect(),
            time_column,
        },
    )?;
    Ok(vec![csv, manifest])
}

/// interpolate, engineer, split, fit on train, transform both partitions.
pub fn preprocess(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::usage("preprocess needs an input file (--input or input = PATH)"))?;
    let raw = load_csv(input, cfg.schema)?;
    let step = TimeDelta::minutes(i64::from(cfg.step_minutes));
    let frame = interpolate_to_target(&raw, step)?;
    let frame = engineer_features(&frame, &cfg.lags)?;
    let (train, test) = split_chronological(&frame, cfg.split)?;
    let scaler = fit_scaler(&train);
    let train = transform(&train, &scaler)?;
    let test = transform(&test, &scaler)?;

    ensure_dir(&cfg.out)?;
    let paths = [
        cfg.out.join("train.csv"),
        cfg.out.join("test.csv"),
        cfg.out.join("scaler.json"),
    ];
    train.save_csv(&paths[0], PROCESSED_TIME_COLUMN)?;
    test.save_csv(&paths[1], PROCESSED_TIME_COLUMN)?;
    scaler.save(&paths[2])?;
    Ok(paths.to_vec())
}

const TARGET_CANDIDATES: [&str; 2] = ["power_mw", "AC_POWER"];

fn resolve_target(cfg: &RunConfig, frame: &TimeSeriesFrame) -> Result<String, CliError> {
    if let Some(t) = &cfg.target {
        return Ok(t.clone());
    }
    TARGET_CANDIDATES
        .iter()
        .find(|c| frame.has_column(c))
        .map(|c| c.to_string())
        .ok_or_else(|| CliError::data("no power column found; set target = COLUMN"))
}

fn windows(
    frame: &TimeSeriesFrame,
    features: &[String],
    window: usize,
    target: &str,
    scaler: &ScalerParams,
) -> Result<WindowedDataset, CliError> {
    let selected = frame.select(features)?;
    Ok(make_windows(&selected, window, target)?.with_scaler(scaler.clone()))
}

pub struct Prepared {
    pub train: WindowedDataset,
    pub test: WindowedDataset,
    pub scaler: ScalerParams,
    pub target: String,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let train = load_processed_csv(&cfg.train_path())?;
    let test = load_processed_csv(&cfg.test_path())?;
    let scaler = ScalerParams::load(&cfg.scaler_path())?;
    let target = resolve_target(cfg, &train)?;
    let features: Vec<String> = match &cfg.features {
        Some(f) => f.clone(),
        None => train.column_names().map(str::to_string).collect(),
    };
    if !features.contains(&target) {
        return Err(CliError::usage(format!(
            "the feature list must include the target column '{target}'"
        )));
    }
    scaler.range(&target)?;
    Ok(Prepared {
        train: windows(&train, &features, cfg.window, &target, &scaler)?,
        test: windows(&test, &features, cfg.window, &target, &scaler)?,
        scaler,
        target,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainMetrics {
    pub model: &'static str,
    pub config: StackConfig,
    pub seed: u64,
    pub epochs: usize,
    pub n_params: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub final_train_loss: f64,
    pub final_test_loss: f64,
    /// Final-epoch test predictions in scaled units.
    pub scaled: MetricReport,
    /// The same predictions mapped back to physical units.
    pub physical: MetricReport,
}

pub struct Fitted {
    pub model: StackModel<f64>,
    pub history: EpochHistory,
    pub metrics: TrainMetrics,
    pub prepared: Prepared,
}

fn model_name(c: &StackConfig) -> &'static str {
    match c.model_kind {
        ModelKind::Classical => "classical",
        ModelKind::Quantum(_) => "quantum",
    }
}

fn reports(
    ds: &WindowedDataset,
    preds: &[f64],
    scaler: &ScalerParams,
    target: &str,
    extended: bool,
) -> Result<(MetricReport, MetricReport, Vec<f64>, Vec<f64>), CliError> {
    let scaled = MetricReport::compute(ds.targets(), preds, extended)?;
    let actual = inverse_transform(ds.targets(), scaler, target)?;
    let predicted = inverse_transform(preds, scaler, target)?;
    let physical = MetricReport::compute(&actual, &predicted, extended)?;
    Ok((scaled, physical, actual, predicted))
}

pub fn fit(cfg: &RunConfig, log: bool) -> Result<Fitted, CliError> {
    let prepared = prepare(cfg)?;
    let config = cfg.stack_config(prepared.train.n_features())?;
    let mut model = StackModel::<f64>::init(config, cfg.seed)?;
    let tc = cfg.train_config();
    let history = train_with(&mut model, &prepared.train, &prepared.test, &tc, |e, h| {
        if log {
            let k = h.len() - 1;
            eprintln!(
                "epoch {e}/{}: train_loss {:.6e} test_loss {:.6e}",
                tc.epochs, h.train_loss[k], h.test_loss[k]
            );
        }
    })?;
    let preds = predict_all(&model, &prepared.test)?;
    let (scaled, physical, _, _) = reports(
        &prepared.test,
        &preds,
        &prepared.scaler,
        &prepared.target,
        cfg.extended_metrics,
    )?;
    let last = history.len() - 1;
    let metrics = TrainMetrics {
        model: model_name(&config),
        config,
        seed: cfg.seed,
        epochs: history.len(),
        n_params: model.params.n_params(),
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        final_train_loss: history.train_loss[last],
        final_test_loss: history.test_loss[last],
        scaled,
        physical,
    };
    Ok(Fitted {
        model,
        history,
        metrics,
        prepared,
    })
}

/// Writes the checkpoint, `history.csv` and `metrics.json`.
pub fn train(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let f = fit(cfg, true)?;
    ensure_dir(&cfg.out)?;
    let ckpt = cfg.checkpoint_path();
    if let Some(parent) = ckpt.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    Checkpoint::from_model(
        &f.model,
        cfg.seed,
        f.prepared.train.feature_names().to_vec(),
        f.prepared.target.clone(),
        f.prepared.scaler.clone(),
    )
    .save(&ckpt)?;
    let history = cfg.out.join("history.csv");
    f.history.save_csv(&history)?;
    let metrics = cfg.out.join("metrics.json");
    write_json(&metrics, &f.metrics)?;
    Ok(vec![ckpt, history, metrics])
}

#[derive(Serialize)]
struct EvalMetrics {
    n: usize,
    target: String,
    scaled: MetricReport,
    physical: MetricReport,
}

/// Writes `predictions.csv` and `residuals.csv`, plus `eval_metrics.json`
/// when `with_metrics` is set.
pub fn predict(cfg: &RunConfig, with_metrics: bool) -> Result<Vec<PathBuf>, CliError> {
    let ck = Checkpoint::load(&cfg.checkpoint_path())?;
    let model: StackModel<f64> = ck.to_model()?;
    let input = cfg.input.clone().unwrap_or_else(|| cfg.test_path());
    let frame = load_processed_csv(&input)?;
    ck.scaler.range(&ck.target_column)?;
    let ds = windows(&frame, &ck.feature_names, ck.config.window, &ck.target_column, &ck.scaler)?;
    let n = match cfg.horizon {
        Some(h) if h > ds.len() => {
            return Err(CliError::data(format!(
                "horizon {h} exceeds the {} windows available in {}",
                ds.len(),
                input.display()
            )))
        }
        Some(h) => h,
        None => ds.len(),
    };
    let ds = ds.slice(0..n);
    let preds = predict_all(&model, &ds)?;
    let (scaled, physical, actual, predicted) =
        reports(&ds, &preds, &ck.scaler, &ck.target_column, cfg.extended_metrics)?;

    let mut pred_csv = String::from("timestamp,actual,predicted\n");
    let mut resid_csv = String::from("timestamp,residual\n");
    for ((t, a), p) in ds.target_timestamps().iter().zip(&actual).zip(&predicted) {
        let ts = t.format(TIMESTAMP_FORMAT);
        pred_csv.push_str(&format!("{ts},{a},{p}\n"));
        resid_csv.push_str(&format!("{ts},{}\n", a - p));
    }
    ensure_dir(&cfg.out)?;
    let mut paths = vec![cfg.out.join("predictions.csv"), cfg.out.join("residuals.csv")];
    write_text(&paths[0], &pred_csv)?;
    write_text(&paths[1], &resid_csv)?;
    if with_metrics {
        let p = cfg.out.join("eval_metrics.json");
        write_json(
            &p,
            &EvalMetrics {
                n,
                target: ck.target_column.clone(),
                scaled,
                physical,
            },
        )?;
        paths.push(p);
    }
    Ok(paths)
}

#[derive(Debug, Serialize)]
pub struct LossTests {
    /// Absent when the histories differ in length.
    pub paired: Option<StatTestResult>,
    pub pooled: StatTestResult,
}

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub history: String,
    pub epochs: usize,
    pub convergence_epoch: usize,
    pub stability: StabilityReport,
    pub mean_epoch_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub models: [ModelSummary; 2],
    pub train_loss: LossTests,
    pub test_loss: LossTests,
}

fn loss_tests(a: &[f64], b: &[f64]) -> Result<LossTests, CliError> {
    Ok(LossTests {
        paired: if a.len() == b.len() {
            Some(t_test(a, b, TestKind::Paired)?)
        } else {
            None
        },
        pooled: t_test(a, b, TestKind::PooledIndependent)?,
    })
}

fn summarize(name: &str, path: &Path, h: &EpochHistory, metrics: Option<&PathBuf>) -> Result<ModelSummary, CliError> {
    Ok(ModelSummary {
        name: name.to_string(),
        history: path.display().to_string(),
        epochs: h.len(),
        convergence_epoch: convergence_epoch(&h.test_loss)?,
        stability: stability(h)?,
        mean_epoch_seconds: h.wall_seconds.iter().sum::<f64>() / h.len() as f64,
        metrics: metrics.map(|p| read_json(p)).transpose()?,
    })
}

pub struct CompareInputs {
    pub histories: [PathBuf; 2],
    pub names: [String; 2],
    pub metrics: [Option<PathBuf>; 2],
}

pub fn compare_report(inputs: &CompareInputs) -> Result<CompareReport, CliError> {
    let a = EpochHistory::load_csv(&inputs.histories[0])?;
    let b = EpochHistory::load_csv(&inputs.histories[1])?;
    for (h, p) in [(&a, &inputs.histories[0]), (&b, &inputs.histories[1])] {
        if h.len() < 2 {
            return Err(CliError::data(format!("{} has {} epochs; at least 2 are needed", p.display(), h.len())));
        }
    }
    Ok(CompareReport {
        models: [
            summarize(&inputs.names[0], &inputs.histories[0], &a, inputs.metrics[0].as_ref())?,
            summarize(&inputs.names[1], &inputs.histories[1], &b, inputs.metrics[1].as_ref())?,
        ],
        train_loss: loss_tests(&a.train_loss, &b.train_loss)?,
        test_loss: loss_tests(&a.test_loss, &b.test_loss)?,
    })
}

/// Writes `compare.json`.
pub fn compare(cfg: &RunConfig, inputs: &CompareInputs) -> Result<Vec<PathBuf>, CliError> {
    let report = compare_report(inputs)?;
    ensure_dir(&cfg.out)?;
    let p = cfg.out.join("compare.json");
    write_json(&p, &report)?;
    Ok(vec![p])
}

/// Parses `key=v1,v2,...` axes into their cartesian product, first axis slowest.
pub fn grid_combos(axes: &[String]) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut keys = Vec::new();
    let mut values: Vec<Vec<String>> = Vec::new();
    for axis in axes {
        let (k, v) = axis
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("grid axis '{axis}' must look like key=v1,v2")))?;
        let k = normalize_key(k);
        if keys.contains(&k) {
            return Err(CliError::usage(format!("grid key '{k}' given twice")));
        }
        let vs: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if vs.is_empty() {
            return Err(CliError::usage(format!("grid key '{k}' has no values")));
        }
        keys.push(k);
        values.push(vs);
    }
    if keys.is_empty() {
        return Err(CliError::usage("grid needs at least one --grid key=v1,v2 axis"));
    }
    let total = values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
    match total {
        Some(n) if n <= MAX_GRID_COMBOS => {}
        _ => {
            return Err(CliError::usage(format!(
                "grid has more than {MAX_GRID_COMBOS} combinations"
            )))
        }
    }
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for vs in &values {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vs.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    Ok((keys, combos))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Trains every combination with the shared seed and writes `grid.csv`,
/// ranked by final test MSE.
pub fn grid(cfg: &RunConfig, axes: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let (keys, combos) = grid_combos(axes)?;
    let mut configs = Vec::with_capacity(combos.len());
    for combo in &combos {
        let mut c = cfg.clone();
        for (k, v) in keys.iter().zip(combo) {
            c.set(k, v)?;
        }
        configs.push(c);
    }
    let mut rows = Vec::with_capacity(configs.len());
    for (i, (c, combo)) in configs.iter().zip(&combos).enumerate() {
        eprintln!("grid {}/{}: {}", i + 1, configs.len(), keys.iter().zip(combo).map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" "));
        let f = fit(c, false)?;
        rows.push((i, combo, f.metrics));
    }
    rows.sort_by(|a, b| a.2.final_test_loss.total_cmp(&b.2.final_test_loss).then(a.0.cmp(&b.0)));

    let mut out = String::from("rank,combination");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push_str(",final_train_loss,final_test_loss,test_mae,test_rmse\n");
    for (rank, (i, combo, m)) in rows.iter().enumerate() {
        out.push_str(&format!("{},{}", rank + 1, i + 1));
        for v in combo.iter() {
            out.push(',');
            out.push_str(&csv_field(v));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            m.final_train_loss, m.final_test_loss, m.scaled.mae, m.scaled.rmse
        ));
    }
    ensure_dir(&cfg.out)?;
    let p = cfg.out.join("grid.csv");
    write_text(&p, &out)?;
    Ok(vec![p])
}

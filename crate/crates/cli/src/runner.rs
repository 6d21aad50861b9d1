//! Builds datasets from a spec, trains CauchyNet (and the baseline), and
//! writes a run directory.

use std::path::Path;
use std::time::Instant;

use cauchynet::baseline::{MlpModel, MLP_MODEL_TYPE};
use cauchynet::data::{
    find_turning_points, load_series_csv, make_masked_split, make_split_with, sample_grid, sample_uniform,
    seasonal_decompose_multiplicative, linspace, MissingMask, Sample, ScalerState, SplitDataset,
};
use cauchynet::model::parameter_count;
use cauchynet::optim::train_with_observer;
use cauchynet::{CauchyNet, Error, Rng, TrainConfig, TrainLog, Trainable};

use crate::error::{CliError, Result};
use crate::metrics::{errors_csv, imputation_csv, metrics_csv, predict_all, predict_constant, predictions_csv};
use crate::metrics::{MetricsReport, Prediction};
use crate::output::{Manifest, RunDir, RunStatus};
use crate::spec::{ExperimentSpec, MaskSpec, Sampling};

// Stream ids sit far above any epoch index, which the trainer uses for its
// per-epoch shuffles.
const DATA_STREAM: u64 = 1 << 40;
const INIT_STREAM: u64 = DATA_STREAM + 1;
const BASELINE_STREAM: u64 = DATA_STREAM + 2;

pub const CAUCHY_MODEL: &str = "cauchynet";
pub const CONSTANT_MODEL: &str = "constant_mean";

/// Raw and scaled views of the same split, plus how it was made.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub raw: SplitDataset,
    pub scaled: SplitDataset,
    pub scaler: ScalerState,
    pub mask: Option<MissingMask>,
}

pub fn prepare_data(spec: &ExperimentSpec) -> Result<PreparedData> {
    spec.validate()?;
    let d = &spec.data;
    let mut rng = Rng::derived(spec.train.seed, DATA_STREAM);
    let [f_train, f_val, f_test] = d.fractions;

    let (raw, mask) = if let Some(target) = spec.target()? {
        let samples = match d.sampling {
            Sampling::Grid => sample_grid(target, d.samples),
            Sampling::Uniform => sample_uniform(target, d.samples, &mut rng),
        };
        let mask = match &d.mask {
            Some(MaskSpec::TurningPoints { half_width, grid }) => {
                let centers = find_turning_points(|x| target.eval(&[x]), target.domain(), *grid);
                Some(MissingMask::Intervals { centers, half_width: *half_width })
            }
            Some(_) => spec.static_mask(),
            None => None,
        };
        let raw = match &mask {
            Some(m) => make_masked_split(&samples, m, d.visible_train_fraction, &mut rng)?,
            None => make_split_with(&samples, (f_train, f_val, f_test), d.split, &mut rng)?,
        };
        let provenance = format!("{} n={} sampling={:?} seed={}", target.name(), d.samples, d.sampling, spec.train.seed);
        (raw.with_provenance(provenance), mask)
    } else {
        let csv = d.csv.as_ref().expect("validated: csv source present");
        let series = load_series_csv(&csv.path, &csv.column)?;
        let dec = seasonal_decompose_multiplicative(&series, csv.period)?;
        let trend: Vec<f64> = dec.trend.iter().flatten().copied().collect();
        let xs = linspace(-1.0, 1.0, trend.len());
        let samples: Vec<Sample> = xs.into_iter().zip(trend).map(|(x, y)| Sample::new(vec![x], y)).collect();
        let raw = make_split_with(&samples, (f_train, f_val, f_test), d.split, &mut rng)?;
        let provenance = format!("trend of {}:{} period={}", csv.path.display(), csv.column, csv.period);
        (raw.with_provenance(provenance), None)
    };

    let ys: Vec<f64> = raw.train.iter().map(|s| s.y).collect();
    let scaler = ScalerState::fit(&ys, (d.scaler_range[0], d.scaler_range[1]))?;
    let scaled = raw.map_targets(|y| scaler.apply(y));
    Ok(PreparedData { raw, scaled, scaler, mask })
}

pub fn init_cauchy(spec: &ExperimentSpec, inputs: usize) -> Result<CauchyNet> {
    let mut rng = Rng::derived(spec.train.seed, INIT_STREAM);
    Ok(CauchyNet::init(spec.model.hidden, inputs, spec.model.epsilon, spec.model.init, &mut rng)?)
}

pub fn init_baseline(spec: &ExperimentSpec, hidden: usize, inputs: usize) -> Result<MlpModel> {
    let mut rng = Rng::derived(spec.train.seed, BASELINE_STREAM);
    Ok(MlpModel::init_kaiming(hidden, inputs, &mut rng)?)
}

pub fn baseline_config(spec: &ExperimentSpec) -> Option<TrainConfig> {
    spec.baseline.as_ref().map(|b| TrainConfig { lr: b.lr.unwrap_or(spec.train.lr), ..spec.train })
}

/// A trained model, or the log up to the point training failed.
pub struct Fitted<M> {
    pub model: M,
    pub log: TrainLog,
    pub wall_ms: f64,
    pub failure: Option<Error>,
}

pub fn fit<M: Trainable>(
    mut model: M,
    data: &PreparedData,
    config: &TrainConfig,
    observer: impl FnMut(usize, &M) -> cauchynet::Result<()>,
) -> Fitted<M> {
    let started = Instant::now();
    let result = train_with_observer(&mut model, &data.scaled, config, observer);
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(log) => Fitted { model, log, wall_ms, failure: None },
        Err(e) => {
            let log = match &e {
                Error::Diverged { log, .. } => (**log).clone(),
                _ => TrainLog::default(),
            };
            Fitted { model, log, wall_ms, failure: Some(e) }
        }
    }
}

/// Everything a finished run reports back.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub metrics: Vec<MetricsReport>,
    pub log: TrainLog,
    pub baseline_log: Option<TrainLog>,
    pub mask: Option<MissingMask>,
    pub data: PreparedData,
}

impl RunOutcome {
    pub fn metric(&self, model: &str, split: &str) -> Option<&MetricsReport> {
        self.metrics.iter().find(|m| m.model == model && m.split == split)
    }
}

fn trainlog_text(log: &TrainLog, timings: bool) -> Result<String> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf, timings)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

pub fn parameter_note(hidden: usize, inputs: usize) -> String {
    let pc = parameter_count(hidden, inputs);
    format!(
        "parameter count with h={hidden}, m={inputs}: h(m+1) = {} complex parameters, 2h(m+1) = {} real scalars; \
         model-size tables may quote either figure, so both are reported",
        pc.complex, pc.real
    )
}

fn run_failed(
    run: RunDir,
    spec: &ExperimentSpec,
    command: &str,
    err: Error,
    mut notes: Vec<String>,
) -> Result<RunOutcome> {
    notes.push("outputs are incomplete; files listed here are the ones that were written".into());
    run.finish(command, spec, RunStatus::Partial, Some(err.to_string()), notes)?;
    Err(CliError::Core(err))
}

/// Train and evaluate, writing `trainlog.csv`, `predictions.csv`,
/// `metrics.csv`, `errors.csv`, `dataset.csv`, `checkpoint.json`, baseline
/// counterparts, `imputation.csv` for masked runs, and `manifest.json` last.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunOutcome> {
    run_experiment_as(spec, out_dir, "train")
}

pub fn run_experiment_as(spec: &ExperimentSpec, out_dir: &Path, command: &str) -> Result<RunOutcome> {
    let data = prepare_data(spec)?;
    let inputs = data.raw.inputs;
    let timings = spec.output.record_timings;
    let mut run = RunDir::create(out_dir)?;
    let mut notes = vec![parameter_note(spec.model.hidden, inputs), format!("data: {}", data.raw.provenance)];

    let mut dataset = Vec::new();
    data.raw.write_csv(&mut dataset)?;
    run.write("dataset.csv", dataset)?;

    let net = init_cauchy(spec, inputs)?;
    let fitted = fit(net, &data, &spec.train, |_, _| Ok(()));
    run.write("trainlog.csv", trainlog_text(&fitted.log, timings)?)?;
    if let Some(err) = fitted.failure {
        return run_failed(run, spec, command, err, notes);
    }
    let net = fitted.model;
    let log = fitted.log;

    let preds = match predict_all(&net, &data.raw, &data.scaler) {
        Ok(p) => p,
        Err(e) => return run_failed(run, spec, command, e, notes),
    };
    run.write("predictions.csv", predictions_csv(&preds, inputs))?;
    run.write("checkpoint.json", net.checkpoint_json(&data.scaler, spec.train.seed)?)?;
    let pc = net.parameter_count();
    let wall = |ms: f64| timings.then_some(ms);
    let mut metrics = MetricsReport::from_predictions(CAUCHY_MODEL, &preds, Some(pc.complex), pc.real, wall(fitted.wall_ms))?;

    if data.mask.is_some() {
        run.write("imputation.csv", imputation_csv(&preds, inputs))?;
        let mean = data.raw.train.iter().map(|s| s.y).sum::<f64>() / data.raw.train.len() as f64;
        let constant = predict_constant(&data.raw, mean);
        metrics.extend(MetricsReport::from_predictions(CONSTANT_MODEL, &constant, None, 1, None)?);
    }

    let mut baseline_log = None;
    let mut failure = None;
    if let (Some(bl), Some(cfg)) = (&spec.baseline, baseline_config(spec)) {
        let mlp = init_baseline(spec, bl.hidden, inputs)?;
        let fitted = fit(mlp, &data, &cfg, |_, _| Ok(()));
        run.write("baseline_trainlog.csv", trainlog_text(&fitted.log, timings)?)?;
        baseline_log = Some(fitted.log);
        match fitted.failure {
            Some(e) => failure = Some(e),
            None => match predict_all(&fitted.model, &data.raw, &data.scaler) {
                Ok(bp) => {
                    run.write("baseline_predictions.csv", predictions_csv(&bp, inputs))?;
                    run.write("baseline_checkpoint.json", fitted.model.checkpoint_json(&data.scaler, spec.train.seed)?)?;
                    let count = fitted.model.parameter_count();
                    metrics.extend(MetricsReport::from_predictions(MLP_MODEL_TYPE, &bp, None, count, wall(fitted.wall_ms))?);
                }
                Err(e) => failure = Some(e),
            },
        }
    }

    run.write("metrics.csv", metrics_csv(&metrics))?;
    run.write("errors.csv", errors_csv(&metrics))?;
    if let Some(mask) = &data.mask {
        notes.push(format!("withheld region: {} zone(s), {mask:?}; test split is the withheld region", mask.zones()));
    }
    if let Some(e) = failure {
        notes.push("baseline failed; CauchyNet outputs are complete".into());
        return run_failed(run, spec, command, e, notes);
    }
    let manifest = run.finish(command, spec, RunStatus::Complete, None, notes)?;
    Ok(RunOutcome { manifest, metrics, log, baseline_log, mask: data.mask.clone(), data })
}

/// Re-score a saved checkpoint on the spec's data. The checkpoint's scaler
/// is used, not a refit one.
pub fn evaluate_checkpoint(spec: &ExperimentSpec, checkpoint: &Path, out_dir: &Path) -> Result<Vec<MetricsReport>> {
    let text = std::fs::read_to_string(checkpoint)
        .map_err(|e| CliError::io(format!("reading {}", checkpoint.display()), e))?;
    let kind: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Core(Error::Parse(format!("checkpoint: {e}"))))?;
    let mut data = prepare_data(spec)?;
    let inputs = data.raw.inputs;
    let (preds, reports) = if kind.get("model_type").and_then(|v| v.as_str()) == Some(MLP_MODEL_TYPE) {
        let (mlp, scaler, _) = MlpModel::from_checkpoint_json(&text)?;
        check_inputs(mlp.inputs(), inputs)?;
        data.scaler = scaler;
        let preds = predict_all(&mlp, &data.raw, &data.scaler)?;
        let reports = MetricsReport::from_predictions(MLP_MODEL_TYPE, &preds, None, mlp.parameter_count(), None)?;
        (preds, reports)
    } else {
        let (net, scaler, _) = CauchyNet::from_checkpoint_json(&text)?;
        check_inputs(net.inputs(), inputs)?;
        data.scaler = scaler;
        let preds = predict_all(&net, &data.raw, &data.scaler)?;
        let pc = net.parameter_count();
        let reports = MetricsReport::from_predictions(CAUCHY_MODEL, &preds, Some(pc.complex), pc.real, None)?;
        (preds, reports)
    };
    let mut run = RunDir::create(out_dir)?;
    run.write("predictions.csv", predictions_csv(&preds, inputs))?;
    run.write("metrics.csv", metrics_csv(&reports))?;
    run.write("errors.csv", errors_csv(&reports))?;
    let notes = vec![format!("evaluated {}", checkpoint.display())];
    run.finish("evaluate", spec, RunStatus::Complete, None, notes)?;
    Ok(reports)
}

fn check_inputs(model: usize, data: usize) -> Result<()> {
    if model != data {
        return Err(CliError::Core(Error::ShapeMismatch(format!(
            "checkpoint expects {model} inputs but the data has {data}"
        ))));
    }
    Ok(())
}

/// Unscaled test MSE of `model`.
pub fn test_mse<M: Trainable>(model: &M, data: &PreparedData) -> cauchynet::Result<f64> {
    let preds: Vec<Prediction> = predict_all(model, &data.raw, &data.scaler)?
        .into_iter()
        .filter(|p| p.split == "test")
        .collect();
    let y_pred: Vec<f64> = preds.iter().map(|p| p.y_pred).collect();
    let y_true: Vec<f64> = preds.iter().map(|p| p.y_true).collect();
    crate::metrics::metric_mse(&y_pred, &y_true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::resolve_spec;

    fn tiny(extra: &[&str]) -> ExperimentSpec {
        let mut o: Vec<String> = ["train.epochs=3", "model.hidden=8", "baseline.hidden=8"].map(String::from).to_vec();
        o.extend(extra.iter().map(|s| s.to_string()));
        resolve_spec(crate::presets::preset_toml("exp1").unwrap(), None, &o).unwrap()
    }

    #[test]
    fn streams_are_independent_of_each_other() {
        let spec = tiny(&[]);
        let a = prepare_data(&spec).unwrap();
        let b = prepare_data(&spec).unwrap();
        assert_eq!(a.raw, b.raw);
        assert_eq!(a.raw.train.len(), 150);
        assert_eq!(a.raw.val.len(), 75);
        let net = init_cauchy(&spec, 1).unwrap();
        assert_eq!(net.to_flat(), init_cauchy(&spec, 1).unwrap().to_flat());
    }

    #[test]
    fn scaled_train_spans_range() {
        let data = prepare_data(&tiny(&[])).unwrap();
        let ys: Vec<f64> = data.scaled.train.iter().map(|s| s.y).collect();
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - 0.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_run_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&tiny(&[]), dir.path()).unwrap();
        for f in ["dataset.csv", "trainlog.csv", "predictions.csv", "checkpoint.json", "metrics.csv", "baseline_checkpoint.json"] {
            assert!(out.manifest.file(f).is_some(), "{f}");
            assert!(dir.path().join(f).exists());
        }
        assert_eq!(out.manifest.status, RunStatus::Complete);
        assert_eq!(out.log.records.len(), 3);
        assert!(out.metric(MLP_MODEL_TYPE, "test").is_some());
        let back = Manifest::load(dir.path()).unwrap();
        assert_eq!(back, out.manifest);
    }

    #[test]
    fn evaluate_reproduces_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&tiny(&[]), dir.path()).unwrap();
        let eval_dir = dir.path().join("eval");
        let reports = evaluate_checkpoint(&tiny(&[]), &dir.path().join("checkpoint.json"), &eval_dir).unwrap();
        let test = reports.iter().find(|r| r.split == "test").unwrap();
        assert_eq!(test.mse, out.metric(CAUCHY_MODEL, "test").unwrap().mse);
        let mlp = evaluate_checkpoint(&tiny(&[]), &dir.path().join("baseline_checkpoint.json"), &eval_dir).unwrap();
        assert_eq!(mlp[2].mse, out.metric(MLP_MODEL_TYPE, "test").unwrap().mse);
    }
}

//! Multi-run studies: the imaginary-penalty ablation and the sensitivity grid.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::output::{RunDir, RunStatus};
use crate::runner::{fit, init_cauchy, prepare_data, test_mse};
use crate::spec::{validate_lambdas, ExperimentSpec, SweepGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub lambda: f64,
    pub seed: u64,
    pub epoch: usize,
    /// NaN for snapshots after training diverged.
    pub test_mse: f64,
}

/// Snapshot epochs: every `every`-th, plus the last.
fn snapshot_epochs(epochs: usize, every: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=epochs).filter(|e| e % every == 0).collect();
    if out.last() != Some(&epochs) {
        out.push(epochs);
    }
    out
}

/// Train once per lambda with the base seed, recording unscaled test MSE at
/// each snapshot epoch. Every lambda gets a complete row group.
pub fn run_lambda_ablation(
    base: &ExperimentSpec,
    lambdas: &[f64],
    every: usize,
) -> Result<(Vec<AblationRow>, Vec<String>)> {
    validate_lambdas(lambdas)?;
    if every < 1 {
        return Err(CliError::config("snapshot interval must be >= 1"));
    }
    let data = prepare_data(base)?;
    let snapshots = snapshot_epochs(base.train.epochs, every);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &lambda in lambdas {
        let config = cauchynet::TrainConfig { lambda, ..base.train };
        let net = init_cauchy(base, data.raw.inputs)?;
        let mut recorded: Vec<(usize, f64)> = Vec::new();
        let fitted = fit(net, &data, &config, |epoch, model| {
            if snapshots.binary_search(&epoch).is_ok() {
                recorded.push((epoch, test_mse(model, &data)?));
            }
            Ok(())
        });
        if let Some(err) = fitted.failure {
            if !err.is_numerical() {
                return Err(err.into());
            }
            notes.push(format!("lambda {lambda}: {err}"));
        }
        for &epoch in &snapshots {
            let mse = recorded.iter().find(|(e, _)| *e == epoch).map_or(f64::NAN, |(_, m)| *m);
            rows.push(AblationRow { lambda, seed: base.train.seed, epoch, test_mse: mse });
        }
    }
    Ok((rows, notes))
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("lambda,seed,epoch,test_mse\n");
    for r in rows {
        out += &format!("{},{},{},{}\n", r.lambda, r.seed, r.epoch, r.test_mse);
    }
    out
}

/// Run the ablation and write `lambda_ablation.csv` plus a manifest.
pub fn write_lambda_ablation(base: &ExperimentSpec, lambdas: &[f64], every: usize, out_dir: &Path) -> Result<Vec<AblationRow>> {
    let (rows, mut notes) = run_lambda_ablation(base, lambdas, every)?;
    let mut run = RunDir::create(out_dir)?;
    run.write("lambda_ablation.csv", ablation_csv(&rows))?;
    for &l in lambdas {
        if let Some(r) = rows.iter().rev().find(|r| r.lambda == l) {
            notes.push(format!("lambda {l}: final test MSE {}", r.test_mse));
        }
    }
    run.finish("ablate-lambda", base, RunStatus::Complete, None, notes)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub hidden: usize,
    pub samples: usize,
    pub lr: f64,
    pub weight_decay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: SweepCell,
    /// NaN when the cell failed.
    pub test_mse: f64,
    pub note: String,
}

/// Cross product of each grid's axes; missing axes take the base value.
pub fn expand_grids(base: &ExperimentSpec, grids: &[SweepGrid]) -> Result<Vec<SweepCell>> {
    if grids.is_empty() {
        return Err(CliError::config("no sweep grid given"));
    }
    let mut cells = Vec::new();
    for g in grids {
        g.validate()?;
        let hidden = g.hidden.clone().unwrap_or_else(|| vec![base.model.hidden]);
        let sizes = g.sizes.clone().unwrap_or_else(|| vec![base.data.samples]);
        let lrs = g.lrs.clone().unwrap_or_else(|| vec![base.train.lr]);
        let wds = g.wds.clone().unwrap_or_else(|| vec![base.train.weight_decay]);
        for &h in &hidden {
            for &n in &sizes {
                for &lr in &lrs {
                    for &wd in &wds {
                        cells.push(SweepCell { hidden: h, samples: n, lr, weight_decay: wd });
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn run_cell(base: &ExperimentSpec, cell: &SweepCell) -> Result<f64> {
    let mut spec = base.clone();
    spec.model.hidden = cell.hidden;
    spec.data.samples = cell.samples;
    spec.train.lr = cell.lr;
    spec.train.weight_decay = cell.weight_decay;
    spec.validate()?;
    let data = prepare_data(&spec)?;
    let net = init_cauchy(&spec, data.raw.inputs)?;
    let fitted = fit(net, &data, &spec.train, |_, _| Ok(()));
    if let Some(err) = fitted.failure {
        return Err(err.into());
    }
    Ok(test_mse(&fitted.model, &data)?)
}

/// Every cell trains its own model; `threads` caps the worker pool
/// (0 lets rayon decide). Rows come back in cell order.
pub fn run_sensitivity_grid(base: &ExperimentSpec, grids: &[SweepGrid], threads: usize) -> Result<Vec<SweepRow>> {
    let cells = expand_grids(base, grids)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| match run_cell(base, cell) {
                Ok(mse) => SweepRow { cell: cell.clone(), test_mse: mse, note: String::new() },
                Err(e) => SweepRow { cell: cell.clone(), test_mse: f64::NAN, note: e.to_string() },
            })
            .collect()
    });
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("h,n,lr,wd,test_mse,note\n");
    for r in rows {
        let note = r.note.replace(['"', '\n', '\r'], " ");
        let note = if note.contains(',') { format!("\"{note}\"") } else { note };
        out += &format!("{},{},{},{},{},{}\n", r.cell.hidden, r.cell.samples, r.cell.lr, r.cell.weight_decay, r.test_mse, note);
    }
    out
}

/// Run the grid and write `sweep.csv`. Fails only when every cell failed,
/// after the table has been written.
pub fn write_sensitivity_grid(base: &ExperimentSpec, grids: &[SweepGrid], threads: usize, out_dir: &Path) -> Result<Vec<SweepRow>> {
    let rows = run_sensitivity_grid(base, grids, threads)?;
    let mut run = RunDir::create(out_dir)?;
    run.write("sweep.csv", sweep_csv(&rows))?;
    let failed = rows.iter().filter(|r| r.test_mse.is_nan()).count();
    let notes = vec![format!("{} cells, {failed} failed", rows.len())];
    if failed == rows.len() {
        let msg = format!("all {failed} sweep cells failed; first: {}", rows[0].note);
        run.finish("sweep", base, RunStatus::Partial, Some(msg.clone()), notes)?;
        return Err(CliError::AllCellsFailed(msg));
    }
    run.finish("sweep", base, RunStatus::Complete, None, notes)?;
    Ok(rows)
}

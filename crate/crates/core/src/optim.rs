//! Adam over real parameter components, step-decay learning rate, and the
//! shared minibatch training loop.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::complex_linalg::Rng;
use crate::data::{Sample, SplitDataset};
use crate::error::{Error, Result};
use crate::grad::{self, GradientSet, LossValue};
use crate::model::CauchyNet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: usize,
    pub weight_decay: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// The common setup: batch 32, Adam at 0.01 halved every 100 epochs,
    /// weight decay 1e-4, lambda 0.1, seed 10, 200 epochs.
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            lr: 0.01,
            lr_decay_factor: 0.5,
            lr_decay_every: 100,
            weight_decay: 1e-4,
            lambda: 0.1,
            seed: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.epochs < 1 {
            return bad("epochs must be >= 1".into());
        }
        if self.batch_size < 1 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return bad(format!("lr must be > 0, got {}", self.lr));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad(format!("lr_decay_factor must be in (0, 1], got {}", self.lr_decay_factor));
        }
        if self.lr_decay_every < 1 {
            return bad("lr_decay_every must be >= 1".into());
        }
        if !(self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        Ok(())
    }
}

/// `lr0 * factor^floor(epoch / every)` for a zero-based epoch index.
pub fn lr_at(config: &TrainConfig, epoch: usize) -> f64 {
    let halvings = (epoch / config.lr_decay_every.max(1)) as i32;
    config.lr * config.lr_decay_factor.powi(halvings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self::with_hyperparameters(len, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparameters(len: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m1: vec![0.0; len],
            m2: vec![0.0; len],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    /// One bias-corrected Adam update. Weight decay is coupled: `wd * theta`
    /// is added to the raw gradient before the moment updates.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, weight_decay: f64) -> Result<()> {
        if params.len() != self.m1.len() {
            return Err(Error::LengthMismatch(params.len(), self.m1.len()));
        }
        if grads.len() != params.len() {
            return Err(Error::LengthMismatch(grads.len(), params.len()));
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powf(self.t as f64);
        let c2 = 1.0 - self.beta2.powf(self.t as f64);
        for (j, p) in params.iter_mut().enumerate() {
            let g = grads[j] + weight_decay * *p;
            self.m1[j] = self.beta1 * self.m1[j] + (1.0 - self.beta1) * g;
            self.m2[j] = self.beta2 * self.m2[j] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m1[j] / c1;
            let v_hat = self.m2[j] / c2;
            let next = *p - lr * m_hat / (v_hat.sqrt() + self.eps);
            if !next.is_finite() {
                return Err(Error::NonFinite(format!("adam update of parameter {j}")));
            }
            *p = next;
        }
        Ok(())
    }
}

/// Adam step applied directly to a CauchyNet with a packed gradient set.
pub fn adam_step(
    model: &mut CauchyNet,
    grads: &GradientSet,
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    let mut params = model.to_flat();
    state.step(&mut params, &grads.to_flat(), lr, weight_decay)?;
    model.set_flat(&params)
}

/// What the training loop needs from a model: flat parameter access, a
/// complex-valued prediction, and mean loss/gradient over a batch.
pub trait Trainable {
    fn input_dim(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    /// `(y, e)`: real prediction and imaginary part (0 for real models).
    fn predict_pair(&self, x: &[f64]) -> Result<(f64, f64)>;
    fn batch_loss_grad(&self, batch: &[&Sample], lambda: f64) -> Result<(LossValue, Vec<f64>)>;
}

impl Trainable for CauchyNet {
    fn input_dim(&self) -> usize {
        self.inputs()
    }

    fn params(&self) -> Vec<f64> {
        self.to_flat()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.set_flat(params)
    }

    fn predict_pair(&self, x: &[f64]) -> Result<(f64, f64)> {
        let fo = self.forward(x)?;
        Ok((fo.y, fo.e))
    }

    fn batch_loss_grad(&self, batch: &[&Sample], lambda: f64) -> Result<(LossValue, Vec<f64>)> {
        let (l, g) = grad::batch_gradients(self, batch.iter().map(|s| (&s.x[..], s.y)), lambda)?;
        Ok((l, g.to_flat()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// One-based.
    pub epoch: usize,
    pub lr: f64,
    /// Mean penalized loss over the full training split after the epoch.
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_mse: f64,
    pub val_mse: f64,
    /// Mean `|e|` on the validation split.
    pub val_mean_abs_imag: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// `epoch,lr,train_loss,val_loss,wall_ms`. With `include_timing == false`
    /// the wall_ms column is left empty so the file is reproducible.
    pub fn write_csv<W: Write>(&self, mut out: W, include_timing: bool) -> Result<()> {
        writeln!(out, "epoch,lr,train_loss,val_loss,wall_ms")?;
        for r in &self.records {
            if include_timing {
                writeln!(out, "{},{},{},{},{:.3}", r.epoch, r.lr, r.train_loss, r.val_loss, r.wall_ms)?;
            } else {
                writeln!(out, "{},{},{},{},", r.epoch, r.lr, r.train_loss, r.val_loss)?;
            }
        }
        Ok(())
    }
}

/// Mean loss over a split plus mean `|e|`.
pub fn evaluate_split<M: Trainable>(model: &M, samples: &[Sample], lambda: f64) -> Result<(LossValue, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty split".into()));
    }
    let mut acc = (0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let (y, e) = model.predict_pair(&s.x)?;
        let l = grad::loss(y, e, s.y, lambda)?;
        acc.0 += l.total;
        acc.1 += l.fit;
        acc.2 += l.imag_penalty;
        acc.3 += e.abs();
    }
    let n = samples.len() as f64;
    let lv = LossValue { total: acc.0 / n, fit: acc.1 / n, imag_penalty: acc.2 / n };
    if !lv.total.is_finite() {
        return Err(Error::NonFinite("split loss".into()));
    }
    Ok((lv, acc.3 / n))
}

pub fn train<M: Trainable>(model: &mut M, dataset: &SplitDataset, config: &TrainConfig) -> Result<TrainLog> {
    train_with_observer(model, dataset, config, |_, _| Ok(()))
}

/// Shuffled minibatch Adam on the mean penalized loss. `observer` runs after
/// every epoch with the one-based epoch number.
///
/// Each epoch shuffles with its own generator derived from `(seed, epoch)`,
/// so the order never depends on anything else consuming randomness.
pub fn train_with_observer<M, F>(
    model: &mut M,
    dataset: &SplitDataset,
    config: &TrainConfig,
    mut observer: F,
) -> Result<TrainLog>
where
    M: Trainable,
    F: FnMut(usize, &M) -> Result<()>,
{
    config.validate()?;
    if dataset.train.is_empty() || dataset.val.is_empty() {
        return Err(Error::InvalidArgument("train and validation splits must be non-empty".into()));
    }
    if dataset.inputs != model.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} inputs but model expects {}",
            dataset.inputs,
            model.input_dim()
        )));
    }

    let mut params = model.params();
    let mut adam = AdamState::new(params.len());
    let mut log = TrainLog::default();
    let started = Instant::now();
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();

    for epoch in 0..config.epochs {
        let lr = lr_at(config, epoch);
        let mut rng = Rng::derived(config.seed, epoch as u64);
        order.sort_unstable();
        rng.shuffle(&mut order);

        let fail = |reason: String, log: &TrainLog| Error::Diverged {
            epoch: epoch + 1,
            reason,
            log: Box::new(log.clone()),
        };

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &dataset.train[i]).collect();
            let (_, grads) = model
                .batch_loss_grad(&batch, config.lambda)
                .map_err(|e| fail(e.to_string(), &log))?;
            adam.step(&mut params, &grads, lr, config.weight_decay)
                .map_err(|e| fail(e.to_string(), &log))?;
            model.set_params(&params)?;
        }

        let (train_l, _) =
            evaluate_split(model, &dataset.train, config.lambda).map_err(|e| fail(e.to_string(), &log))?;
        let (val_l, val_e) =
            evaluate_split(model, &dataset.val, config.lambda).map_err(|e| fail(e.to_string(), &log))?;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            lr,
            train_loss: train_l.total,
            val_loss: val_l.total,
            train_mse: train_l.fit,
            val_mse: val_l.fit,
            val_mean_abs_imag: val_e,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        observer(epoch + 1, model)?;
    }
    Ok(log)
}

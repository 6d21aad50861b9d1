//! Real-valued single-hidden-layer ReLU network used as a comparison model.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex_linalg::Rng;
use crate::data::{Sample, ScalerState};
use crate::error::{Error, Result};
use crate::grad::LossValue;
use crate::optim::Trainable;

pub const MLP_MODEL_TYPE: &str = "relu_mlp";

/// `y = W2 . relu(W1 x + b1) + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `h x m`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    hidden: usize,
    inputs: usize,
}

/// Partials of `(y - t)^2`, laid out like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpGradients {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w1.len() + 2 * self.b1.len() + 1);
        out.extend(&self.w1);
        out.extend(&self.b1);
        out.extend(&self.w2);
        out.push(self.b2);
        out
    }
}

impl MlpModel {
    pub fn new(hidden: usize, inputs: usize, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self> {
        if hidden == 0 || inputs == 0 {
            return Err(Error::InvalidArgument("need h >= 1 and m >= 1".into()));
        }
        if w1.len() != hidden * inputs || b1.len() != hidden || w2.len() != hidden {
            return Err(Error::ShapeMismatch(format!(
                "W1 {} (want {}), b1 {}, W2 {} (want {hidden})",
                w1.len(),
                hidden * inputs,
                b1.len(),
                w2.len()
            )));
        }
        Ok(MlpModel { w1, b1, w2, b2, hidden, inputs })
    }

    pub fn zeros(hidden: usize, inputs: usize) -> Result<Self> {
        Self::new(hidden, inputs, vec![0.0; hidden * inputs], vec![0.0; hidden], vec![0.0; hidden], 0.0)
    }

    /// `W1 ~ N(0, 2/m)`, `W2 ~ N(0, 2/h)`, zero biases.
    pub fn init_kaiming(hidden: usize, inputs: usize, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(hidden, inputs)?;
        let s1 = (2.0 / inputs as f64).sqrt();
        let s2 = (2.0 / hidden as f64).sqrt();
        net.w1.iter_mut().for_each(|w| *w = rng.normal(s1));
        net.w2.iter_mut().for_each(|w| *w = rng.normal(s2));
        Ok(net)
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// `h(m + 2) + 1`.
    pub fn parameter_count(&self) -> usize {
        self.hidden * (self.inputs + 2) + 1
    }

    fn pre_activation(&self, k: usize, x: &[f64]) -> f64 {
        let row = &self.w1[k * self.inputs..(k + 1) * self.inputs];
        row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[k]
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::LengthMismatch(x.len(), self.inputs));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let y = (0..self.hidden).map(|k| self.w2[k] * self.pre_activation(k, x).max(0.0)).sum::<f64>() + self.b2;
        Ok(y)
    }

    /// Exact partials of `(y - target)^2`; the ReLU subgradient at 0 is 0.
    pub fn backward(&self, x: &[f64], target: f64) -> Result<(f64, MlpGradients)> {
        self.check(x)?;
        let z: Vec<f64> = (0..self.hidden).map(|k| self.pre_activation(k, x)).collect();
        let y = z.iter().zip(&self.w2).map(|(z, w)| w * z.max(0.0)).sum::<f64>() + self.b2;
        let delta = 2.0 * (y - target);
        let mut g = MlpGradients {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.hidden],
            b2: delta,
        };
        for k in 0..self.hidden {
            if z[k] > 0.0 {
                g.w2[k] = delta * z[k];
                let dz = delta * self.w2[k];
                g.b1[k] = dz;
                for (gw, xi) in g.w1[k * self.inputs..(k + 1) * self.inputs].iter_mut().zip(x) {
                    *gw = dz * xi;
                }
            }
        }
        Ok(((y - target).powi(2), g))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        MlpGradients { w1: self.w1.clone(), b1: self.b1.clone(), w2: self.w2.clone(), b2: self.b2 }.to_flat()
    }

    pub fn set_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::LengthMismatch(params.len(), self.parameter_count()));
        }
        let (w1, rest) = params.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
        Ok(())
    }

    pub fn checkpoint_json(&self, scaler: &ScalerState, seed: u64) -> Result<String> {
        let file = MlpCheckpoint {
            model_type: MLP_MODEL_TYPE.into(),
            version: crate::model::CHECKPOINT_VERSION,
            h: self.hidden,
            m: self.inputs,
            w1: self.w1.chunks(self.inputs).map(<[f64]>::to_vec).collect(),
            b1: self.b1.clone(),
            w2: self.w2.clone(),
            b2: self.b2,
            scaler: *scaler,
            seed,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn save_checkpoint(&self, scaler: &ScalerState, seed: u64, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.checkpoint_json(scaler, seed)?)?;
        Ok(())
    }

    pub fn from_checkpoint_json(text: &str) -> Result<(Self, ScalerState, u64)> {
        let file: MlpCheckpoint = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.model_type != MLP_MODEL_TYPE {
            return Err(Error::Schema(format!("model_type '{}' is not {MLP_MODEL_TYPE}", file.model_type)));
        }
        if file.version != crate::model::CHECKPOINT_VERSION {
            return Err(Error::Schema(format!("unsupported checkpoint version {}", file.version)));
        }
        if file.w1.len() != file.h || file.w1.iter().any(|r| r.len() != file.m) {
            return Err(Error::Schema(format!("W1 does not have shape {}x{}", file.h, file.m)));
        }
        file.scaler.validate().map_err(|e| Error::Schema(e.to_string()))?;
        let w1 = file.w1.into_iter().flatten().collect();
        let net = Self::new(file.h, file.m, w1, file.b1, file.w2, file.b2).map_err(|e| Error::Schema(e.to_string()))?;
        Ok((net, file.scaler, file.seed))
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Self, ScalerState, u64)> {
        Self::from_checkpoint_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct MlpCheckpoint {
    model_type: String,
    version: u32,
    h: usize,
    m: usize,
    #[serde(rename = "W1")]
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    #[serde(rename = "W2")]
    w2: Vec<f64>,
    b2: f64,
    scaler: ScalerState,
    seed: u64,
}

pub fn mlp_forward(model: &MlpModel, x: &[f64]) -> Result<f64> {
    model.forward(x)
}

pub fn mlp_backward(model: &MlpModel, x: &[f64], target: f64) -> Result<MlpGradients> {
    Ok(model.backward(x, target)?.1)
}

impl Trainable for MlpModel {
    fn input_dim(&self) -> usize {
        self.inputs
    }

    fn params(&self) -> Vec<f64> {
        self.to_flat()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.set_flat(params)
    }

    fn predict_pair(&self, x: &[f64]) -> Result<(f64, f64)> {
        Ok((self.forward(x)?, 0.0))
    }

    fn batch_loss_grad(&self, batch: &[&Sample], _lambda: f64) -> Result<(LossValue, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let mut grad = vec![0.0; self.parameter_count()];
        let mut total = 0.0;
        for s in batch {
            let (l, g) = self.backward(&s.x, s.y)?;
            total += l;
            for (a, b) in grad.iter_mut().zip(g.to_flat()) {
                *a += b;
            }
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        let mean = total / n;
        Ok((LossValue { total: mean, fit: mean, imag_penalty: 0.0 }, grad))
    }
}

//! CauchyNet: one hidden layer of complex bias shifts followed by the Cauchy
//! activation and a complex linear read-out.
//!
//! For an input `x` in `R^m` the network computes
//!
//! ```text
//! hidden_k = prod_i (x_i + B[k][i] + eps)^-1      k = 1..h
//! o        = sum_k C[k] * hidden_k                 o = y + i e
//! ```
//!
//! and predicts `y = Re(o)`; `e = Im(o)` is penalized during training.
//!
//! The kernel form `prod_i (b_i - x_i)^-1` used in approximation arguments
//! differs from the plus convention here only by negating `B` (and a sign
//! on `C` when `m` is odd), so both describe the same function class.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::shifted_inverse;
use crate::complex_linalg::{cmul, normal_complex, Complex, ComplexMatrix, ComplexVector, Rng, ONE, ZERO};
use crate::data::ScalerState;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyNet {
    epsilon: f64,
    /// `h x m` bias shifts.
    pub bias: ComplexMatrix,
    /// Length-`h` output coefficients.
    pub coeffs: ComplexVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub y: f64,
    pub e: f64,
    pub o: Complex,
    pub hidden: ComplexVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterCount {
    pub complex: usize,
    pub real: usize,
}

/// How to place the initial biases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    /// Real and imaginary parts of `B` and `C` from `N(0, 2/(m+h))`.
    Xavier,
    /// Experimental: bias rows spread evenly around an axis-aligned ellipse
    /// (the same point in every input dimension); `C` as in `Xavier`.
    /// Semi-axes default to 6 and 2.
    Ellipse {
        #[serde(default = "default_semi_major")]
        a: f64,
        #[serde(default = "default_semi_minor")]
        b: f64,
    },
}

fn default_semi_major() -> f64 {
    6.0
}

fn default_semi_minor() -> f64 {
    2.0
}

impl Default for Init {
    fn default() -> Self {
        Init::Xavier
    }
}

impl CauchyNet {
    pub fn new(bias: ComplexMatrix, coeffs: ComplexVector, epsilon: f64) -> Result<Self> {
        if bias.rows() == 0 || bias.cols() == 0 {
            return Err(Error::ShapeMismatch("need h >= 1 and m >= 1".into()));
        }
        if bias.rows() != coeffs.len() {
            return Err(Error::ShapeMismatch(format!(
                "bias has {} rows but {} coefficients",
                bias.rows(),
                coeffs.len()
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(Self { epsilon, bias, coeffs })
    }

    pub fn init(hidden: usize, inputs: usize, epsilon: f64, init: Init, rng: &mut Rng) -> Result<Self> {
        match init {
            Init::Xavier => {
                let mut net = init_xavier_complex(hidden, inputs, rng)?;
                net.epsilon = epsilon;
                Ok(net)
            }
            Init::Ellipse { a, b } => init_ellipse(hidden, inputs, epsilon, a, b, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.bias.rows()
    }

    pub fn inputs(&self) -> usize {
        self.bias.cols()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardOutput> {
        if x.len() != self.inputs() {
            return Err(Error::LengthMismatch(x.len(), self.inputs()));
        }
        let mut hidden = ComplexVector::zeros(self.hidden());
        let mut o = ZERO;
        for k in 0..self.hidden() {
            let mut act = ONE;
            for (i, (&b, &xi)) in self.bias.row(k).iter().zip(x).enumerate() {
                act = cmul(act, shifted_inverse(Complex::new(xi + b.re, b.im), self.epsilon, i)?);
            }
            hidden[k] = act;
            o += cmul(self.coeffs[k], act);
        }
        if !(o.re.is_finite() && o.im.is_finite()) {
            return Err(Error::NonFinite(format!("network output {o} at x={x:?}")));
        }
        Ok(ForwardOutput { y: o.re, e: o.im, o, hidden })
    }

    /// Real prediction only.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.y)
    }

    pub fn parameter_count(&self) -> ParameterCount {
        parameter_count(self.hidden(), self.inputs())
    }

    /// Every stored real scalar: `B` row-major then `C`, each as `(re, im)`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count().real);
        for z in self.bias.as_slice().iter().chain(self.coeffs.iter()) {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let n = self.parameter_count().real;
        if flat.len() != n {
            return Err(Error::LengthMismatch(flat.len(), n));
        }
        let nb = self.bias.as_slice().len();
        for (z, pair) in self.bias.as_mut_slice().iter_mut().zip(flat.chunks_exact(2)) {
            *z = Complex::new(pair[0], pair[1]);
        }
        for (z, pair) in self.coeffs.as_mut_slice().iter_mut().zip(flat[2 * nb..].chunks_exact(2)) {
            *z = Complex::new(pair[0], pair[1]);
        }
        Ok(())
    }

    pub fn save_checkpoint(&self, scaler: &ScalerState, seed: u64, path: impl AsRef<Path>) -> Result<()> {
        let text = self.checkpoint_json(scaler, seed)?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn checkpoint_json(&self, scaler: &ScalerState, seed: u64) -> Result<String> {
        let split = |v: &[Complex]| -> (Vec<f64>, Vec<f64>) {
            (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
        };
        let (mut b_re, mut b_im) = (Vec::new(), Vec::new());
        for k in 0..self.hidden() {
            let (re, im) = split(self.bias.row(k));
            b_re.push(re);
            b_im.push(im);
        }
        let (c_re, c_im) = split(self.coeffs.as_slice());
        let file = CheckpointFile {
            version: CHECKPOINT_VERSION,
            h: self.hidden(),
            m: self.inputs(),
            epsilon: self.epsilon,
            b_re,
            b_im,
            c_re,
            c_im,
            scaler: *scaler,
            seed,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Self, ScalerState, u64)> {
        let text = fs::read_to_string(path)?;
        Self::from_checkpoint_json(&text)
    }

    pub fn from_checkpoint_json(text: &str) -> Result<(Self, ScalerState, u64)> {
        let file: CheckpointFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.version != CHECKPOINT_VERSION {
            return Err(Error::Schema(format!("unsupported checkpoint version {}", file.version)));
        }
        let (h, m) = (file.h, file.m);
        let rows_ok = |rows: &[Vec<f64>]| rows.len() == h && rows.iter().all(|r| r.len() == m);
        if !rows_ok(&file.b_re) || !rows_ok(&file.b_im) {
            return Err(Error::Schema(format!("B_re/B_im do not have shape {h}x{m}")));
        }
        if file.c_re.len() != h || file.c_im.len() != h {
            return Err(Error::Schema(format!("C_re/C_im do not have length {h}")));
        }
        let bias: Vec<Complex> = file
            .b_re
            .iter()
            .flatten()
            .zip(file.b_im.iter().flatten())
            .map(|(&re, &im)| Complex::new(re, im))
            .collect();
        let coeffs: Vec<Complex> = file
            .c_re
            .iter()
            .zip(&file.c_im)
            .map(|(&re, &im)| Complex::new(re, im))
            .collect();
        let net = CauchyNet::new(
            ComplexMatrix::from_row_major(h, m, bias)?,
            ComplexVector::from_vec(coeffs),
            file.epsilon,
        )
        .map_err(|e| Error::Schema(e.to_string()))?;
        file.scaler.validate().map_err(|e| Error::Schema(e.to_string()))?;
        Ok((net, file.scaler, file.seed))
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    h: usize,
    m: usize,
    epsilon: f64,
    #[serde(rename = "B_re")]
    b_re: Vec<Vec<f64>>,
    #[serde(rename = "B_im")]
    b_im: Vec<Vec<f64>>,
    #[serde(rename = "C_re")]
    c_re: Vec<f64>,
    #[serde(rename = "C_im")]
    c_im: Vec<f64>,
    scaler: ScalerState,
    seed: u64,
}

/// `h(m+1)` complex parameters, `2h(m+1)` real ones.
pub fn parameter_count(hidden: usize, inputs: usize) -> ParameterCount {
    let complex = hidden * (inputs + 1);
    ParameterCount { complex, real: 2 * complex }
}

/// Complex Xavier variant: every real and imaginary component of `B` and `C`
/// i.i.d. `N(0, 2/(m+h))`. Draw order is `B` row-major, then `C`.
pub fn init_xavier_complex(hidden: usize, inputs: usize, rng: &mut Rng) -> Result<CauchyNet> {
    if hidden == 0 || inputs == 0 {
        return Err(Error::InvalidArgument("need h >= 1 and m >= 1".into()));
    }
    let sigma = (2.0 / (inputs + hidden) as f64).sqrt();
    let bias = (0..hidden * inputs)
        .map(|_| normal_complex(rng, sigma))
        .collect::<Result<Vec<_>>>()?;
    let coeffs = (0..hidden)
        .map(|_| normal_complex(rng, sigma))
        .collect::<Result<Vec<_>>>()?;
    CauchyNet::new(
        ComplexMatrix::from_row_major(hidden, inputs, bias)?,
        ComplexVector::from_vec(coeffs),
        crate::activation::DEFAULT_EPSILON,
    )
}

fn init_ellipse(hidden: usize, inputs: usize, epsilon: f64, a: f64, b: f64, rng: &mut Rng) -> Result<CauchyNet> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!("ellipse semi-axes must be > 0, got {a}, {b}")));
    }
    let mut net = init_xavier_complex(hidden, inputs, rng)?;
    net.epsilon = epsilon;
    for k in 0..hidden {
        // half-step offset keeps every node off the real axis
        let t = TAU * (k as f64 + 0.5) / hidden as f64;
        let node = Complex::new(a * t.cos(), b * t.sin());
        net.bias.row_mut(k).fill(node);
    }
    Ok(net)
}

//! CauchyNet: a complex-valued single-hidden-layer network with the Cauchy
//! activation `1/z`, its training machinery, the contour-integral kernel
//! expansion it is built on, synthetic benchmark data, and a ReLU baseline.

pub mod activation;
pub mod baseline;
pub mod complex_linalg;
pub mod data;
pub mod error;
pub mod grad;
pub mod kernel;
pub mod model;
pub mod optim;

pub use complex_linalg::{Complex, ComplexMatrix, ComplexVector, Rng};
pub use error::{Error, Result};
pub use model::{CauchyNet, ForwardOutput, Init};
pub use optim::{TrainConfig, TrainLog, Trainable};

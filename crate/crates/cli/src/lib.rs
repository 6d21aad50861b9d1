//! Experiment runner for CauchyNet: declarative specs and named presets,
//! training runs with hashed output manifests, the imaginary-penalty
//! ablation, sensitivity sweeps, and the kernel quadrature demo.

pub mod error;
pub mod kernel_demo;
pub mod metrics;
pub mod output;
pub mod presets;
pub mod runner;
pub mod spec;
pub mod studies;

use std::path::Path;

use cauchynet::data::{load_series_csv, seasonal_decompose_multiplicative, Decomposition};

pub use error::{CliError, Result};
pub use metrics::{metric_mae, metric_mse, MetricsReport};
pub use runner::{run_experiment, RunOutcome};
pub use spec::ExperimentSpec;

/// `index,value,trend,seasonal,residual`; undefined edge values are blank.
pub fn decomposition_csv(series: &[f64], d: &Decomposition) -> String {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("index,value,trend,seasonal,residual\n");
    for (i, v) in series.iter().enumerate() {
        out += &format!("{i},{v},{},{},{}\n", opt(d.trend[i]), d.seasonal[i], opt(d.residual[i]));
    }
    out
}

/// Decompose one CSV column and write `decomposition.csv`.
pub fn run_decompose(path: &Path, column: &str, period: usize, out_dir: &Path) -> Result<Decomposition> {
    let series = load_series_csv(path, column)?;
    let d = seasonal_decompose_multiplicative(&series, period)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("creating {}", out_dir.display()), e))?;
    output::write_atomic(&out_dir.join("decomposition.csv"), decomposition_csv(&series, &d).as_bytes())?;
    Ok(d)
}

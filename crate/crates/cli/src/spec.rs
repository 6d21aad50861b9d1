//! Declarative experiment description, loaded from TOML.
//!
//! A spec is assembled in three layers: the preset or config file, then the
//! `CAUCHYNET_SEED` environment variable, then `--set key=value` overrides.

use std::path::{Path, PathBuf};

use cauchynet::data::{MissingMask, SplitStrategy, Target};
use cauchynet::{Init, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SPEC_VERSION: u32 = 1;
pub const SEED_ENV: &str = "CAUCHYNET_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub data: DataSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<AblationSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Evenly spaced on the target's domain (one-input targets only).
    #[default]
    Grid,
    /// Uniform in the domain box.
    Uniform,
}

/// Where samples come from and how they are split and scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// Registered generator name; exclusive with `csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvSource>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub split: SplitStrategy,
    #[serde(default = "default_fractions")]
    pub fractions: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSpec>,
    /// Share of the visible samples used for training when a mask is set.
    #[serde(default = "default_visible_train")]
    pub visible_train_fraction: f64,
    #[serde(default = "default_scaler_range")]
    pub scaler_range: [f64; 2],
}

fn default_samples() -> usize {
    300
}

fn default_fractions() -> [f64; 3] {
    [0.5, 0.25, 0.25]
}

fn default_visible_train() -> f64 {
    2.0 / 3.0
}

fn default_scaler_range() -> [f64; 2] {
    [0.0, 1.0]
}

/// A positive series in a headed CSV file. Training uses its multiplicative
/// trend against a time index mapped onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    pub column: String,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSpec {
    /// Intervals around every turning point of the target.
    TurningPoints {
        half_width: f64,
        #[serde(default = "default_tp_grid")]
        grid: usize,
    },
    Intervals { centers: Vec<f64>, half_width: f64 },
    Disk { center: Vec<f64>, radius: f64 },
}

fn default_tp_grid() -> usize {
    4000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub hidden: usize,
    pub epsilon: f64,
    pub init: Init,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { hidden: 128, epsilon: cauchynet::activation::DEFAULT_EPSILON, init: Init::Xavier }
    }
}

/// ReLU network trained alongside under the same schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSpec {
    pub hidden: usize,
    /// Defaults to the main learning rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        BaselineSpec { hidden: 128, lr: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Fill the `wall_ms` column of `trainlog.csv`. Off keeps the file
    /// byte-reproducible.
    pub record_timings: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: None, record_timings: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSpec {
    pub lambdas: Vec<f64>,
    /// Record test MSE every this many epochs (and at the last one).
    #[serde(default = "one")]
    pub every: usize,
}

fn one() -> usize {
    1
}

/// One cross-product grid; missing axes take the base spec's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lrs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wds: Option<Vec<f64>>,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        table.try_into().map_err(|e: toml::de::Error| CliError::config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn target(&self) -> Result<Option<Target>> {
        match &self.data.target {
            None => Ok(None),
            Some(name) => Target::from_name(name).map(Some).ok_or_else(|| {
                let known: Vec<&str> = Target::ALL.iter().map(|t| t.name()).collect();
                CliError::config(format!("unknown generator '{name}'; known: {}", known.join(", ")))
            }),
        }
    }

    pub fn inputs(&self) -> Result<usize> {
        Ok(self.target()?.map_or(1, Target::inputs))
    }

    /// Where outputs go unless the caller overrides it.
    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| Path::new("runs").join(&self.name))
    }

    /// Every check that can fail before compute starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.version != SPEC_VERSION {
            return bad(format!("unsupported spec version {} (expected {SPEC_VERSION})", self.version));
        }
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        let d = &self.data;
        match (&d.target, &d.csv) {
            (Some(_), Some(_)) => return bad("data.target and data.csv are mutually exclusive".into()),
            (None, None) => return bad("one of data.target or data.csv is required".into()),
            _ => {}
        }
        let target = self.target()?;
        if let Some(csv) = &d.csv {
            if csv.period < 1 {
                return bad("data.csv.period must be >= 1".into());
            }
            if csv.column.is_empty() {
                return bad("data.csv.column must not be empty".into());
            }
            if d.mask.is_some() {
                return bad("masks apply to synthetic targets only".into());
            }
        }
        if let Some(t) = target {
            if d.samples < 4 {
                return bad(format!("data.samples must be >= 4, got {}", d.samples));
            }
            if d.sampling == Sampling::Grid && t.inputs() != 1 {
                return bad(format!("grid sampling needs a one-input target; '{}' has {}", t.name(), t.inputs()));
            }
        }
        let [a, b, c] = d.fractions;
        if [a, b, c].iter().any(|f| !(*f >= 0.0)) || ((a + b + c) - 1.0).abs() > 1e-9 || a == 0.0 || b == 0.0 {
            return bad(format!("data.fractions {:?} must be non-negative, sum to 1, with train and val > 0", d.fractions));
        }
        if !(d.visible_train_fraction > 0.0 && d.visible_train_fraction < 1.0) {
            return bad(format!("data.visible_train_fraction must be in (0, 1), got {}", d.visible_train_fraction));
        }
        if !(d.scaler_range[1] > d.scaler_range[0]) || d.scaler_range.iter().any(|v| !v.is_finite()) {
            return bad(format!("data.scaler_range {:?} must be increasing", d.scaler_range));
        }
        if let Some(mask) = &d.mask {
            let inputs = self.inputs()?;
            match mask {
                MaskSpec::TurningPoints { half_width, grid } => {
                    if inputs != 1 {
                        return bad("turning-point masks need a one-input target".into());
                    }
                    if *grid < 100 {
                        return bad("data.mask.grid must be >= 100".into());
                    }
                    MissingMask::Intervals { centers: vec![0.0], half_width: *half_width }
                        .validate()
                        .map_err(|e| CliError::config(e.to_string()))?;
                }
                MaskSpec::Intervals { .. } if inputs != 1 => return bad("interval masks need a one-input target".into()),
                MaskSpec::Disk { center, .. } if center.len() != inputs => {
                    return bad(format!("disk center has {} coordinates, target has {inputs} inputs", center.len()))
                }
                _ => {}
            }
            if let Some(m) = self.static_mask() {
                m.validate().map_err(|e| CliError::config(e.to_string()))?;
            }
        }
        if self.model.hidden < 1 {
            return bad("model.hidden must be >= 1".into());
        }
        if !(self.model.epsilon >= 0.0) || !self.model.epsilon.is_finite() {
            return bad(format!("model.epsilon must be >= 0, got {}", self.model.epsilon));
        }
        if let Init::Ellipse { a, b } = self.model.init {
            if !(a > 0.0 && b > 0.0) {
                return bad(format!("ellipse init needs positive semi-axes, got a={a}, b={b}"));
            }
        }
        self.train.validate().map_err(|e| CliError::config(e.to_string()))?;
        if let Some(bl) = &self.baseline {
            if bl.hidden < 1 {
                return bad("baseline.hidden must be >= 1".into());
            }
            if let Some(lr) = bl.lr {
                if !(lr > 0.0) {
                    return bad(format!("baseline.lr must be > 0, got {lr}"));
                }
            }
        }
        if let Some(ab) = &self.ablation {
            validate_lambdas(&ab.lambdas)?;
            if ab.every < 1 {
                return bad("ablation.every must be >= 1".into());
            }
        }
        for grid in &self.sweep {
            grid.validate()?;
        }
        Ok(())
    }

    /// The mask when it does not depend on the target's shape.
    pub fn static_mask(&self) -> Option<MissingMask> {
        match self.data.mask.as_ref()? {
            MaskSpec::Intervals { centers, half_width } => {
                Some(MissingMask::Intervals { centers: centers.clone(), half_width: *half_width })
            }
            MaskSpec::Disk { center, radius } => Some(MissingMask::Disk { center: center.clone(), radius: *radius }),
            MaskSpec::TurningPoints { .. } => None,
        }
    }
}

pub(crate) fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(CliError::config("lambda list must not be empty"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(CliError::config(format!("lambda must be finite and >= 0, got {l}")));
    }
    Ok(())
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Err(CliError::config(format!("sweep axis '{name}' must not be empty")));
        if self.hidden.as_ref().is_some_and(Vec::is_empty) {
            return empty("hidden");
        }
        if self.sizes.as_ref().is_some_and(Vec::is_empty) {
            return empty("sizes");
        }
        if self.lrs.as_ref().is_some_and(Vec::is_empty) {
            return empty("lrs");
        }
        if self.wds.as_ref().is_some_and(Vec::is_empty) {
            return empty("wds");
        }
        if self.hidden.iter().flatten().any(|&h| h == 0) {
            return Err(CliError::config("sweep hidden sizes must be >= 1"));
        }
        if self.sizes.iter().flatten().any(|&n| n < 8) {
            return Err(CliError::config("sweep data sizes must be >= 8"));
        }
        if self.lrs.iter().flatten().any(|&lr| !(lr > 0.0)) {
            return Err(CliError::config("sweep learning rates must be > 0"));
        }
        if self.wds.iter().flatten().any(|&wd| !(wd >= 0.0)) {
            return Err(CliError::config("sweep weight decays must be >= 0"));
        }
        Ok(())
    }
}

/// Set `a.b.c = value` in a TOML table. The value is parsed as a TOML
/// literal when possible and taken as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config(format!("override key '{key}' is malformed")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut node = table;
    for part in parts {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override '{key}': '{part}' is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Build a spec from base TOML text plus the seed variable and overrides.
pub fn resolve_spec(base: &str, seed_env: Option<&str>, overrides: &[String]) -> Result<ExperimentSpec> {
    let mut table: toml::Table = toml::from_str(base).map_err(|e| CliError::config(e.to_string()))?;
    if let Some(seed) = seed_env {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{SEED_ENV}='{seed}' is not an unsigned integer")))?;
        let train = table.entry("train").or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let train = train.as_table_mut().ok_or_else(|| CliError::config("train is not a table"))?;
        // TOML integers are i64
        let seed = i64::try_from(seed).map_err(|_| CliError::config(format!("seed {seed} exceeds the TOML integer range")))?;
        train.insert("seed".into(), toml::Value::Integer(seed));
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let spec = ExperimentSpec::from_table(table)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
name = "t"
[data]
target = "exp1"
"#;

    #[test]
    fn minimal_spec_takes_defaults() {
        let s = resolve_spec(MINIMAL, None, &[]).unwrap();
        assert_eq!(s.train, TrainConfig::default());
        assert_eq!(s.model.hidden, 128);
        assert_eq!(s.data.fractions, [0.5, 0.25, 0.25]);
        assert_eq!(s.output_dir(), Path::new("runs/t"));
    }

    #[test]
    fn ellipse_axes_default() {
        let s = resolve_spec(MINIMAL, None, &["model.init={kind=\"ellipse\"}".into()]).unwrap();
        assert_eq!(s.model.init, Init::Ellipse { a: 6.0, b: 2.0 });
        let s = resolve_spec(MINIMAL, None, &["model.init={kind=\"ellipse\",b=0.5}".into()]).unwrap();
        assert_eq!(s.model.init, Init::Ellipse { a: 6.0, b: 0.5 });
    }

    #[test]
    fn overrides_and_seed_env() {
        let s = resolve_spec(
            MINIMAL,
            Some("77"),
            &["train.epochs=3".into(), "model.init.kind=ellipse".into(), "model.init.a=1.5".into(), "model.init.b=0.5".into()],
        )
        .unwrap();
        assert_eq!(s.train.epochs, 3);
        assert_eq!(s.train.seed, 77);
        assert_eq!(s.model.init, Init::Ellipse { a: 1.5, b: 0.5 });
        let s = resolve_spec(MINIMAL, Some("77"), &["train.seed=5".into()]).unwrap();
        assert_eq!(s.train.seed, 5);
        assert!(resolve_spec(MINIMAL, Some("x"), &[]).is_err());
    }

    #[test]
    fn string_override_falls_back() {
        let s = resolve_spec(MINIMAL, None, &["name=renamed run".into()]).unwrap();
        assert_eq!(s.name, "renamed run");
    }

    #[test]
    fn rejects_bad_specs() {
        let cases = [
            "train.epochs=0",
            "data.target=nope",
            "data.fractions=[0.5,0.5,0.5]",
            "version=2",
            "model.hidden=0",
            "data.scaler_range=[1,0]",
            "train.unknown=1",
            "ablation.lambdas=[]",
        ];
        for c in cases {
            let err = resolve_spec(MINIMAL, None, &[c.to_string()]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{c}: {err}");
        }
        assert!(resolve_spec(MINIMAL, None, &["novalue".into()]).is_err());
    }

    #[test]
    fn mask_shape_checks() {
        let disk = r#"
version = 1
name = "d"
[data]
target = "disk2d"
sampling = "uniform"
mask = { kind = "disk", center = [0.0], radius = 0.3 }
"#;
        assert!(resolve_spec(disk, None, &[]).is_err());
        assert!(resolve_spec(disk, None, &["data.mask.center=[0.0,0.0]".into()]).is_ok());
        assert!(resolve_spec(disk, None, &["data.mask.center=[0.0,0.0]".into(), "data.sampling=grid".into()]).is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let s = resolve_spec(MINIMAL, None, &["baseline.hidden=16".into()]).unwrap();
        let back = ExperimentSpec::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, s);
    }
}

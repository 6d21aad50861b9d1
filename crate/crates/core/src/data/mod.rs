//! Datasets: target generators, splits, masks, scaling, decomposition and CSV I/O.

mod decompose;
mod scaler;
mod targets;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex_linalg::Rng;
use crate::error::{Error, Result};

pub use decompose::{seasonal_decompose_multiplicative, Decomposition};
pub use scaler::ScalerState;
pub use targets::{
    find_turning_points, target_2d_missing_disk, target_2d_surface, target_exp1, target_exp2_gap,
    target_intro_spike, Target,
};

/// One labelled input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Sample { x, y }
    }
}

/// Disjoint train / validation / test partitions of one sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
    pub inputs: usize,
    pub provenance: String,
}

impl SplitDataset {
    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn splits(&self) -> [(&'static str, &[Sample]); 3] {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
    }

    /// Apply `f` to every target in every split.
    pub fn map_targets(&self, f: impl Fn(f64) -> f64) -> SplitDataset {
        let map = |s: &[Sample]| s.iter().map(|s| Sample::new(s.x.clone(), f(s.y))).collect();
        SplitDataset {
            train: map(&self.train),
            val: map(&self.val),
            test: map(&self.test),
            inputs: self.inputs,
            provenance: self.provenance.clone(),
        }
    }

    /// Dump as CSV with columns `split,x0[,x1..],y`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["split".to_string()];
        header.extend((0..self.inputs).map(|i| format!("x{i}")));
        header.push("y".into());
        out.write_record(&header).map_err(csv_err)?;
        for (name, samples) in self.splits() {
            for s in samples {
                let mut row = vec![name.to_string()];
                row.extend(s.x.iter().map(f64::to_string));
                row.push(s.y.to_string());
                out.write_record(&row).map_err(csv_err)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// `n` evenly spaced abscissae on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Samples of a one-input target on an even grid.
pub fn sample_grid(target: Target, n: usize) -> Vec<Sample> {
    let (lo, hi) = target.domain();
    linspace(lo, hi, n).into_iter().map(|x| Sample::new(vec![x], target.eval(&[x]))).collect()
}

/// Samples drawn uniformly from the target's domain box.
pub fn sample_uniform(target: Target, n: usize, rng: &mut Rng) -> Vec<Sample> {
    let (lo, hi) = target.domain();
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..target.inputs()).map(|_| rng.uniform_range(lo, hi)).collect();
            let y = target.eval(&x);
            Sample::new(x, y)
        })
        .collect()
}

/// How samples are assigned to partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Seeded shuffle, then cut by fractions.
    #[default]
    Shuffled,
    /// Evenly spaced training points in input order; the rest shuffled into val/test.
    Interleaved,
    /// Contiguous blocks in input order.
    Chronological,
}

fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    let (a, b, c) = fractions;
    if [a, b, c].iter().any(|f| !f.is_finite() || *f < 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("split fractions {fractions:?} must be non-negative and sum to 1")));
    }
    let train = (n as f64 * a).round() as usize;
    let val = ((n as f64 * b).round() as usize).min(n.saturating_sub(train));
    let test = n - train - val;
    if train == 0 || val == 0 || (c > 0.0 && test == 0) {
        return Err(Error::InvalidArgument(format!("{n} samples are too few for split {fractions:?}")));
    }
    Ok((train, val, test))
}

fn check_inputs(samples: &[Sample]) -> Result<usize> {
    let m = samples.first().map(|s| s.x.len()).ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    if let Some(bad) = samples.iter().find(|s| s.x.len() != m) {
        return Err(Error::LengthMismatch(bad.x.len(), m));
    }
    Ok(m)
}

/// Deterministic shuffled split.
pub fn make_split(samples: &[Sample], fractions: (f64, f64, f64), rng: &mut Rng) -> Result<SplitDataset> {
    make_split_with(samples, fractions, SplitStrategy::Shuffled, rng)
}

pub fn make_split_with(
    samples: &[Sample],
    fractions: (f64, f64, f64),
    strategy: SplitStrategy,
    rng: &mut Rng,
) -> Result<SplitDataset> {
    let inputs = check_inputs(samples)?;
    let n = samples.len();
    let (n_train, n_val, _) = split_sizes(n, fractions)?;

    let (train_idx, mut rest): (Vec<usize>, Vec<usize>) = match strategy {
        SplitStrategy::Shuffled => {
            let mut order: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut order);
            let rest = order.split_off(n_train);
            (order, rest)
        }
        SplitStrategy::Chronological => ((0..n_train).collect(), (n_train..n).collect()),
        SplitStrategy::Interleaved => {
            let picked: Vec<usize> = (0..n_train).map(|j| j * n / n_train).collect();
            let mut taken = vec![false; n];
            for &i in &picked {
                taken[i] = true;
            }
            let mut rest: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            rng.shuffle(&mut rest);
            (picked, rest)
        }
    };
    let test_idx = rest.split_off(n_val);
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect();
    Ok(SplitDataset {
        train: pick(&train_idx),
        val: pick(&rest),
        test: pick(&test_idx),
        inputs,
        provenance: String::new(),
    })
}

/// Region withheld from training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MissingMask {
    /// Closed intervals `|x0 - c| <= half_width` around each center.
    Intervals { centers: Vec<f64>, half_width: f64 },
    /// Closed disk `|x - center| <= radius`.
    Disk { center: Vec<f64>, radius: f64 },
}

impl MissingMask {
    pub fn validate(&self) -> Result<()> {
        match self {
            MissingMask::Intervals { centers, half_width } => {
                if centers.is_empty() || !(*half_width > 0.0) || centers.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("interval mask needs centers and a positive half-width".into()));
                }
            }
            MissingMask::Disk { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("disk mask needs a center and a positive radius".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            MissingMask::Intervals { centers, half_width } => {
                centers.iter().any(|c| (x[0] - c).abs() <= *half_width)
            }
            MissingMask::Disk { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
                r2 <= radius * radius
            }
        }
    }

    /// Number of disjoint masked regions.
    pub fn zones(&self) -> usize {
        match self {
            MissingMask::Intervals { centers, .. } => centers.len(),
            MissingMask::Disk { .. } => 1,
        }
    }
}

/// Route samples by mask membership into `(visible, hidden)`.
pub fn apply_mask(samples: &[Sample], mask: &MissingMask) -> (Vec<Sample>, Vec<Sample>) {
    samples.iter().cloned().partition(|s| !mask.contains(&s.x))
}

/// Hidden samples become the test split; visible ones are shuffled and cut
/// into train and validation with `train_fraction` going to train.
pub fn make_masked_split(
    samples: &[Sample],
    mask: &MissingMask,
    train_fraction: f64,
    rng: &mut Rng,
) -> Result<SplitDataset> {
    mask.validate()?;
    let inputs = check_inputs(samples)?;
    let (mut visible, hidden) = apply_mask(samples, mask);
    if hidden.is_empty() {
        return Err(Error::InvalidArgument("mask hides no samples".into()));
    }
    if !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
        return Err(Error::InvalidArgument(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    rng.shuffle(&mut visible);
    let n_train = (visible.len() as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == visible.len() {
        return Err(Error::InvalidArgument(format!("{} visible samples are too few", visible.len())));
    }
    let val = visible.split_off(n_train);
    Ok(SplitDataset { train: visible, val, test: hidden, inputs, provenance: String::new() })
}

/// Read one numeric column from a headed CSV file.
///
/// Row numbers in errors count file lines, with the header as row 1.
pub fn load_series_csv(path: impl AsRef<Path>, column: &str) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = headers.iter().position(|h| h.trim() == column).ok_or_else(|| {
        let names: Vec<&str> = headers.iter().collect();
        Error::Parse(format!("column '{column}' not found; available columns: {}", names.join(", ")))
    })?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        let cell = record.get(col).ok_or_else(|| Error::Parse(format!("row {row}: missing column '{column}'")))?;
        let v: f64 = cell
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: cannot parse '{cell}' as a number")))?;
        out.push(v);
    }
    Ok(out)
}

//! Multiplicative seasonal decomposition by centered moving average.

use crate::error::{Error, Result};

/// `series = trend * seasonal * residual`, aligned index by index.
///
/// `trend` and `residual` are `None` within half a period of either edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<Option<f64>>,
    pub period: usize,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.seasonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seasonal.is_empty()
    }

    /// One factor per phase, `seasonal[0..period]`.
    pub fn factors(&self) -> &[f64] {
        &self.seasonal[..self.period.min(self.seasonal.len())]
    }
}

fn moving_average(series: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = series.len();
    let half = period / 2;
    let mut out = vec![None; n];
    if period == 1 {
        return series.iter().map(|&v| Some(v)).collect();
    }
    for i in half..n.saturating_sub(half) {
        let v = if period % 2 == 1 {
            series[i - half..=i + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = series[i - half + 1..i + half].iter().sum();
            (inner + 0.5 * (series[i - half] + series[i + half])) / period as f64
        };
        out[i] = Some(v);
    }
    out
}

pub fn seasonal_decompose_multiplicative(series: &[f64], period: usize) -> Result<Decomposition> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if series.len() < 2 * period {
        return Err(Error::InvalidArgument(format!(
            "series of length {} is shorter than two periods of {period}",
            series.len()
        )));
    }
    for (index, &value) in series.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveValue { index, value });
        }
    }

    let trend = moving_average(series, period);

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, t) in trend.iter().enumerate() {
        if let Some(t) = t {
            sums[i % period] += series[i] / t;
            counts[i % period] += 1;
        }
    }
    let mut factors: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let mean = factors.iter().sum::<f64>() / period as f64;
    for f in &mut factors {
        *f /= mean;
    }

    let seasonal: Vec<f64> = (0..series.len()).map(|i| factors[i % period]).collect();
    let residual = trend
        .iter()
        .zip(&seasonal)
        .zip(series)
        .map(|((t, s), v)| t.map(|t| v / (t * s)))
        .collect();

    Ok(Decomposition { trend, seasonal, residual, period })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstructs(series: &[f64], d: &Decomposition) {
        for (i, v) in series.iter().enumerate() {
            if let (Some(t), Some(r)) = (d.trend[i], d.residual[i]) {
                let back = t * d.seasonal[i] * r;
                assert!((back - v).abs() <= 1e-9 * v.abs(), "index {i}");
            }
        }
        let mean = d.factors().iter().sum::<f64>() / d.period as f64;
        assert!((mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_pattern_times_constant() {
        for pattern in [vec![0.5, 1.5, 1.2, 0.8], vec![0.7, 1.0, 1.3]] {
            let c = 42.0;
            let p = pattern.len();
            let series: Vec<f64> = (0..6 * p).map(|i| c * pattern[i % p]).collect();
            let d = seasonal_decompose_multiplicative(&series, p).unwrap();
            for (i, s) in d.seasonal.iter().enumerate() {
                assert!((s - pattern[i % p]).abs() < 1e-9);
            }
            for t in d.trend.iter().flatten() {
                assert!((t - c).abs() < 1e-9 * c);
            }
            for r in d.residual.iter().flatten() {
                assert!((r - 1.0).abs() < 1e-9);
            }
            reconstructs(&series, &d);
        }
    }

    #[test]
    fn edges_absent() {
        let series = vec![3.0; 12];
        let d = seasonal_decompose_multiplicative(&series, 4).unwrap();
        assert_eq!(d.trend.iter().filter(|t| t.is_none()).count(), 4);
        assert!(d.trend[0].is_none() && d.trend[11].is_none());
        assert!(d.trend[2].is_some() && d.trend[9].is_some());
        let d = seasonal_decompose_multiplicative(&vec![3.0; 9], 3).unwrap();
        assert_eq!(d.trend.iter().filter(|t| t.is_none()).count(), 2);
    }

    #[test]
    fn constant_series() {
        let d = seasonal_decompose_multiplicative(&[5.0; 20], 5).unwrap();
        assert!(d.seasonal.iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(d.residual.iter().flatten().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn noisy_series_reconstructs() {
        let series: Vec<f64> = (0..60)
            .map(|i| {
                let t = 10.0 + 0.3 * i as f64;
                let s = 1.0 + 0.2 * (i as f64 * std::f64::consts::PI / 3.0).sin();
                let r = 1.0 + 0.05 * ((i * 7919) % 13) as f64 / 13.0;
                t * s * r
            })
            .collect();
        let d = seasonal_decompose_multiplicative(&series, 6).unwrap();
        reconstructs(&series, &d);
    }

    #[test]
    fn rejects_bad_input() {
        let err = seasonal_decompose_multiplicative(&[1.0, 2.0, 0.0, 1.0], 2).unwrap_err();
        assert!(matches!(err, Error::NonPositiveValue { index: 2, .. }));
        assert!(seasonal_decompose_multiplicative(&[1.0, -2.0, 3.0, 1.0], 2).is_err());
        assert!(seasonal_decompose_multiplicative(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(seasonal_decompose_multiplicative(&[1.0, 2.0], 0).is_err());
    }
}

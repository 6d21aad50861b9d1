//! Min-max scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map from `[min, max]` onto `[range_lo, range_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub min: f64,
    pub max: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl ScalerState {
    pub fn new(min: f64, max: f64, range_lo: f64, range_hi: f64) -> Result<Self> {
        let s = ScalerState { min, max, range_lo, range_hi };
        s.validate()?;
        Ok(s)
    }

    /// The identity map on `[0, 1]`.
    pub fn identity() -> Self {
        ScalerState { min: 0.0, max: 1.0, range_lo: 0.0, range_hi: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.min, self.max, self.range_lo, self.range_hi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scaler bounds".into()));
        }
        if self.max <= self.min {
            return Err(Error::DegenerateRange(self.min));
        }
        if self.range_hi <= self.range_lo {
            return Err(Error::InvalidArgument(format!(
                "scaler range [{}, {}] is empty",
                self.range_lo, self.range_hi
            )));
        }
        Ok(())
    }

    /// Fit to the extremes of `values`.
    pub fn fit(values: &[f64], range: (f64, f64)) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("scaler input {v}")));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() || max == min {
            return Err(Error::DegenerateRange(if values.is_empty() { f64::NAN } else { min }));
        }
        Self::new(min, max, range.0, range.1)
    }

    pub fn apply(&self, v: f64) -> f64 {
        self.range_lo + (v - self.min) * (self.range_hi - self.range_lo) / (self.max - self.min)
    }

    pub fn invert(&self, s: f64) -> f64 {
        self.min + (s - self.range_lo) * (self.max - self.min) / (self.range_hi - self.range_lo)
    }

    /// Factor by which scaled differences shrink relative to raw ones.
    pub fn gain(&self) -> f64 {
        (self.range_hi - self.range_lo) / (self.max - self.min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_linalg::Rng;

    #[test]
    fn midpoint() {
        let s = ScalerState::fit(&[0.0, 10.0], (0.0, 1.0)).unwrap();
        assert_eq!(s.apply(5.0), 0.5);
    }

    #[test]
    fn symmetric_range() {
        let s = ScalerState::fit(&[2.0, 4.0, 3.0], (-1.0, 1.0)).unwrap();
        assert_eq!(s.apply(2.0), -1.0);
        assert_eq!(s.apply(4.0), 1.0);
    }

    #[test]
    fn roundtrip() {
        let s = ScalerState::fit(&[-3.5, 127.25], (0.0, 1.0)).unwrap();
        let mut rng = Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let v = rng.uniform_range(-500.0, 500.0);
            let r = s.invert(s.apply(v));
            assert!((r - v).abs() <= 1e-12 * v.abs().max(1.0), "{v} -> {r}");
        }
    }

    #[test]
    fn degenerate() {
        assert!(matches!(ScalerState::fit(&[1.0, 1.0], (0.0, 1.0)), Err(Error::DegenerateRange(_))));
        assert!(matches!(ScalerState::fit(&[], (0.0, 1.0)), Err(Error::DegenerateRange(_))));
        assert!(ScalerState::fit(&[0.0, 1.0], (1.0, 1.0)).is_err());
        assert!(ScalerState::new(0.0, 1.0, 0.0, f64::NAN).is_err());
    }
}

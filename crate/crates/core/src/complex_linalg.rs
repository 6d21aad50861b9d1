//! Dense complex storage and a seedable random number generator.
//!
//! Complex scalars are `num_complex::Complex64`. Vectors and matrices are
//! thin row-major wrappers; nothing here is larger than a few thousand
//! entries so there is no blocking or sparse support.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const ZERO: Complex = Complex::new(0.0, 0.0);

/// Checked constructor: rejects NaN and infinite components.
pub fn complex(re: f64, im: f64) -> Result<Complex> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex::new(re, im))
    } else {
        Err(Error::NonFinite(format!("complex({re}, {im})")))
    }
}

#[inline]
pub fn cmul(a: Complex, b: Complex) -> Complex {
    Complex::new(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)
}

/// `1/a = conj(a)/|a|^2`, scaled to avoid overflow in `|a|^2` for large or
/// tiny magnitudes.
#[inline]
pub fn cinv(a: Complex) -> Result<Complex> {
    if a.re == 0.0 && a.im == 0.0 {
        return Err(Error::DivisionByZero);
    }
    let scale = a.re.abs().max(a.im.abs());
    let (re, im) = (a.re / scale, a.im / scale);
    let norm = re * re + im * im;
    let inv = Complex::new(re / (norm * scale), -im / (norm * scale));
    if inv.re.is_finite() && inv.im.is_finite() {
        Ok(inv)
    } else {
        Err(Error::NonFinite(format!("1/({a})")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    data: Vec<Complex>,
}

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self { data: vec![ZERO; len] }
    }

    pub fn from_vec(data: Vec<Complex>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.data.iter()
    }

    /// Unconjugated bilinear product `sum a_k b_k`.
    pub fn dot(&self, other: &ComplexVector) -> Result<Complex> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(ZERO, |acc, (a, b)| acc + cmul(*a, *b)))
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex {
        &mut self.data[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.cols + c]
    }
}

/// Seedable generator: xoshiro256++ seeded through SplitMix64.
///
/// The same seed replays the same stream on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Independent stream for a `(seed, stream)` pair, e.g. one per epoch.
    pub fn derived(seed: u64, stream: u64) -> Self {
        Self::seed_from_u64(splitmix64(seed ^ splitmix64(stream.wrapping_add(0x632B_E59B_D9B4_E019))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        let z: f64 = self.inner.sample(StandardNormal);
        sigma * z
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Real and imaginary parts drawn independently from `N(0, sigma^2)`.
pub fn normal_complex(rng: &mut Rng, sigma: f64) -> Result<Complex> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
    }
    let re = rng.normal(sigma);
    let im = rng.normal(sigma);
    Ok(Complex::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Rng;
    use proptest::prelude::*;

    fn rel_err(a: Complex, b: Complex) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn cmul_examples() {
        let x = Complex::new(-1.25, 3.5);
        assert_eq!(cmul(ONE, x), x);
        assert_eq!(cmul(Complex::i(), Complex::i()), Complex::new(-1.0, 0.0));
        // (2+i)(3-2i) = 6 - 4i + 3i - 2i^2 = 8 - i
        let p = cmul(Complex::new(2.0, 1.0), Complex::new(3.0, -2.0));
        assert_eq!(p, Complex::new(8.0, -1.0));
        assert_eq!(p, Complex::new(2.0, 1.0) * Complex::new(3.0, -2.0));
    }

    #[test]
    fn cinv_examples() {
        assert_eq!(cinv(ONE).unwrap(), ONE);
        assert_eq!(cinv(Complex::i()).unwrap(), Complex::new(0.0, -1.0));
        assert_eq!(cinv(Complex::new(2.0, 0.0)).unwrap(), Complex::new(0.5, 0.0));
        assert!(matches!(cinv(ZERO), Err(Error::DivisionByZero)));
    }

    #[test]
    fn checked_constructor_rejects_nan() {
        assert!(complex(f64::NAN, 0.0).is_err());
        assert!(complex(0.0, f64::INFINITY).is_err());
        assert!(complex(1.0, 2.0).is_ok());
    }

    #[test]
    fn normal_complex_statistics() {
        let mut rng = Rng::seed_from_u64(7);
        let n = 100_000;
        let draws: Vec<Complex> = (0..n).map(|_| normal_complex(&mut rng, 1.0).unwrap()).collect();
        let mean = draws.iter().fold(ZERO, |a, z| a + z) / n as f64;
        assert!(mean.norm() < 0.02, "mean {mean}");

        let draws: Vec<Complex> = (0..n).map(|_| normal_complex(&mut rng, 0.5).unwrap()).collect();
        let var = |f: fn(&Complex) -> f64| {
            let m = draws.iter().map(f).sum::<f64>() / n as f64;
            draws.iter().map(|z| (f(z) - m).powi(2)).sum::<f64>() / (n - 1) as f64
        };
        assert!((var(|z| z.re) - 0.25).abs() < 0.01);
        assert!((var(|z| z.im) - 0.25).abs() < 0.01);
    }

    #[test]
    fn zero_sigma_is_degenerate() {
        let mut rng = Rng::seed_from_u64(1);
        assert_eq!(normal_complex(&mut rng, 0.0).unwrap(), ZERO);
        assert!(normal_complex(&mut rng, -1.0).is_err());
    }

    #[test]
    fn seeded_streams_replay() {
        let a: Vec<u64> = {
            let mut r = Rng::seed_from_u64(10);
            (0..64).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = Rng::seed_from_u64(10);
            (0..64).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(Rng::derived(10, 0).next_u64(), Rng::derived(10, 1).next_u64());
    }

    #[test]
    fn matrix_shape_checked() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![ZERO; 3]).is_err());
        let mut m = ComplexMatrix::zeros(2, 3);
        m[(1, 2)] = ONE;
        assert_eq!(m.row(1)[2], ONE);
    }

    fn polar() -> impl Strategy<Value = Complex> {
        (-6.0f64..6.0, 0.0..std::f64::consts::TAU)
            .prop_map(|(lg, th)| Complex::from_polar(10f64.powf(lg), th))
    }

    proptest! {
        #[test]
        fn double_inverse_is_identity(a in polar()) {
            let back = cinv(cinv(a).unwrap()).unwrap();
            prop_assert!(rel_err(back, a) < 1e-12);
        }

        #[test]
        fn product_with_inverse_is_one(a in polar()) {
            let p = cmul(a, cinv(a).unwrap());
            prop_assert!(rel_err(p, ONE) < 1e-12);
        }
    }
}

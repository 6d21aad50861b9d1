//! The Cauchy activation: component-wise inversion multiplied into one
//! complex number, `X(z) = prod_i (z_i + eps)^-1`.
//!
//! `eps` is a real offset added to every component. The same shift is used by
//! the derivative so its pole check matches the activation's.

use crate::complex_linalg::{cinv, cmul, Complex, ONE};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-8;

pub(crate) fn shifted_inverse(z: Complex, epsilon: f64, index: usize) -> Result<Complex> {
    let shifted = Complex::new(z.re + epsilon, z.im);
    match cinv(shifted) {
        Ok(inv) => Ok(inv),
        Err(Error::DivisionByZero) => Err(Error::PoleEncountered(format!(
            "component {index}: z + eps = 0"
        ))),
        Err(e) => Err(e),
    }
}

fn check_finite(v: Complex, what: &str) -> Result<Complex> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `prod_i (z_i + epsilon)^-1`.
pub fn cauchy_activation(z: &[Complex], epsilon: f64) -> Result<Complex> {
    cauchy_activation_iter(z.iter().copied(), epsilon)
}

/// Same as [`cauchy_activation`] for components produced on the fly.
pub fn cauchy_activation_iter<I>(z: I, epsilon: f64) -> Result<Complex>
where
    I: IntoIterator<Item = Complex>,
{
    let mut acc = ONE;
    for (i, zi) in z.into_iter().enumerate() {
        acc = cmul(acc, shifted_inverse(zi, epsilon, i)?);
    }
    check_finite(acc, "activation product overflowed")
}

/// Scalar derivative `-(z + eps)^-2`, which equals `-X(z)^2`.
pub fn cauchy_activation_derivative(z: Complex, epsilon: f64) -> Result<Complex> {
    let inv = shifted_inverse(z, epsilon, 0)?;
    check_finite(-cmul(inv, inv), "activation derivative overflowed")
}

/// Partial derivative with respect to component `j` of a vector input:
/// `-X(z) (z_j + eps)^-1`.
pub fn cauchy_activation_partial(z: &[Complex], epsilon: f64, j: usize) -> Result<Complex> {
    if j >= z.len() {
        return Err(Error::InvalidArgument(format!(
            "partial index {j} out of range for length {}",
            z.len()
        )));
    }
    let value = cauchy_activation(z, epsilon)?;
    let inv_j = shifted_inverse(z[j], epsilon, j)?;
    check_finite(-cmul(value, inv_j), "activation partial overflowed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_linalg::Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn rel(a: Complex, b: Complex) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn activation_examples() {
        assert_eq!(cauchy_activation(&[c(1.0, 0.0)], 0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(
            cauchy_activation(&[c(2.0, 0.0), c(0.5, 0.0)], 0.0).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(cauchy_activation(&[c(0.0, 1.0)], 0.0).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn pole_and_overflow() {
        assert!(matches!(
            cauchy_activation(&[c(1.0, 0.0), c(0.0, 0.0)], 0.0),
            Err(Error::PoleEncountered(_))
        ));
        // shifted onto the pole by epsilon
        assert!(matches!(
            cauchy_activation(&[c(-0.5, 0.0)], 0.5),
            Err(Error::PoleEncountered(_))
        ));
        let tiny = vec![c(1e-200, 0.0); 3];
        assert!(matches!(cauchy_activation(&tiny, 0.0), Err(Error::NonFinite(_))));
        assert!(matches!(
            cauchy_activation_derivative(c(-1.0, 0.0), 1.0),
            Err(Error::PoleEncountered(_))
        ));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(cauchy_activation_derivative(c(1.0, 0.0), 0.0).unwrap(), c(-1.0, 0.0));
        assert_eq!(cauchy_activation_derivative(c(0.0, 1.0), 0.0).unwrap(), c(1.0, 0.0));

        let z = c(2.0, 1.0);
        let h = 1e-6;
        let f = |w: Complex| cauchy_activation(&[w], 0.0).unwrap();
        let fd = (f(z + h) - f(z - h)) / (2.0 * h);
        let analytic = cauchy_activation_derivative(z, 0.0).unwrap();
        assert!(rel(analytic, fd) < 1e-7, "{analytic} vs {fd}");
    }

    #[test]
    fn derivative_identity_random() {
        let mut rng = Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let r = 10f64.powf(rng.uniform_range(-1.0, 1.0));
            let z = Complex::from_polar(r, rng.uniform_range(0.0, std::f64::consts::TAU));
            let x = cauchy_activation(&[z], 0.0).unwrap();
            let d = cauchy_activation_derivative(z, 0.0).unwrap();
            assert!(rel(d, -x * x) < 1e-12);
        }
    }

    #[test]
    fn conjugate_wirtinger_derivative_vanishes() {
        // d/dzbar = (d/dx + i d/dy) / 2 by central differences
        let mut rng = Rng::seed_from_u64(5);
        let h = 1e-6;
        let f = |w: Complex| cauchy_activation(&[w], 0.0).unwrap();
        let mut n = 0;
        while n < 200 {
            let z = c(rng.uniform_range(-3.0, 3.0), rng.uniform_range(-3.0, 3.0));
            if z.norm() < 0.1 + 2.0 * h {
                continue;
            }
            let dx = (f(z + h) - f(z - h)) / (2.0 * h);
            let dy = (f(z + c(0.0, h)) - f(z - c(0.0, h))) / (2.0 * h);
            let dzbar = (dx + Complex::i() * dy) * 0.5;
            assert!(dzbar.norm() < 1e-6, "z={z} residual={}", dzbar.norm());
            n += 1;
        }
    }

    #[test]
    fn vector_partials_match_finite_differences() {
        let mut rng = Rng::seed_from_u64(11);
        let h = 1e-6;
        for m in 1..=4 {
            for _ in 0..25 {
                let z: Vec<Complex> = (0..m)
                    .map(|_| {
                        let r = rng.uniform_range(0.3, 2.0);
                        Complex::from_polar(r, rng.uniform_range(0.0, std::f64::consts::TAU))
                    })
                    .collect();
                for j in 0..m {
                    let mut up = z.clone();
                    let mut dn = z.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let fd = (cauchy_activation(&up, 0.0).unwrap()
                        - cauchy_activation(&dn, 0.0).unwrap())
                        / (2.0 * h);
                    let analytic = cauchy_activation_partial(&z, 0.0, j).unwrap();
                    assert!(rel(analytic, fd) < 1e-6, "m={m} j={j}");
                }
            }
        }
    }
}

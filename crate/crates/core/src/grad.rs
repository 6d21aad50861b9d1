//! Loss with imaginary penalty, analytic backward pass and a
//! finite-difference oracle.
//!
//! Gradients are reported at the real-parameter level: entry `(k, i)` of
//! [`GradientSet::d_bias`] packs `dL/dRe(B_ki) + i dL/dIm(B_ki)`, and likewise
//! for `d_coeffs`. For a holomorphic path `o(theta)` with derivative `o'` and
//! `delta = dL/dy + i dL/de`, that packed value is `delta * conj(o')`:
//!
//! * `dL/dRe(theta) = dL/dy Re(o') + dL/de Im(o')`
//! * `dL/dIm(theta) = -dL/dy Im(o') + dL/de Re(o')`
//!
//! which is exactly `Re` and `Im` of `delta * conj(o')`.

use crate::complex_linalg::{cmul, Complex, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::model::{CauchyNet, ForwardOutput};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub fit: f64,
    pub imag_penalty: f64,
}

impl LossValue {
    pub const ZERO: LossValue = LossValue { total: 0.0, fit: 0.0, imag_penalty: 0.0 };

    fn add(&mut self, other: LossValue) {
        self.total += other.total;
        self.fit += other.fit;
        self.imag_penalty += other.imag_penalty;
    }

    fn scale(&mut self, s: f64) {
        self.total *= s;
        self.fit *= s;
        self.imag_penalty *= s;
    }
}

/// `(y - y_true)^2 + lambda e^2`.
pub fn loss(y: f64, e: f64, y_true: f64, lambda: f64) -> Result<LossValue> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let fit = (y - y_true).powi(2);
    let imag_penalty = lambda * e * e;
    Ok(LossValue { total: fit + imag_penalty, fit, imag_penalty })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub d_bias: ComplexMatrix,
    pub d_coeffs: ComplexVector,
}

impl GradientSet {
    pub fn zeros_like(model: &CauchyNet) -> Self {
        Self {
            d_bias: ComplexMatrix::zeros(model.hidden(), model.inputs()),
            d_coeffs: ComplexVector::zeros(model.hidden()),
        }
    }

    /// Same layout as [`CauchyNet::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.d_bias
            .as_slice()
            .iter()
            .chain(self.d_coeffs.iter())
            .flat_map(|z| [z.re, z.im])
            .collect()
    }

    pub fn from_flat(model: &CauchyNet, flat: &[f64]) -> Result<Self> {
        let mut g = Self::zeros_like(model);
        let n = 2 * (g.d_bias.as_slice().len() + g.d_coeffs.len());
        if flat.len() != n {
            return Err(Error::LengthMismatch(flat.len(), n));
        }
        for (z, p) in g
            .d_bias
            .as_mut_slice()
            .iter_mut()
            .chain(g.d_coeffs.as_mut_slice().iter_mut())
            .zip(flat.chunks_exact(2))
        {
            *z = Complex::new(p[0], p[1]);
        }
        Ok(g)
    }

    fn entries_mut(&mut self) -> impl Iterator<Item = &mut Complex> {
        self.d_bias
            .as_mut_slice()
            .iter_mut()
            .chain(self.d_coeffs.as_mut_slice().iter_mut())
    }

    pub fn add_assign(&mut self, other: &GradientSet) {
        let src = other.d_bias.as_slice().iter().chain(other.d_coeffs.iter());
        for (a, b) in self.entries_mut().zip(src) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.entries_mut() {
            *a *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_bias
            .as_slice()
            .iter()
            .chain(self.d_coeffs.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Per-sample gradient of the penalized loss with respect to every real and
/// imaginary parameter component.
pub fn backward(
    model: &CauchyNet,
    fo: &ForwardOutput,
    x: &[f64],
    y_true: f64,
    lambda: f64,
) -> Result<GradientSet> {
    let mut grads = GradientSet::zeros_like(model);
    accumulate_backward(model, fo, x, y_true, lambda, 1.0, &mut grads)?;
    Ok(grads)
}

/// Adds `weight * backward(..)` into `grads` without allocating.
pub fn accumulate_backward(
    model: &CauchyNet,
    fo: &ForwardOutput,
    x: &[f64],
    y_true: f64,
    lambda: f64,
    weight: f64,
    grads: &mut GradientSet,
) -> Result<()> {
    if x.len() != model.inputs() {
        return Err(Error::LengthMismatch(x.len(), model.inputs()));
    }
    if fo.hidden.len() != model.hidden() {
        return Err(Error::ShapeMismatch("forward output does not match model".into()));
    }
    // delta = dL/dy + i dL/de
    let delta = Complex::new(2.0 * (fo.y - y_true), 2.0 * lambda * fo.e) * weight;
    let eps = model.epsilon();
    for k in 0..model.hidden() {
        let h_k = fo.hidden[k];
        grads.d_coeffs[k] += cmul(delta, h_k.conj());

        // do/dB_ki = -C_k h_k (H_ki + eps)^-1
        let ch = cmul(model.coeffs[k], h_k);
        for (i, (&b, &xi)) in model.bias.row(k).iter().zip(x).enumerate() {
            let inv = crate::activation::shifted_inverse(Complex::new(xi + b.re, b.im), eps, i)?;
            let dodb = -cmul(ch, inv);
            grads.d_bias[(k, i)] += cmul(delta, dodb.conj());
        }
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    Ok(())
}

/// Mean loss and mean gradient over `samples` (summed in index order).
pub fn batch_gradients<'a, I>(model: &CauchyNet, samples: I, lambda: f64) -> Result<(LossValue, GradientSet)>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    let mut grads = GradientSet::zeros_like(model);
    let mut total = LossValue::ZERO;
    let mut n = 0usize;
    for (x, y_true) in samples {
        let fo = model.forward(x)?;
        total.add(loss(fo.y, fo.e, y_true, lambda)?);
        accumulate_backward(model, &fo, x, y_true, lambda, 1.0, &mut grads)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let s = 1.0 / n as f64;
    total.scale(s);
    grads.scale(s);
    Ok((total, grads))
}

/// Central differences of the total loss, one real parameter component at a
/// time.
pub fn finite_difference_gradients(
    model: &CauchyNet,
    x: &[f64],
    y_true: f64,
    lambda: f64,
    step: f64,
) -> Result<GradientSet> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    let base = model.to_flat();
    let mut probe = model.clone();
    let mut eval = |flat: &[f64]| -> Result<f64> {
        probe.set_flat(flat)?;
        let fo = probe.forward(x)?;
        Ok(loss(fo.y, fo.e, y_true, lambda)?.total)
    };
    let mut out = vec![0.0; base.len()];
    let mut work = base.clone();
    for j in 0..base.len() {
        work[j] = base[j] + step;
        let up = eval(&work)?;
        work[j] = base[j] - step;
        let dn = eval(&work)?;
        work[j] = base[j];
        out[j] = (up - dn) / (2.0 * step);
    }
    GradientSet::from_flat(model, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_linalg::{ComplexMatrix, ComplexVector, Rng};

    fn unit_model() -> CauchyNet {
        CauchyNet::new(
            ComplexMatrix::from_row_major(1, 1, vec![Complex::new(0.0, 0.0)]).unwrap(),
            ComplexVector::from_vec(vec![Complex::new(1.0, 0.0)]),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn loss_examples() {
        let l = loss(1.0, 2.0, 0.0, 0.1).unwrap();
        assert!((l.total - 1.4).abs() < 1e-15);
        assert_eq!(l.total, l.fit + l.imag_penalty);
        assert_eq!(loss(3.0, 0.0, 3.0, 0.5).unwrap().total, 0.0);
        assert_eq!(loss(2.0, 7.0, 0.5, 0.0).unwrap().total, 2.25);
        assert!(loss(0.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn unit_model_bias_gradient() {
        let m = unit_model();
        let fo = m.forward(&[1.0]).unwrap();
        assert_eq!((fo.y, fo.e), (1.0, 0.0));
        let g = backward(&m, &fo, &[1.0], 0.0, 0.0).unwrap();
        assert!((g.d_bias[(0, 0)].re + 2.0).abs() < 1e-15);
        assert!(g.d_bias[(0, 0)].im.abs() < 1e-15);

        let fd = finite_difference_gradients(&m, &[1.0], 0.0, 0.0, 1e-6).unwrap();
        assert!((fd.d_bias[(0, 0)].re + 2.0).abs() < 1e-8);
        assert!(fd.d_bias[(0, 0)].im.abs() < 1e-8);
    }

    #[test]
    fn imaginary_bias_partial_with_penalty() {
        let mut m = unit_model();
        // move off the real axis so the imaginary partial is non-trivial
        m.bias[(0, 0)] = Complex::new(0.3, 0.4);
        let fo = m.forward(&[1.0]).unwrap();
        let g = backward(&m, &fo, &[1.0], 1.0, 0.5).unwrap();
        let fd = finite_difference_gradients(&m, &[1.0], 1.0, 0.5, 1e-6).unwrap();
        let (a, b) = (g.d_bias[(0, 0)].im, fd.d_bias[(0, 0)].im);
        assert!((a - b).abs() / a.abs() < 1e-5, "{a} vs {b}");

        let m = unit_model();
        let fo = m.forward(&[1.0]).unwrap();
        let g = backward(&m, &fo, &[1.0], 1.0, 0.5).unwrap();
        let fd = finite_difference_gradients(&m, &[1.0], 1.0, 0.5, 1e-6).unwrap();
        assert!((g.d_bias[(0, 0)].im - fd.d_bias[(0, 0)].im).abs() < 1e-8);
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        let m = unit_model();
        let fo = m.forward(&[1.0]).unwrap();
        let g = backward(&m, &fo, &[1.0], fo.y, 0.7).unwrap();
        assert!(g.to_flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_step_rejected() {
        assert!(finite_difference_gradients(&unit_model(), &[1.0], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gradient_is_affine_in_lambda() {
        let mut rng = Rng::seed_from_u64(8);
        let m = crate::model::init_xavier_complex(6, 2, &mut rng).unwrap();
        let x = [0.4, -0.9];
        let fo = m.forward(&x).unwrap();
        let g = |l: f64| backward(&m, &fo, &x, 0.3, l).unwrap().to_flat();
        let (g0, g1) = (g(0.0), g(1.0));
        for a in [0.1, 0.5, 1.5, 3.0] {
            for ((ga, z), o) in g(a).iter().zip(&g0).zip(&g1) {
                let pred = z + a * (o - z);
                assert!((ga - pred).abs() <= 1e-10 * ga.abs().max(1.0));
            }
        }
    }

    #[test]
    fn batch_gradient_is_mean() {
        let mut rng = Rng::seed_from_u64(12);
        let m = crate::model::init_xavier_complex(4, 1, &mut rng).unwrap();
        let xs = [[0.5], [-0.25], [0.8]];
        let ys = [1.0, -2.0, 0.0];
        let (l, g) = batch_gradients(&m, xs.iter().map(|x| &x[..]).zip(ys), 0.1).unwrap();
        let mut sum = GradientSet::zeros_like(&m);
        let mut lsum = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let fo = m.forward(x).unwrap();
            lsum += loss(fo.y, fo.e, y, 0.1).unwrap().total;
            sum.add_assign(&backward(&m, &fo, x, y, 0.1).unwrap());
        }
        sum.scale(1.0 / 3.0);
        assert!((l.total - lsum / 3.0).abs() < 1e-14);
        for (a, b) in g.to_flat().iter().zip(sum.to_flat()) {
            assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
        }
    }
}

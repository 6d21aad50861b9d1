//! Cauchy kernel expansions: a training-free approximator built by
//! discretizing the Cauchy integral over a closed contour.
//!
//! For a function holomorphic inside a contour `G`,
//! `f(x) = 1/(2 pi i) * integral_G f(zeta) / (zeta - x) d zeta`. Sampling the
//! contour at nodes `zeta_k` with trapezoidal increments `d zeta_k` gives
//! `f(x) ~ sum_k theta_k K(zeta_k, x)` with `theta_k = f(zeta_k) d zeta_k / (2 pi i)`.
//! In `N` dimensions the contour is a product of 1-D contours and the sum
//! runs over the tensor grid. Trapezoidal sums on a smooth periodic
//! parametrization converge geometrically, so modest node counts already
//! reach machine precision.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex_linalg::{cinv, cmul, Complex, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative Tikhonov strength for [`fit_expansion_least_squares`].
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// `K(xi, x) = prod_i 1 / (xi_i - x_i)`.
pub fn cauchy_kernel(xi: &[Complex], x: &[f64]) -> Result<Complex> {
    if xi.len() != x.len() {
        return Err(Error::LengthMismatch(xi.len(), x.len()));
    }
    let mut acc = ONE;
    for (i, (&z, &xv)) in xi.iter().zip(x).enumerate() {
        let d = Complex::new(z.re - xv, z.im);
        let inv = cinv(d).map_err(|e| match e {
            Error::DivisionByZero => Error::PoleEncountered(format!("xi_{i} == x_{i} == {xv}")),
            other => other,
        })?;
        acc = cmul(acc, inv);
    }
    Ok(acc)
}

/// One closed contour: nodes and the complex increments `d zeta` attached to
/// each node.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub nodes: Vec<Complex>,
    pub increments: Vec<Complex>,
}

impl Contour {
    /// Sum of increments; zero for a closed contour.
    pub fn closure_defect(&self) -> Complex {
        self.increments.iter().sum()
    }
}

/// Product of per-dimension contours.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub dims: Vec<Contour>,
}

impl BoundaryMesh {
    pub fn new(dims: Vec<Contour>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("mesh needs at least one dimension".into()));
        }
        for (i, c) in dims.iter().enumerate() {
            if c.nodes.len() < 4 || c.nodes.len() != c.increments.len() {
                return Err(Error::InvalidArgument(format!(
                    "dimension {i}: need >= 4 nodes with one increment each"
                )));
            }
        }
        Ok(Self { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Tensor product of 1-D meshes.
    pub fn product(meshes: &[BoundaryMesh]) -> Result<Self> {
        Self::new(meshes.iter().flat_map(|m| m.dims.iter().cloned()).collect())
    }
}

/// Trapezoidal discretization of `center + a cos t + i b sin t`.
pub fn ellipse_mesh(a: f64, b: f64, center: Complex, nodes: usize) -> Result<BoundaryMesh> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!("semi-axes must be > 0, got {a}, {b}")));
    }
    if nodes < 4 {
        return Err(Error::InvalidArgument(format!("need >= 4 nodes, got {nodes}")));
    }
    let dt = TAU / nodes as f64;
    let (mut zs, mut dz) = (Vec::with_capacity(nodes), Vec::with_capacity(nodes));
    for j in 0..nodes {
        let t = dt * j as f64;
        let (s, c) = t.sin_cos();
        zs.push(center + Complex::new(a * c, b * s));
        dz.push(Complex::new(-a * s, b * c) * dt);
    }
    BoundaryMesh::new(vec![Contour { nodes: zs, increments: dz }])
}

/// Whether `z` lies strictly inside the ellipse.
pub fn inside_ellipse(a: f64, b: f64, center: Complex, z: Complex) -> bool {
    let u = (z.re - center.re) / a;
    let v = (z.im - center.im) / b;
    u * u + v * v < 1.0
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelExpansion {
    pub points: Vec<Vec<Complex>>,
    pub weights: Vec<Complex>,
}

impl KernelExpansion {
    pub fn new(points: Vec<Vec<Complex>>, weights: Vec<Complex>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch(points.len(), weights.len()));
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::ShapeMismatch("points of differing dimension".into()));
            }
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ExpansionFile {
            xi_re: self.points.iter().map(|p| p.iter().map(|z| z.re).collect()).collect(),
            xi_im: self.points.iter().map(|p| p.iter().map(|z| z.im).collect()).collect(),
            theta_re: self.weights.iter().map(|z| z.re).collect(),
            theta_im: self.weights.iter().map(|z| z.im).collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ExpansionFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.xi_re.len() != doc.xi_im.len()
            || doc.theta_re.len() != doc.theta_im.len()
            || doc.xi_re.iter().zip(&doc.xi_im).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::Schema("mismatched real/imaginary arrays".into()));
        }
        let points = doc
            .xi_re
            .iter()
            .zip(&doc.xi_im)
            .map(|(re, im)| re.iter().zip(im).map(|(&r, &i)| Complex::new(r, i)).collect())
            .collect();
        let weights = doc
            .theta_re
            .iter()
            .zip(&doc.theta_im)
            .map(|(&r, &i)| Complex::new(r, i))
            .collect();
        Self::new(points, weights).map_err(|e| Error::Schema(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionFile {
    xi_re: Vec<Vec<f64>>,
    xi_im: Vec<Vec<f64>>,
    theta_re: Vec<f64>,
    theta_im: Vec<f64>,
}

/// `theta_k = f(zeta_k) * prod_i d zeta_{k,i} / (2 pi i)^N` over the tensor
/// grid of mesh nodes, with `xi_k = zeta_k`.
pub fn quadrature_expansion<F>(f_boundary: F, mesh: &BoundaryMesh) -> KernelExpansion
where
    F: Fn(&[Complex]) -> Complex,
{
    let n = mesh.dim();
    let norm = cinv(Complex::new(0.0, TAU).powu(n as u32)).expect("2 pi i is nonzero");
    let sizes: Vec<usize> = mesh.dims.iter().map(|c| c.nodes.len()).collect();
    let total: usize = sizes.iter().product();

    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut zeta = vec![ZERO; n];
    for _ in 0..total {
        let mut measure = ONE;
        for (d, &j) in idx.iter().enumerate() {
            zeta[d] = mesh.dims[d].nodes[j];
            measure = cmul(measure, mesh.dims[d].increments[j]);
        }
        weights.push(cmul(cmul(f_boundary(&zeta), measure), norm));
        points.push(zeta.clone());
        // odometer, last dimension fastest
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    KernelExpansion { points, weights }
}

/// `sum_k theta_k K(xi_k, x)`.
pub fn evaluate_expansion(expansion: &KernelExpansion, x: &[f64]) -> Result<Complex> {
    let mut acc = ZERO;
    for (p, &w) in expansion.points.iter().zip(&expansion.weights) {
        acc += cmul(w, cauchy_kernel(p, x)?);
    }
    Ok(acc)
}

/// Weights for fixed kernel points minimizing
/// `sum_j |sum_k theta_k K(xi_k, x_j) - f_j|^2 + (ridge * s_max)^2 |theta|^2`
/// where `s_max` is the largest singular value of the design matrix.
///
/// Solved through an SVD of the design matrix rather than the normal
/// equations, which square its condition number.
pub fn fit_expansion_least_squares(
    samples: &[(Vec<f64>, Complex)],
    points: &[Vec<Complex>],
    ridge: f64,
) -> Result<KernelExpansion> {
    if samples.is_empty() || points.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample and one point".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    let (rows, cols) = (samples.len(), points.len());
    let mut design = DMatrix::<Complex>::zeros(rows, cols);
    for (j, (x, _)) in samples.iter().enumerate() {
        for (k, p) in points.iter().enumerate() {
            design[(j, k)] = cauchy_kernel(p, x)?;
        }
    }
    let rhs = DMatrix::<Complex>::from_iterator(rows, 1, samples.iter().map(|(_, f)| *f));

    let svd = design.try_svd(true, true, f64::EPSILON, 0).ok_or(Error::SingularSystem)?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SingularSystem),
    };
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::SingularSystem);
    }
    let damp = (ridge * s_max).powi(2);
    let proj = u.adjoint() * rhs;
    let mut coeff = proj.clone();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let filter = if s * s + damp > 0.0 { s / (s * s + damp) } else { 0.0 };
        // with ridge == 0 drop directions at roundoff level
        let filter = if ridge == 0.0 && s <= s_max * f64::EPSILON * (rows.max(cols) as f64) {
            0.0
        } else {
            filter
        };
        coeff[(i, 0)] = proj[(i, 0)] * filter;
    }
    let theta = v_t.adjoint() * coeff;
    if theta.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SingularSystem);
    }
    KernelExpansion::new(points.to_vec(), theta.iter().cloned().collect())
}

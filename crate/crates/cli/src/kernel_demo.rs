//! Quadrature convergence of the Cauchy kernel expansion on an ellipse.

use std::str::FromStr;

use cauchynet::data::linspace;
use cauchynet::kernel::{ellipse_mesh, evaluate_expansion, inside_ellipse, quadrature_expansion};
use cauchynet::Complex;

use crate::error::{CliError, Result};

/// Holomorphic test functions with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoFunction {
    One,
    Square,
    Exp,
    /// `1/(2 - z)`, with a pole at 2.
    InvTwoMinus,
}

impl DemoFunction {
    pub const ALL: [DemoFunction; 4] =
        [DemoFunction::One, DemoFunction::Square, DemoFunction::Exp, DemoFunction::InvTwoMinus];

    pub fn name(self) -> &'static str {
        match self {
            DemoFunction::One => "one",
            DemoFunction::Square => "square",
            DemoFunction::Exp => "exp",
            DemoFunction::InvTwoMinus => "inv2",
        }
    }

    pub fn eval(self, z: Complex) -> Complex {
        match self {
            DemoFunction::One => Complex::new(1.0, 0.0),
            DemoFunction::Square => z * z,
            DemoFunction::Exp => z.exp(),
            DemoFunction::InvTwoMinus => (Complex::new(2.0, 0.0) - z).inv(),
        }
    }

    pub fn singularity(self) -> Option<Complex> {
        match self {
            DemoFunction::InvTwoMinus => Some(Complex::new(2.0, 0.0)),
            _ => None,
        }
    }
}

impl FromStr for DemoFunction {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|f| f.name()).collect();
            CliError::config(format!("unknown demo function '{s}'; known: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub sup_error: f64,
}

/// Sup error of the trapezoidal expansion over `grid` points of `[-1, 1]`
/// for each node count. No accuracy floor: coarse meshes still get a row.
pub fn run_kernel_demo(a: f64, b: f64, f: DemoFunction, nodes: &[usize], grid: usize) -> Result<Vec<ConvergenceRow>> {
    if !(a > 1.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(CliError::config(format!("the ellipse must enclose [-1, 1]: need a > 1 and b > 0, got a={a}, b={b}")));
    }
    if nodes.is_empty() || grid < 2 {
        return Err(CliError::config("need at least one node count and a grid of >= 2 points"));
    }
    if let Some(pole) = f.singularity() {
        let u = pole.re / a;
        let v = pole.im / b;
        if inside_ellipse(a, b, Complex::new(0.0, 0.0), pole) || (u * u + v * v - 1.0).abs() < 1e-12 {
            return Err(CliError::config(format!(
                "{} has a singularity at {pole} on or inside the contour (a={a}, b={b})",
                f.name()
            )));
        }
    }
    let xs = linspace(-1.0, 1.0, grid);
    let mut rows = Vec::with_capacity(nodes.len());
    for &n in nodes {
        let mesh = ellipse_mesh(a, b, Complex::new(0.0, 0.0), n)?;
        let exp = quadrature_expansion(|z| f.eval(z[0]), &mesh);
        let mut sup: f64 = 0.0;
        for &x in &xs {
            let approx = evaluate_expansion(&exp, &[x])?;
            sup = sup.max((approx - f.eval(Complex::new(x, 0.0))).norm());
        }
        rows.push(ConvergenceRow { nodes: n, sup_error: sup });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("nodes,sup_error\n");
    for r in rows {
        out += &format!("{},{}\n", r.nodes, r.sup_error);
    }
    out
}

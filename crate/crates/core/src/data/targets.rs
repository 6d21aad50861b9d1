//! Synthetic target functions and a turning-point finder.

/// `sin(3x) + 4 / ((x - 0.5)^2 + 0.01)`: a tall rational spike at 0.5.
pub fn target_intro_spike(x: f64) -> f64 {
    (3.0 * x).sin() + 4.0 / ((x - 0.5).powi(2) + 0.01)
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sharp peak at -0.6, Gaussian dip at -0.4 and a sign-switched oscillation:
/// `1/((x+0.6)^2+0.005) - 40 exp(-2(x+0.4)^2) + 50 sign(x) |sin(3x)+0.8|^1.5 sin(10x)`
/// with `sign(0) = 0`.
pub fn target_exp1(x: f64) -> f64 {
    1.0 / ((x + 0.6).powi(2) + 0.005) - 40.0 * (-2.0 * (x + 0.4).powi(2)).exp()
        + 50.0 * signum0(x) * ((3.0 * x).sin() + 0.8).abs().powf(1.5) * (10.0 * x).sin()
}

/// Gap-filling target on `[-2, 2]`; six turning points.
pub fn target_exp2_gap(x: f64) -> f64 {
    (2.0 * x - 4.0).sin() + 0.5 * (5.0 * x - 5.0).cos() + 0.05 / ((x - 1.0).powi(2) + 0.1)
        + 0.01 / ((x + 0.5).powi(2) + 0.05)
        - 0.01 * (x * x - x * x * x)
}

/// `3 - x^2 + xy - y^2 - 1/(5 + (x-1)^2)`, used with a withheld disk.
pub fn target_2d_missing_disk(x: f64, y: f64) -> f64 {
    3.0 - x * x + x * y - y * y - 1.0 / (5.0 + (x - 1.0).powi(2))
}

/// `x^2 - xy + 3y + y^2 + 1/(5 + x^2)`.
pub fn target_2d_surface(x: f64, y: f64) -> f64 {
    x * x - x * y + 3.0 * y + y * y + 1.0 / (5.0 + x * x)
}

/// Registered generators, addressable by name from experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    IntroSpike,
    Exp1,
    Exp2Gap,
    MissingDisk,
    Surface,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Target::IntroSpike,
        Target::Exp1,
        Target::Exp2Gap,
        Target::MissingDisk,
        Target::Surface,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::IntroSpike => "intro_spike",
            Target::Exp1 => "exp1",
            Target::Exp2Gap => "exp2_gap",
            Target::MissingDisk => "disk2d",
            Target::Surface => "surface2d",
        }
    }

    pub fn from_name(name: &str) -> Option<Target> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn inputs(self) -> usize {
        match self {
            Target::MissingDisk | Target::Surface => 2,
            _ => 1,
        }
    }

    /// Per-dimension sampling box used by the experiments.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Target::IntroSpike | Target::Exp1 => (-1.0, 1.0),
            Target::Exp2Gap => (-2.0, 2.0),
            Target::MissingDisk => (-0.8, 0.8),
            Target::Surface => (-1.5, 1.5),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Target::IntroSpike => target_intro_spike(x[0]),
            Target::Exp1 => target_exp1(x[0]),
            Target::Exp2Gap => target_exp2_gap(x[0]),
            Target::MissingDisk => target_2d_missing_disk(x[0], x[1]),
            Target::Surface => target_2d_surface(x[0], x[1]),
        }
    }
}

/// Abscissae in `[lo, hi]` where the numerical derivative of `f` changes
/// sign on a uniform grid of `grid` intervals, each refined by bisection on
/// the derivative to `1e-8`.
pub fn find_turning_points<F: Fn(f64) -> f64>(f: F, domain: (f64, f64), grid: usize) -> Vec<f64> {
    assert!(grid >= 100, "grid must have at least 100 intervals");
    let (lo, hi) = domain;
    let h = 1e-5 * (hi - lo).abs().max(1.0);
    let deriv = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);

    let step = (hi - lo) / grid as f64;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev_d = deriv(lo);
    for i in 1..=grid {
        let x = lo + step * i as f64;
        let d = deriv(x);
        if prev_d * d < 0.0 {
            let (mut a, mut b, mut da) = (prev_x, x, prev_d);
            while b - a > 1e-8 {
                let mid = 0.5 * (a + b);
                let dm = deriv(mid);
                if dm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if da * dm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    da = dm;
                }
            }
            out.push(0.5 * (a + b));
        }
        if d != 0.0 {
            prev_x = x;
            prev_d = d;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn intro_spike_values() {
        assert!((target_intro_spike(0.5) - 400.997_494_986_604_07).abs() < 1e-9);
        assert!((target_intro_spike(0.0) - 15.384_615_384_615_385).abs() < 1e-12);
        for d in [0.01, 0.1, 0.37] {
            let lhs = target_intro_spike(0.5 + d) - target_intro_spike(0.5 - d);
            let rhs = (3.0 * (0.5 + d)).sin() - (3.0 * (0.5 - d)).sin();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn exp1_values() {
        assert!((target_exp1(0.0) - (-26.306_235_455_550_377)).abs() < 1e-9);
        // rational peak dominates at -0.6
        assert!(target_exp1(-0.6) > 100.0);
        // oscillating term vanishes at 0 from both sides, so no jump
        let eps = 1e-9;
        assert!((target_exp1(eps) - target_exp1(-eps)).abs() < 1e-6);
    }

    #[test]
    fn exp2_values() {
        assert!((target_exp2_gap(0.0) - 0.977_421_466_827_42).abs() < 1e-11);
        assert!((target_exp2_gap(1.0) - 0.095_050_399_261_274_81).abs() < 1e-12);
    }

    #[test]
    fn two_d_values() {
        assert!((target_2d_missing_disk(0.0, 0.0) - (3.0 - 1.0 / 6.0)).abs() < 1e-15);
        assert!((target_2d_missing_disk(1.0, 0.0) - 1.8).abs() < 1e-15);
        assert!(target_2d_missing_disk(1.0, 0.0) != target_2d_missing_disk(0.0, 1.0));
        assert_eq!(target_2d_missing_disk(0.4, 0.4), target_2d_missing_disk(0.4, 0.4));
        assert!((target_2d_surface(0.0, 0.0) - 0.2).abs() < 1e-15);
        assert!((target_2d_surface(1.0, 1.0) - (4.0 + 1.0 / 6.0)).abs() < 1e-14);
        assert!(target_2d_surface(-1.5, -1.5).is_finite());
    }

    #[test]
    fn turning_points_of_sine() {
        let tp = find_turning_points(f64::sin, (0.0, 2.0 * PI), 100);
        assert_eq!(tp.len(), 2);
        assert!((tp[0] - PI / 2.0).abs() < 1e-6);
        assert!((tp[1] - 3.0 * PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn turning_points_of_gap_target() {
        let tp = find_turning_points(target_exp2_gap, (-2.0, 2.0), 4000);
        assert_eq!(tp.len(), 6, "{tp:?}");
    }

    #[test]
    fn constant_has_no_turning_points() {
        assert!(find_turning_points(|_| 3.0, (-1.0, 1.0), 200).is_empty());
    }

    #[test]
    fn registry_roundtrip() {
        for t in Target::ALL {
            assert_eq!(Target::from_name(t.name()), Some(t));
        }
        assert_eq!(Target::from_name("nope"), None);
    }
}

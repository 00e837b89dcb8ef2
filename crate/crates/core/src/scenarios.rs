//! Closed-form initial conditions.
//!
//! All formulas use `gamma = sqrt(1 - c^2)`. Hyperbolic functions of
//! `x / gamma` are evaluated in overflow-safe forms, since `c` close to one
//! makes the arguments large on wide domains.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioSpec {
    /// `u0 = 0`, `v0 = 4 / (gamma cosh(x / gamma))`.
    FlatImpulse { c: f64 },
    Kink { c: f64 },
    Antikink { c: f64 },
    KinkKink { c: f64 },
    KinkAntikink { c: f64 },
    Breather { c: f64, w: f64 },
    /// `u0 = amplitude * exp(-(x - center)^2 / width)`, `v0 = 0`.
    Gaussian { amplitude: f64, width: f64, center: f64 },
}

impl ScenarioSpec {
    pub const NAMES: [&'static str; 7] = [
        "flat-impulse",
        "kink",
        "antikink",
        "kink-kink",
        "kink-antikink",
        "breather",
        "gaussian",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::FlatImpulse { .. } => "flat-impulse",
            Self::Kink { .. } => "kink",
            Self::Antikink { .. } => "antikink",
            Self::KinkKink { .. } => "kink-kink",
            Self::KinkAntikink { .. } => "kink-antikink",
            Self::Breather { .. } => "breather",
            Self::Gaussian { .. } => "gaussian",
        }
    }

    /// Builds a scenario from its name and parameters; parameters that do
    /// not apply to the named family are ignored.
    pub fn from_parts(name: &str, c: f64, w: f64, amplitude: f64, width: f64, center: f64) -> Result<Self> {
        let spec = match name {
            "flat-impulse" => Self::FlatImpulse { c },
            "kink" => Self::Kink { c },
            "antikink" => Self::Antikink { c },
            "kink-kink" => Self::KinkKink { c },
            "kink-antikink" => Self::KinkAntikink { c },
            "breather" => Self::Breather { c, w },
            "gaussian" => Self::Gaussian { amplitude, width, center },
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario '{other}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn velocity(&self) -> Option<f64> {
        match *self {
            Self::FlatImpulse { c }
            | Self::Kink { c }
            | Self::Antikink { c }
            | Self::KinkKink { c }
            | Self::KinkAntikink { c }
            | Self::Breather { c, .. } => Some(c),
            Self::Gaussian { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.velocity() {
            if !(c.abs() < 1.0) {
                return Err(Error::Config(format!(
                    "scenario.c must satisfy |c| < 1, got {c}"
                )));
            }
        }
        match *self {
            Self::Breather { w, .. } if !(w > 0.0 && w < 1.0) => Err(Error::Config(format!(
                "breather frequency scenario.w must lie in (0, 1), got {w}"
            ))),
            Self::Gaussian { amplitude, width, center }
                if !(amplitude.is_finite() && width > 0.0 && center.is_finite()) =>
            {
                Err(Error::Config(format!(
                    "gaussian needs finite amplitude/center and width > 0, got ({amplitude}, {width}, {center})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `(u0(x), v0(x))` at one point.
    pub fn evaluate(&self, x: f64) -> (f64, f64) {
        match *self {
            Self::FlatImpulse { c } | Self::KinkAntikink { c } => {
                let g = gamma(c);
                (0.0, 4.0 * sech(x / g) / g)
            }
            Self::Kink { c } => {
                let g = gamma(c);
                (kink_profile(x / g), -2.0 * c * sech(x / g) / g)
            }
            Self::Antikink { c } => {
                let g = gamma(c);
                (kink_profile(-x / g), -2.0 * c * sech(x / g) / g)
            }
            Self::KinkKink { c } => {
                let g = gamma(c);
                (4.0 * (c * (x / g).sinh()).atan(), 0.0)
            }
            Self::Breather { c, w } => (breather_u0(c, w, x), breather_v0(c, w, x)),
            Self::Gaussian { amplitude, width, center } => {
                let d = x - center;
                (amplitude * (-d * d / width).exp(), 0.0)
            }
        }
    }
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Samples `(u0, v0)` at the physical grid nodes.
pub fn initial_condition(spec: &ScenarioSpec, grid: &Grid) -> Result<(Field, Field)> {
    sample(spec, grid.nodes())
}

/// Samples `(u0, v0)` at arbitrary points.
pub fn sample(spec: &ScenarioSpec, xs: &[f64]) -> Result<(Field, Field)> {
    spec.validate()?;
    Ok(xs.iter().map(|&x| spec.evaluate(x)).unzip())
}

fn gamma(c: f64) -> f64 {
    (1.0 - c * c).sqrt()
}

/// `1 / cosh z`, underflowing to zero instead of overflowing.
pub fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `4 atan(exp(z))`; `exp` overflow to infinity maps to the `2 pi` limit.
fn kink_profile(z: f64) -> f64 {
    4.0 * z.exp().atan()
}

/// Travelling kink `4 atan(exp((x - c t) / sqrt(1 - c^2)))`, an exact
/// solution of `u_tt - u_xx + sin u = 0`.
pub fn exact_classical_kink(c: f64, x: f64, t: f64) -> f64 {
    kink_profile((x - c * t) / gamma(c))
}

/// Moving breather of `u_tt - u_xx + sin u = 0` with velocity `c` and
/// internal frequency `w`:
/// `4 atan( sqrt(1-w^2) sin(w (t - c x)/gamma) / (w cosh(sqrt(1-w^2) (x - c t)/gamma)) )`.
pub fn exact_classical_breather(c: f64, w: f64, x: f64, t: f64) -> f64 {
    let g = gamma(c);
    let k = (1.0 - w * w).sqrt();
    let phase = w * (t - c * x) / g;
    let envelope = k * (x - c * t) / g;
    4.0 * (k / w * phase.sin() * sech(envelope)).atan()
}

fn breather_u0(c: f64, w: f64, x: f64) -> f64 {
    exact_classical_breather(c, w, x, 0.0)
}

/// Breather initial velocity with the cosine closed around its own
/// argument:
///
/// `4 w K/gamma (w cos(A) cosh(B) + c K sin(A) sinh(B)) / (w^2 cosh^2 B + K^2 sin^2 A)`
///
/// with `K = sqrt(1 - w^2)`, `A = -c w x/gamma`, `B = K x/gamma`. Numerator
/// and denominator are divided by `cosh^2 B` to stay finite.
pub fn breather_v0(c: f64, w: f64, x: f64) -> f64 {
    let g = gamma(c);
    let k = (1.0 - w * w).sqrt();
    let a = -c * w * x / g;
    let b = k * x / g;
    let sb = sech(b);
    let num = w * a.cos() * sb + c * k * a.sin() * b.tanh() * sb;
    let den = w * w + k * k * a.sin().powi(2) * sb * sb;
    4.0 * w * k / g * num / den
}

/// The breather velocity read literally off the typeset formula, where the
/// cosine's parenthesis swallows the remaining numerator:
/// `w cos(A cosh B + c K sin A sinh B)`. Kept for the discrepancy report;
/// it does not match the time derivative of the breather.
pub fn breather_v0_as_typeset(c: f64, w: f64, x: f64) -> f64 {
    let g = gamma(c);
    let k = (1.0 - w * w).sqrt();
    let a = -c * w * x / g;
    let b = k * x / g;
    let num = w * (a * b.cosh() + c * k * a.sin() * b.sinh()).cos();
    let den = w * w * b.cosh().powi(2) + k * k * a.sin().powi(2);
    4.0 * w * k / g * num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn kink_centre_is_pi() {
        let (u, _) = ScenarioSpec::Kink { c: 0.999 }.evaluate(0.0);
        assert_abs_diff_eq!(u, PI, epsilon = 1e-15);
    }

    #[test]
    fn kink_antikink_values() {
        let c: f64 = 0.999;
        let (u, v) = ScenarioSpec::KinkAntikink { c }.evaluate(0.0);
        assert_eq!(u, 0.0);
        assert_abs_diff_eq!(v, 4.0 / (1.0 - c * c).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_peak() {
        let s = ScenarioSpec::Gaussian { amplitude: 1.0, width: 0.002, center: 0.0 };
        assert_eq!(s.evaluate(0.0), (1.0, 0.0));
        assert_eq!(s.evaluate(0.3).1, 0.0);
    }

    #[test]
    fn kink_limits() {
        assert_abs_diff_eq!(exact_classical_kink(0.5, 1e3, 0.0), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_classical_kink(0.5, -1e3, 0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_classical_kink(0.999, 1e6, 0.0), 2.0 * PI, epsilon = 1e-12);
        for x in [-0.3, 0.0, 0.01, 2.0] {
            let (u, _) = ScenarioSpec::Kink { c: 0.999 }.evaluate(x);
            assert_eq!(u, exact_classical_kink(0.999, x, 0.0));
        }
    }

    #[test]
    fn wide_domains_stay_finite() {
        let specs = [
            ScenarioSpec::FlatImpulse { c: 0.999 },
            ScenarioSpec::Kink { c: 0.999 },
            ScenarioSpec::Antikink { c: 0.999 },
            ScenarioSpec::KinkKink { c: 0.999 },
            ScenarioSpec::KinkAntikink { c: 0.999 },
            ScenarioSpec::Breather { c: 0.999, w: 0.4 },
        ];
        let g = Grid::new(1024, -60.0, 60.0).unwrap();
        for s in specs {
            let (u, v) = initial_condition(&s, &g).unwrap();
            assert!(u.iter().chain(&v).all(|x| x.is_finite()), "{s}");
        }
    }

    #[test]
    fn validation() {
        assert!(ScenarioSpec::from_parts("kink", 1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(ScenarioSpec::from_parts("breather", 0.5, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(ScenarioSpec::from_parts("breather", 0.5, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(ScenarioSpec::from_parts("gaussian", 0.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ScenarioSpec::from_parts("soliton", 0.5, 0.4, 1.0, 1.0, 0.0).is_err());
        for name in ScenarioSpec::NAMES {
            let s = ScenarioSpec::from_parts(name, 0.9, 0.4, 1.0, 0.002, 0.0).unwrap();
            assert_eq!(s.name(), name);
        }
    }
}

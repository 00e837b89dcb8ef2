//! Right-hand sides `u_tt = F(u)` for the nonlocal and the classical
//! Sine-Gordon equation on a CGL grid.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::kernel::{
    apply_l_collocation, apply_l_quadrature, apply_l_spectral, KernelSpec, KernelTable,
    SignConvention,
};
use crate::transform::ChebTransform;
use crate::Field;

/// A second-order system `u'' = a(u)` advanced by the integrator.
pub trait SecondOrderSystem {
    fn dimension(&self) -> usize;
    fn acceleration(&self, u: &[f64]) -> Result<Field>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NonlocalSpectral,
    NonlocalQuadrature,
    /// Kernel integral applied to the Chebyshev interpolant (dense matrix).
    NonlocalCollocation,
    ClassicalLocal,
}

impl ModelKind {
    pub fn is_nonlocal(self) -> bool {
        !matches!(self, ModelKind::ClassicalLocal)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlocal-spectral" => Ok(Self::NonlocalSpectral),
            "nonlocal-quadrature" => Ok(Self::NonlocalQuadrature),
            "nonlocal-collocation" => Ok(Self::NonlocalCollocation),
            "classical-local" => Ok(Self::ClassicalLocal),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected nonlocal-quadrature | nonlocal-spectral | nonlocal-collocation | classical-local)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NonlocalSpectral => "nonlocal-spectral",
            Self::NonlocalQuadrature => "nonlocal-quadrature",
            Self::NonlocalCollocation => "nonlocal-collocation",
            Self::ClassicalLocal => "classical-local",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsSpec {
    pub model: ModelKind,
    pub kernel: Option<KernelSpec>,
    pub wave_speed: f64,
    pub sign: SignConvention,
}

impl DynamicsSpec {
    pub fn nonlocal(model: ModelKind, kernel: KernelSpec, sign: SignConvention) -> Self {
        Self {
            model,
            kernel: Some(kernel),
            wave_speed: 1.0,
            sign,
        }
    }

    pub fn classical(wave_speed: f64) -> Self {
        Self {
            model: ModelKind::ClassicalLocal,
            kernel: None,
            wave_speed,
            sign: SignConvention::Diffusive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            ModelKind::ClassicalLocal => {
                if !(self.wave_speed > 0.0 && self.wave_speed.is_finite()) {
                    return Err(Error::Config(format!(
                        "classical model needs wave_speed > 0, got {}",
                        self.wave_speed
                    )));
                }
            }
            _ => match &self.kernel {
                Some(k) => k.validate()?,
                None => {
                    return Err(Error::Config(
                        "nonlocal model requires a kernel specification".into(),
                    ))
                }
            },
        }
        Ok(())
    }
}

/// Elementwise `sin(u)`.
pub fn sine_force(u: &[f64]) -> Field {
    u.iter().map(|v| v.sin()).collect()
}

/// `L u - sin u` (nonlocal) or `c^2 D(D u) - sin u` (classical) at all nodes.
pub fn rhs(
    spec: &DynamicsSpec,
    grid: &Grid,
    table: Option<&KernelTable>,
    transform: &ChebTransform,
    u: &[f64],
) -> Result<Field> {
    check_len(grid.len(), u.len())?;
    let mut out = match spec.model {
        ModelKind::ClassicalLocal => {
            let c2 = spec.wave_speed * spec.wave_speed;
            let du = grid.derivative(u)?;
            let mut d2u = grid.derivative(&du)?;
            d2u.iter_mut().for_each(|v| *v *= c2);
            d2u
        }
        ModelKind::NonlocalQuadrature => {
            let table = table.ok_or_else(missing_table)?;
            apply_l_quadrature(table, u, spec.sign)?
        }
        ModelKind::NonlocalSpectral => {
            let table = table.ok_or_else(missing_table)?;
            apply_l_spectral(table, transform, u, spec.sign)?
        }
        ModelKind::NonlocalCollocation => {
            let table = table.ok_or_else(missing_table)?;
            apply_l_collocation(table, u, spec.sign)?
        }
    };
    for (o, v) in out.iter_mut().zip(u) {
        *o -= v.sin();
    }
    Ok(out)
}

fn missing_table() -> Error {
    Error::Config("nonlocal model evaluated without a kernel table".into())
}

/// Semi-discrete Sine-Gordon system owning its grid data.
#[derive(Debug, Clone)]
pub struct SemiDiscrete {
    spec: DynamicsSpec,
    grid: Grid,
    transform: ChebTransform,
    table: Option<KernelTable>,
}

impl SemiDiscrete {
    pub fn new(spec: DynamicsSpec, grid: Grid) -> Result<Self> {
        spec.validate()?;
        let transform = ChebTransform::new(grid.degree())?;
        let table = match (spec.model, spec.kernel) {
            (ModelKind::ClassicalLocal, _) | (_, None) => None,
            (ModelKind::NonlocalCollocation, Some(k)) => {
                Some(KernelTable::new(k, &grid, &transform)?.with_collocation(&grid)?)
            }
            (_, Some(k)) => Some(KernelTable::new(k, &grid, &transform)?),
        };
        Ok(Self {
            spec,
            grid,
            transform,
            table,
        })
    }

    pub fn spec(&self) -> &DynamicsSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn transform(&self) -> &ChebTransform {
        &self.transform
    }

    pub fn table(&self) -> Option<&KernelTable> {
        self.table.as_ref()
    }
}

impl SecondOrderSystem for SemiDiscrete {
    fn dimension(&self) -> usize {
        self.grid.len()
    }

    fn acceleration(&self, u: &[f64]) -> Result<Field> {
        rhs(&self.spec, &self.grid, self.table.as_ref(), &self.transform, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nonlocal(model: ModelKind, grid: &Grid) -> SemiDiscrete {
        let k = KernelSpec::new(0.4, 0.2, grid.min_spacing()).unwrap();
        SemiDiscrete::new(DynamicsSpec::nonlocal(model, k, SignConvention::Diffusive), grid.clone())
            .unwrap()
    }

    #[test]
    fn sine_force_examples() {
        assert!(sine_force(&[0.0; 4]).iter().all(|v| *v == 0.0));
        assert!(sine_force(&[PI / 2.0; 3]).iter().all(|v| (*v - 1.0).abs() < 1e-15));
        let kink_centre = 4.0 * 1f64.atan();
        assert!(sine_force(&[kink_centre])[0].abs() < 1e-15);
    }

    #[test]
    fn zero_field_is_at_rest() {
        let g = Grid::new(32, -1.0, 1.0).unwrap();
        for sys in [
            nonlocal(ModelKind::NonlocalQuadrature, &g),
            SemiDiscrete::new(DynamicsSpec::classical(1.0), g.clone()).unwrap(),
        ] {
            let a = sys.acceleration(&vec![0.0; 33]).unwrap();
            assert!(a.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn equilibria_at_multiples_of_two_pi() {
        let g = Grid::new(24, -1.0, 1.0).unwrap();
        let quad = nonlocal(ModelKind::NonlocalQuadrature, &g);
        let classical = SemiDiscrete::new(DynamicsSpec::classical(1.0), g.clone()).unwrap();
        for m in [-2.0, 1.0, 3.0] {
            let u = vec![2.0 * PI * m; 25];
            for a in [quad.acceleration(&u).unwrap(), classical.acceleration(&u).unwrap()] {
                assert!(a.iter().all(|v| v.abs() < 1e-12), "m = {m}: {a:?}");
            }
        }
        // u = pi is an (unstable) equilibrium of both models
        let u = vec![PI; 25];
        let a = quad.acceleration(&u).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-12));
        let a = classical.acceleration(&u).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn classical_rhs_on_quadratic() {
        let g = Grid::new(16, -1.0, 1.0).unwrap();
        let sys = SemiDiscrete::new(DynamicsSpec::classical(1.0), g.clone()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let a = sys.acceleration(&u).unwrap();
        for (ai, x) in a.iter().zip(g.nodes()) {
            assert!((ai - (2.0 - (x * x).sin())).abs() < 1e-10);
        }
    }

    #[test]
    fn missing_table_is_a_config_error() {
        let g = Grid::new(8, -1.0, 1.0).unwrap();
        let t = ChebTransform::new(8).unwrap();
        let spec = DynamicsSpec::nonlocal(
            ModelKind::NonlocalQuadrature,
            KernelSpec::new(0.4, 0.2, 0.01).unwrap(),
            SignConvention::Diffusive,
        );
        assert!(matches!(rhs(&spec, &g, None, &t, &[0.0; 9]), Err(Error::Config(_))));
        let bad = DynamicsSpec { kernel: None, ..spec };
        assert!(SemiDiscrete::new(bad, g.clone()).is_err());
        assert!(SemiDiscrete::new(DynamicsSpec::classical(0.0), g).is_err());
    }

    #[test]
    fn model_names_roundtrip() {
        for m in [
            ModelKind::NonlocalQuadrature,
            ModelKind::NonlocalSpectral,
            ModelKind::NonlocalCollocation,
            ModelKind::ClassicalLocal,
        ] {
            assert_eq!(m.to_string().parse::<ModelKind>().unwrap(), m);
        }
        assert!("local".parse::<ModelKind>().is_err());
    }
}

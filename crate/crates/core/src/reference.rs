//! Finite-difference comparator on a uniform grid: composite trapezoid rule
//! for the nonlocal operator and centred second-order (leapfrog) time
//! stepping.
//!
//! Nodes are ordered ascending, `x_i = a + i h`, unlike the CGL grid.

use crate::error::{check_len, Error, Result};
use crate::grid::HORIZON_RTOL;
use crate::kernel::{kernel_value, KernelSpec, SignConvention};
use crate::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    m: usize,
    a: f64,
    b: f64,
    h: f64,
    nodes: Vec<f64>,
}

impl FdGrid {
    /// Uniform grid with `m` intervals on `[a, b]`.
    pub fn new(m: usize, a: f64, b: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("FD grid needs at least 2 intervals, got {m}")));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Config(format!("degenerate interval [{a}, {b}]")));
        }
        let h = (b - a) / m as f64;
        let mut nodes: Vec<f64> = (0..=m).map(|i| a + i as f64 * h).collect();
        nodes[m] = b;
        Ok(Self { m, a, b, h, nodes })
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of grid steps covered by the horizon.
    fn reach(&self, delta: f64) -> usize {
        (delta * (1.0 + HORIZON_RTOL) / self.h).floor() as usize
    }
}

/// Nonlocal operator by the composite trapezoid rule over the horizon
/// clipped to the domain; the self node contributes nothing.
pub fn fd_apply_l(
    grid: &FdGrid,
    spec: &KernelSpec,
    u: &[f64],
    sign: SignConvention,
) -> Result<Field> {
    check_len(grid.len(), u.len())?;
    let reach = grid.reach(spec.delta);
    let h = grid.h;
    let m = grid.m;
    // kernel weights by offset; offsets inside the cutoff drop out
    let kw: Vec<f64> = (0..=reach)
        .map(|k| if k == 0 { Ok(0.0) } else { kernel_value(spec, k as f64 * h) })
        .collect::<Result<_>>()?;
    let sigma = sign.sigma();
    Ok((0..=m)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(m);
            let ui = u[i];
            let mut acc = 0.0;
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                let w = if j == lo || j == hi { 0.5 * h } else { h };
                acc += w * kw[i.abs_diff(j)] * (u[j] - ui);
            }
            sigma * acc
        })
        .collect())
}

/// Second derivative with mirrored ghost values at both ends.
pub fn fd_second_derivative(grid: &FdGrid, u: &[f64]) -> Result<Field> {
    check_len(grid.len(), u.len())?;
    let m = grid.m;
    let inv_h2 = 1.0 / (grid.h * grid.h);
    Ok((0..=m)
        .map(|i| {
            let left = if i == 0 { u[1] } else { u[i - 1] };
            let right = if i == m { u[m - 1] } else { u[i + 1] };
            (left - 2.0 * u[i] + right) * inv_h2
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdModel {
    Nonlocal { kernel: KernelSpec, sign: SignConvention },
    ClassicalLocal { wave_speed: f64 },
}

impl FdModel {
    pub fn acceleration(&self, grid: &FdGrid, u: &[f64]) -> Result<Field> {
        let mut a = match self {
            FdModel::Nonlocal { kernel, sign } => fd_apply_l(grid, kernel, u, *sign)?,
            FdModel::ClassicalLocal { wave_speed } => {
                let c2 = wave_speed * wave_speed;
                let mut d2 = fd_second_derivative(grid, u)?;
                d2.iter_mut().for_each(|v| *v *= c2);
                d2
            }
        };
        for (ai, ui) in a.iter_mut().zip(u) {
            *ai -= ui.sin();
        }
        Ok(a)
    }
}

/// Leapfrog `u^{s+1} = 2u^s - u^{s-1} + dt^2 a(u^s)` started by a Taylor step.
/// Returns the displacement after `n_steps`.
pub fn fd_evolve(
    grid: &FdGrid,
    model: &FdModel,
    u0: &[f64],
    v0: &[f64],
    dt: f64,
    n_steps: usize,
) -> Result<Field> {
    check_len(grid.len(), u0.len())?;
    check_len(grid.len(), v0.len())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Ok(u0.to_vec());
    }
    let dt2 = dt * dt;
    let a0 = model.acceleration(grid, u0)?;
    let mut prev = u0.to_vec();
    let mut cur: Field = u0
        .iter()
        .zip(v0)
        .zip(&a0)
        .map(|((u, v), a)| u + dt * v + 0.5 * dt2 * a)
        .collect();
    check_finite(&cur, 1, dt)?;
    for s in 1..n_steps {
        let a = model.acceleration(grid, &cur)?;
        let next: Field = cur
            .iter()
            .zip(&prev)
            .zip(&a)
            .map(|((c, p), a)| 2.0 * c - p + dt2 * a)
            .collect();
        check_finite(&next, s + 1, dt)?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

fn check_finite(u: &[f64], step: usize, dt: f64) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence {
            step,
            t: step as f64 * dt,
        })
    }
}

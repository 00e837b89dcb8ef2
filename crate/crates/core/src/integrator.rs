//! Störmer–Verlet time stepping with Neumann boundary enforcement.
//!
//! One step from `(U, V)` with acceleration `A = a(U)`:
//!
//! ```text
//! U' = U + dt (V + dt/2 A)        then boundary solve on U'
//! A' = a(U')
//! V' = V + dt/2 (A + A')          then boundary solve on V'
//! ```
//!
//! The boundary solve overwrites `u_0, u_N` so that the first and last rows
//! of the differentiation matrix annihilate the field.

use crate::error::{check_len, Error, Result};
use crate::dynamics::SecondOrderSystem;
use crate::grid::Grid;
use crate::Field;

/// Trajectory state at a time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
    pub step: usize,
}

impl State {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        check_len(u.len(), v.len())?;
        Ok(Self { u, v, t: 0.0, step: 0 })
    }

    fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Solver for the 2x2 homogeneous Neumann system at the two end nodes.
#[derive(Debug, Clone)]
pub struct BcSolver {
    matrix: [[f64; 2]; 2],
    inverse: [[f64; 2]; 2],
    first_row: Vec<f64>,
    last_row: Vec<f64>,
}

impl BcSolver {
    pub fn new(grid: &Grid) -> Result<Self> {
        let d = grid.deriv_matrix();
        let n = grid.degree();
        let matrix = [[d[[0, 0]], d[[0, n]]], [d[[n, 0]], d[[n, n]]]];
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        let scale = matrix.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
            return Err(Error::Config(format!(
                "singular boundary system (det = {det:e})"
            )));
        }
        let inverse = [
            [matrix[1][1] / det, -matrix[0][1] / det],
            [-matrix[1][0] / det, matrix[0][0] / det],
        ];
        Ok(Self {
            matrix,
            inverse,
            first_row: d.row(0).to_vec(),
            last_row: d.row(n).to_vec(),
        })
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    pub fn len(&self) -> usize {
        self.first_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_row.is_empty()
    }

    /// Overwrites `u[0]` and `u[N]` from the interior values.
    pub fn enforce(&self, u: &mut [f64]) -> Result<()> {
        check_len(self.len(), u.len())?;
        let n = u.len() - 1;
        let interior = &u[1..n];
        let r0: f64 = -self.first_row[1..n].iter().zip(interior).map(|(a, b)| a * b).sum::<f64>();
        let r1: f64 = -self.last_row[1..n].iter().zip(interior).map(|(a, b)| a * b).sum::<f64>();
        u[0] = self.inverse[0][0] * r0 + self.inverse[0][1] * r1;
        u[n] = self.inverse[1][0] * r0 + self.inverse[1][1] * r1;
        Ok(())
    }

    /// `max(|(D u)_0|, |(D u)_N|)`.
    pub fn residual(&self, u: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        let d0: f64 = self.first_row.iter().zip(u).map(|(a, b)| a * b).sum();
        let dn: f64 = self.last_row.iter().zip(u).map(|(a, b)| a * b).sum();
        Ok(d0.abs().max(dn.abs()))
    }
}

/// Read-only hook called at the configured stride during [`evolve`].
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, u: &[f64], v: &[f64]) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(usize, f64, &[f64], &[f64]) -> Result<()>,
{
    fn observe(&mut self, step: usize, t: f64, u: &[f64], v: &[f64]) -> Result<()> {
        self(step, t, u, v)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Config(format!("time step must be finite and nonzero, got {dt}")));
    }
    Ok(())
}

/// One Störmer–Verlet step reusing the acceleration `accel = a(s.u)`.
///
/// Returns the new state and `a(u_new)`.
pub fn step_with<S: SecondOrderSystem + ?Sized>(
    system: &S,
    bc: Option<&BcSolver>,
    s: &State,
    accel: &[f64],
    dt: f64,
) -> Result<(State, Field)> {
    check_dt(dt)?;
    check_len(system.dimension(), s.u.len())?;
    check_len(system.dimension(), s.v.len())?;
    check_len(system.dimension(), accel.len())?;
    let half = 0.5 * dt;
    let mut u: Field = s
        .u
        .iter()
        .zip(&s.v)
        .zip(accel)
        .map(|((u, v), a)| u + dt * (v + half * a))
        .collect();
    if let Some(bc) = bc {
        bc.enforce(&mut u)?;
    }
    let next = system.acceleration(&u)?;
    let mut v: Field = s
        .v
        .iter()
        .zip(accel)
        .zip(&next)
        .map(|((v, a0), a1)| v + half * (a0 + a1))
        .collect();
    if let Some(bc) = bc {
        bc.enforce(&mut v)?;
    }
    let step = s.step + 1;
    let state = State {
        u,
        v,
        t: step as f64 * dt,
        step,
    };
    if !state.is_finite() {
        return Err(Error::Divergence { step, t: state.t });
    }
    Ok((state, next))
}

/// One Störmer–Verlet step (two acceleration evaluations).
pub fn step<S: SecondOrderSystem + ?Sized>(
    system: &S,
    bc: Option<&BcSolver>,
    s: &State,
    dt: f64,
) -> Result<State> {
    let accel = system.acceleration(&s.u)?;
    step_with(system, bc, s, &accel, dt).map(|(state, _)| state)
}

/// Advances `n_steps` steps, calling each observer at step 0, every
/// `stride` steps, and at the final step.
pub fn evolve<S: SecondOrderSystem + ?Sized>(
    system: &S,
    bc: Option<&BcSolver>,
    s0: State,
    dt: f64,
    n_steps: usize,
    stride: usize,
    observers: &mut [&mut dyn Observer],
) -> Result<State> {
    check_dt(dt)?;
    let stride = stride.max(1);
    let start = s0.step;
    for obs in observers.iter_mut() {
        obs.observe(s0.step, s0.t, &s0.u, &s0.v)?;
    }
    if n_steps == 0 {
        return Ok(s0);
    }
    let mut state = s0;
    let mut accel = system.acceleration(&state.u)?;
    for k in 1..=n_steps {
        let (next, a) = step_with(system, bc, &state, &accel, dt)?;
        state = next;
        accel = a;
        if k % stride == 0 || k == n_steps {
            for obs in observers.iter_mut() {
                obs.observe(state.step, state.t, &state.u, &state.v)?;
            }
        }
    }
    debug_assert_eq!(state.step, start + n_steps);
    Ok(state)
}

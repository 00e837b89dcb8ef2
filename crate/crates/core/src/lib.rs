//! Solvers for the peridynamic (nonlocal) Sine-Gordon equation
//!
//! ```text
//! u_tt = L u - sin u,    L u(x) = int_{B_delta(x)} (u(x') - u(x)) |x - x'|^{-(1+2 alpha)} dx'
//! ```
//!
//! with homogeneous Neumann conditions, discretized by Chebyshev–Gauss–Lobatto
//! collocation in space and Störmer–Verlet in time. A uniform-grid
//! finite-difference solver is included as an independent comparator.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod kernel;
pub mod reference;
pub mod scenarios;
pub mod transform;

pub use error::{Error, Result};

/// Real values sampled at grid nodes.
pub type Field = Vec<f64>;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use psg_core::dynamics::{DynamicsSpec, ModelKind, SecondOrderSystem, SemiDiscrete};
use psg_core::grid::Grid;
use psg_core::integrator::{evolve, step, BcSolver, State};
use psg_core::kernel::{apply_l_quadrature, KernelSpec, KernelTable, SignConvention};
use psg_core::scenarios::{initial_condition, ScenarioSpec};
use psg_core::transform::ChebTransform;
use psg_core::{Field, Result};

fn nonlocal_system(n: usize, model: ModelKind) -> SemiDiscrete {
    let grid = Grid::new(n, -1.0, 1.0).unwrap();
    let kernel = KernelSpec::new(0.4, 0.2, grid.min_spacing()).unwrap();
    SemiDiscrete::new(DynamicsSpec::nonlocal(model, kernel, SignConvention::Diffusive), grid).unwrap()
}

fn run(system: &dyn SecondOrderSystem, bc: Option<&BcSolver>, s: State, dt: f64, steps: usize) -> State {
    evolve(system, bc, s, dt, steps, steps, &mut []).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn reversible_on_the_nonlinear_system() {
    for (model, bc) in [(ModelKind::NonlocalQuadrature, false), (ModelKind::NonlocalQuadrature, true), (ModelKind::ClassicalLocal, false)] {
        let system = if model == ModelKind::ClassicalLocal {
            SemiDiscrete::new(DynamicsSpec::classical(1.0), Grid::new(24, -1.0, 1.0).unwrap()).unwrap()
        } else {
            nonlocal_system(24, model)
        };
        let solver = BcSolver::new(system.grid()).unwrap();
        let bc = bc.then_some(&solver);
        let (mut u0, mut v0) = initial_condition(&ScenarioSpec::Kink { c: 0.5 }, system.grid()).unwrap();
        if let Some(bc) = bc {
            bc.enforce(&mut u0).unwrap();
            bc.enforce(&mut v0).unwrap();
        }
        let s0 = State::new(u0.clone(), v0.clone()).unwrap();
        let dt = 1e-4;
        let forward = run(&system, bc, s0, dt, 100);
        let back = run(&system, bc, State::new(forward.u, forward.v.iter().map(|v| -v).collect()).unwrap(), dt, 100);
        let du = max_diff(&back.u, &u0);
        let dv = back.v.iter().zip(&v0).map(|(b, v)| (b + v).abs()).fold(0.0, f64::max);
        assert!(du <= 1e-10 && dv <= 1e-10, "{model} bc={}: {du:e} {dv:e}", bc.is_some());
    }
}

#[test]
fn equilibria_are_fixed_points() {
    let system = nonlocal_system(32, ModelKind::NonlocalQuadrature);
    let rest = run(&system, None, State::new(vec![0.0; 33], vec![0.0; 33]).unwrap(), 0.01, 500);
    assert!(rest.u.iter().chain(&rest.v).all(|v| *v == 0.0));
    // multiples of 2 pi hold up to the rounding of sin(2 pi m)
    for m in [1.0, -3.0] {
        let u0 = vec![2.0 * std::f64::consts::PI * m; 33];
        let end = run(&system, None, State::new(u0.clone(), vec![0.0; 33]).unwrap(), 0.01, 500);
        assert!(max_diff(&end.u, &u0) < 1e-12);
    }
}

#[test]
fn boundary_constraint_holds_at_every_step() {
    let system = nonlocal_system(48, ModelKind::NonlocalQuadrature);
    let bc = BcSolver::new(system.grid()).unwrap();
    let (mut u, mut v) = initial_condition(&ScenarioSpec::FlatImpulse { c: 0.9 }, system.grid()).unwrap();
    bc.enforce(&mut u).unwrap();
    bc.enforce(&mut v).unwrap();
    let mut s = State::new(u, v).unwrap();
    for _ in 0..50 {
        s = step(&system, Some(&bc), &s, 1e-3).unwrap();
        assert!(bc.residual(&s.u).unwrap() < 1e-9);
        assert!(bc.residual(&s.v).unwrap() < 1e-9);
    }
}

/// `u'' = M u`, the nonlocal operator linearized about zero (`sin u ~ u`).
struct Linear(DMatrix<f64>);

impl SecondOrderSystem for Linear {
    fn dimension(&self) -> usize {
        self.0.nrows()
    }

    fn acceleration(&self, u: &[f64]) -> Result<Field> {
        Ok((&self.0 * DVector::from_column_slice(u)).iter().copied().collect())
    }
}

#[test]
fn second_order_against_eigen_decomposition() {
    let n = 16;
    let grid = Grid::new(n, -1.0, 1.0).unwrap();
    let spec = KernelSpec::new(0.4, 0.2, grid.min_spacing()).unwrap();
    let table = KernelTable::new(spec, &grid, &ChebTransform::new(n).unwrap()).unwrap();
    let size = n + 1;
    let mut m = DMatrix::zeros(size, size);
    for j in 0..size {
        let mut e = vec![0.0; size];
        e[j] = 1.0;
        let col = apply_l_quadrature(&table, &e, SignConvention::Diffusive).unwrap();
        for (i, c) in col.iter().enumerate() {
            m[(i, j)] = c - if i == j { 1.0 } else { 0.0 };
        }
    }
    // W^{1/2} M W^{-1/2} is symmetric because tau_h P_hj is
    let w: Vec<f64> = table.node_weights().iter().map(|t| t.sqrt()).collect();
    let s = DMatrix::from_fn(size, size, |i, j| w[i] * m[(i, j)] / w[j]);
    assert!((&s - s.transpose()).abs().max() < 1e-10 * s.abs().max());
    let eig = SymmetricEigen::new(s);
    assert!(eig.eigenvalues.iter().all(|l| *l < 0.0));

    let u0: Vec<f64> = grid.nodes().iter().map(|x| 0.3 * (-(x * x) * 8.0).exp()).collect();
    let v0: Vec<f64> = grid.nodes().iter().map(|x| 0.1 * x).collect();
    let t_final = 1.0;
    let exact: Vec<f64> = {
        let q = &eig.eigenvectors;
        let z0 = q.transpose() * DVector::from_iterator(size, u0.iter().zip(&w).map(|(u, w)| u * w));
        let zv = q.transpose() * DVector::from_iterator(size, v0.iter().zip(&w).map(|(v, w)| v * w));
        let zt = DVector::from_iterator(
            size,
            (0..size).map(|k| {
                let om = (-eig.eigenvalues[k]).sqrt();
                z0[k] * (om * t_final).cos() + zv[k] * (om * t_final).sin() / om
            }),
        );
        (q * zt).iter().zip(&w).map(|(z, w)| z / w).collect()
    };

    let system = Linear(m);
    let errors: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&steps| {
            let end = run(&system, None, State::new(u0.clone(), v0.clone()).unwrap(), t_final / steps as f64, steps);
            max_diff(&end.u, &exact)
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 4.0).abs() <= 0.8, "errors {errors:?}");
    }
}

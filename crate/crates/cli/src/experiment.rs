//! The five experiment drivers. Each returns a report struct (used by the
//! tests) and writes its data files under the configured output directory.

use std::fmt::Write as _;
use std::path::Path;

use psg_core::analysis::{
    energy, energy_classical, energy_clenshaw_curtis, relative_l2_error, relative_l2_error_sqrt,
    EnergyBreakdown, ErrorReport,
};
use psg_core::dynamics::{DynamicsSpec, ModelKind, SemiDiscrete};
use psg_core::grid::Grid;
use psg_core::integrator::{evolve, BcSolver, State};
use psg_core::reference::{fd_evolve, FdGrid, FdModel};
use psg_core::scenarios::{initial_condition, sample};
use psg_core::Field;
use rayon::prelude::*;

use crate::config::{EnergyQuadrature, RunConfig};
use crate::error::CliError;
use crate::output::{self, write_energy, write_snapshot, write_text, Table};
use crate::plot::{line_plot, Series};

/// Progress reporting for one invocation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ctx {
    pub quiet: bool,
}

impl Ctx {
    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn build_system(cfg: &RunConfig, model: ModelKind, n: usize, delta: f64) -> Result<SemiDiscrete, CliError> {
    let grid = Grid::new(n, cfg.a, cfg.b)?;
    let spec = match model {
        ModelKind::ClassicalLocal => DynamicsSpec::classical(cfg.wave_speed),
        m => DynamicsSpec::nonlocal(m, cfg.kernel_for(delta, grid.min_spacing())?, cfg.sign),
    };
    Ok(SemiDiscrete::new(spec, grid)?)
}

/// Initial state with the boundary solve applied to `u0` and `v0`.
pub fn initial_state(cfg: &RunConfig, grid: &Grid, bc: &BcSolver) -> Result<State, CliError> {
    let (mut u, mut v) = initial_condition(&cfg.scenario, grid)?;
    bc.enforce(&mut u)?;
    bc.enforce(&mut v)?;
    Ok(State::new(u, v)?)
}

/// Integrates `cfg.steps` output steps (each split into `cfg.substeps`
/// Verlet steps), calling `on_output(output_step, t, u, v)` at step 0,
/// every `cfg.stride` output steps, and at the end.
pub fn integrate<F>(cfg: &RunConfig, system: &SemiDiscrete, mut on_output: F) -> Result<State, CliError>
where
    F: FnMut(usize, f64, &[f64], &[f64]) -> Result<(), CliError>,
{
    let bc = BcSolver::new(system.grid())?;
    let s0 = initial_state(cfg, system.grid(), &bc)?;
    let sub = cfg.substeps;
    let dt = cfg.dt() / sub as f64;
    // the core observer cannot carry I/O errors; park the first one here
    let mut failure: Option<CliError> = None;
    let mut observer = |step: usize, t: f64, u: &[f64], v: &[f64]| -> psg_core::Result<()> {
        on_output(step / sub, t, u, v).map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            psg_core::Error::Domain(msg)
        })
    };
    let result = evolve(system, Some(&bc), s0, dt, cfg.steps * sub, cfg.stride * sub, &mut [&mut observer]);
    match (result, failure) {
        (_, Some(e)) => Err(e),
        (r, None) => Ok(r?),
    }
}

pub fn energy_of(cfg: &RunConfig, system: &SemiDiscrete, s: &State) -> Result<EnergyBreakdown, CliError> {
    let grid = system.grid();
    Ok(match system.table() {
        None => energy_classical(grid, system.spec().wave_speed, s)?,
        Some(table) => match cfg.energy_quadrature {
            EnergyQuadrature::Trapezoid => energy(grid, table, s)?,
            EnergyQuadrature::ClenshawCurtis => energy_clenshaw_curtis(grid, table, s)?,
        },
    })
}

fn state_at(t: f64, u: &[f64], v: &[f64]) -> State {
    State {
        u: u.to_vec(),
        v: v.to_vec(),
        t,
        step: 0,
    }
}

fn fd_model(cfg: &RunConfig, grid: &FdGrid) -> Result<FdModel, CliError> {
    Ok(match cfg.model {
        ModelKind::ClassicalLocal => FdModel::ClassicalLocal {
            wave_speed: cfg.wave_speed,
        },
        _ => FdModel::Nonlocal {
            kernel: cfg.kernel_for(cfg.delta, grid.spacing())?,
            sign: cfg.sign,
        },
    })
}

/// Finite-difference run with `m` intervals at the configured time step.
pub fn fd_run(cfg: &RunConfig, m: usize) -> Result<(FdGrid, Field), CliError> {
    let grid = FdGrid::new(m, cfg.a, cfg.b)?;
    let (u0, v0) = sample(&cfg.scenario, grid.nodes())?;
    let model = fd_model(cfg, &grid)?;
    let sub = cfg.substeps;
    let u = fd_evolve(&grid, &model, &u0, &v0, cfg.dt() / sub as f64, cfg.steps * sub)?;
    Ok((grid, u))
}

/// Spectral run of `cfg.model` at degree `n`; returns the final state.
pub fn spectral_run(cfg: &RunConfig, model: ModelKind, n: usize, delta: f64) -> Result<(Grid, State), CliError> {
    let system = build_system(cfg, model, n, delta)?;
    let s = integrate(cfg, &system, |_, _, _, _| Ok(()))?;
    Ok((system.grid().clone(), s))
}

fn write_config(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    output::ensure_dir(dir)?;
    write_text(&dir.join("config.toml"), &cfg.to_text())
}

// ---------------------------------------------------------------- run

#[derive(Debug, Clone)]
pub struct RunReport {
    pub final_state: State,
    pub energy: Vec<(f64, EnergyBreakdown)>,
    pub snapshots: usize,
}

pub fn cmd_run(cfg: &RunConfig, ctx: &Ctx) -> Result<RunReport, CliError> {
    let dir = &cfg.out_dir;
    write_config(dir, cfg)?;
    ctx.note(format!("run: {} on n = {}, {} steps of {:e}", cfg.model, cfg.n, cfg.steps, cfg.dt()));
    let system = build_system(cfg, cfg.model, cfg.n, cfg.delta)?;
    let x = system.grid().nodes().to_vec();
    let mut series = Vec::new();
    let mut snapshots = 0;
    let mut first: Option<Field> = None;
    let final_state = integrate(cfg, &system, |step, t, u, v| {
        let path = dir.join("snapshots").join(format!("step_{step:06}.dat"));
        write_snapshot(&path, cfg, t, step, &x, u, v)?;
        snapshots += 1;
        first.get_or_insert_with(|| u.to_vec());
        series.push((t, energy_of(cfg, &system, &state_at(t, u, v))?));
        Ok(())
    })?;
    write_energy(&dir.join("energy.dat"), cfg, &series)?;
    if cfg.plots {
        let u0 = first.unwrap_or_default();
        line_plot(
            &dir.join("profile.svg"),
            "displacement",
            "x",
            "u",
            &[
                Series { label: "t = 0", points: x.iter().copied().zip(u0).collect() },
                Series {
                    label: "final",
                    points: x.iter().copied().zip(final_state.u.iter().copied()).collect(),
                },
            ],
            false,
        )?;
        energy_plot(&dir.join("energy.svg"), &series)?;
    }
    Ok(RunReport {
        final_state,
        energy: series,
        snapshots,
    })
}

fn energy_plot(path: &Path, series: &[(f64, EnergyBreakdown)]) -> Result<(), CliError> {
    let Some((_, e0)) = series.first() else { return Ok(()) };
    let (h0, p0) = (e0.total_hamiltonian(), e0.total_printed());
    let ratio = |f: &dyn Fn(&EnergyBreakdown) -> f64, base: f64| -> Vec<(f64, f64)> {
        series.iter().map(|(t, e)| (*t, f(e) / base)).collect()
    };
    line_plot(
        path,
        "energy relative to t = 0",
        "t",
        "E(t) / E(0)",
        &[
            Series { label: "hamiltonian", points: ratio(&|e| e.total_hamiltonian(), h0) },
            Series { label: "printed signs", points: ratio(&|e| e.total_printed(), p0) },
        ],
        false,
    )
}

// ----------------------------------------------------------- validate

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateReport {
    pub fd_intervals: usize,
    /// Ratio of squared sums over nodes `1..`.
    pub rel_l2: f64,
    pub rel_l2_sqrt: f64,
    pub max_abs: f64,
}

pub fn cmd_validate(cfg: &RunConfig, ctx: &Ctx) -> Result<ValidateReport, CliError> {
    let dir = &cfg.out_dir;
    write_config(dir, cfg)?;
    let m = cfg.fd_intervals.unwrap_or(cfg.n);
    ctx.note(format!("validate: {} n = {} against FD m = {m}, t = {}", cfg.model, cfg.n, cfg.t_final));
    let (spec, fd) = rayon::join(
        || spectral_run(cfg, cfg.model, cfg.n, cfg.delta),
        || fd_run(cfg, m),
    );
    let ((grid, s), (fgrid, ufd)) = (spec?, fd?);
    let on_fd = grid.interpolate_many(&s.u, fgrid.nodes())?;
    let report = ValidateReport {
        fd_intervals: m,
        rel_l2: relative_l2_error(&on_fd, &ufd)?,
        rel_l2_sqrt: relative_l2_error_sqrt(&on_fd, &ufd)?,
        max_abs: on_fd.iter().zip(&ufd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
    };
    let mut table = Table::create(&dir.join("overlay.dat"), "overlay", cfg, &[], &["x", "u_fd", "u_spectral"])?;
    for ((x, a), b) in fgrid.nodes().iter().zip(&ufd).zip(&on_fd) {
        table.row(&[*x, *a, *b])?;
    }
    table.finish()?;
    write_text(
        &dir.join("report.txt"),
        &format!(
            "fd_intervals = {}\nrel_l2 = {:.16e}\nrel_l2_sqrt = {:.16e}\nmax_abs = {:.16e}\n",
            report.fd_intervals, report.rel_l2, report.rel_l2_sqrt, report.max_abs
        ),
    )?;
    if cfg.plots {
        line_plot(
            &dir.join("overlay.svg"),
            "spectral vs finite difference",
            "x",
            "u",
            &[
                Series { label: "finite difference", points: fgrid.nodes().iter().copied().zip(ufd.iter().copied()).collect() },
                Series { label: "spectral", points: fgrid.nodes().iter().copied().zip(on_fd.iter().copied()).collect() },
            ],
            false,
        )?;
    }
    Ok(report)
}

// ----------------------------------------------------------- converge

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeReport {
    pub reference: usize,
    pub fd: ErrorReport,
    pub cheb: ErrorReport,
}

enum Job {
    Fd(usize),
    Cheb(usize),
}

enum Done {
    Fd(usize, FdGrid, Field),
    Cheb(usize, Grid, State),
}

pub fn cmd_converge(cfg: &RunConfig, ctx: &Ctx) -> Result<ConvergeReport, CliError> {
    let dir = &cfg.out_dir;
    write_config(dir, cfg)?;
    let mref = cfg.reference;
    if let Some(n) = cfg.resolutions.iter().find(|&&n| mref % n != 0) {
        return Err(CliError::Config(format!(
            "converge.resolutions: {n} does not divide the reference interval count {mref}"
        )));
    }
    ctx.note(format!(
        "converge: FD reference m = {mref}, resolutions {:?}, Chebyshev model {}",
        cfg.resolutions, cfg.model
    ));
    let mut jobs = vec![Job::Fd(mref)];
    for &n in &cfg.resolutions {
        jobs.push(Job::Fd(n));
        jobs.push(Job::Cheb(n));
    }
    let done: Vec<Done> = jobs
        .into_par_iter()
        .map(|job| match job {
            Job::Fd(m) => fd_run(cfg, m).map(|(g, u)| Done::Fd(m, g, u)),
            Job::Cheb(n) => spectral_run(cfg, cfg.model, n, cfg.delta).map(|(g, s)| Done::Cheb(n, g, s)),
        })
        .collect::<Result<_, _>>()?;

    let mut iter = done.into_iter();
    let Some(Done::Fd(_, rgrid, uref)) = iter.next() else {
        unreachable!("the reference job is queued first")
    };
    let (mut fd_err, mut cheb_err) = (Vec::new(), Vec::new());
    for d in iter {
        match d {
            Done::Fd(m, g, u) => {
                let stride = mref / m;
                let sub: Field = (0..=m).map(|i| uref[i * stride]).collect();
                fd_err.push(relative_l2_error(&u, &sub)?);
                write_profile(&dir.join("runs").join(format!("fd_{m:05}.dat")), cfg, g.nodes(), &u)?;
            }
            Done::Cheb(n, g, s) => {
                let on_ref = g.interpolate_many(&s.u, rgrid.nodes())?;
                cheb_err.push(relative_l2_error(&on_ref, &uref)?);
                write_profile(&dir.join("runs").join(format!("cheb_{n:05}.dat")), cfg, g.nodes(), &s.u)?;
            }
        }
    }
    write_profile(&dir.join("runs").join(format!("reference_fd_{mref:05}.dat")), cfg, rgrid.nodes(), &uref)?;
    let fd = ErrorReport::new(cfg.resolutions.clone(), fd_err)?;
    let cheb = ErrorReport::new(cfg.resolutions.clone(), cheb_err)?;

    let mut table = Table::create(
        &dir.join("table.dat"),
        "convergence",
        cfg,
        &[
            format!("fd fitted rate = {:.6} (residual {:.3e})", fd.rate, fd.residual),
            format!("chebyshev fitted rate = {:.6} (residual {:.3e})", cheb.rate, cheb.residual),
        ],
        &["n", "fd_error", "fd_rate", "cheb_error", "cheb_rate"],
    )?;
    for (i, &n) in fd.resolutions.iter().enumerate() {
        let rate = |r: &ErrorReport| if i == 0 { f64::NAN } else { r.pairwise[i - 1] };
        table.row(&[n as f64, fd.errors[i], rate(&fd), cheb.errors[i], rate(&cheb)])?;
    }
    table.finish()?;
    if cfg.plots {
        let pts = |r: &ErrorReport| r.resolutions.iter().map(|&n| n as f64).zip(r.errors.iter().copied()).collect();
        line_plot(
            &dir.join("convergence.svg"),
            "relative error against the reference",
            "N",
            "error",
            &[
                Series { label: "finite difference", points: pts(&fd) },
                Series { label: "Chebyshev", points: pts(&cheb) },
            ],
            true,
        )?;
    }
    Ok(ConvergeReport { reference: mref, fd, cheb })
}

fn write_profile(path: &Path, cfg: &RunConfig, x: &[f64], u: &[f64]) -> Result<(), CliError> {
    let mut table = Table::create(path, "profile", cfg, &[format!("t = {:.16e}", cfg.t_final)], &["x", "u"])?;
    for (x, u) in x.iter().zip(u) {
        table.row(&[*x, *u])?;
    }
    table.finish()
}

/// Fixed-width rendering of a convergence report.
pub fn format_converge(r: &ConvergeReport) -> String {
    let mut s = format!("{:>6} {:>12} {:>8} {:>12} {:>8}\n", "N", "FD error", "rate", "Cheb error", "rate");
    for (i, n) in r.fd.resolutions.iter().enumerate() {
        let rate = |e: &ErrorReport| if i == 0 { "-".to_string() } else { format!("{:.4}", e.pairwise[i - 1]) };
        let _ = writeln!(
            s,
            "{n:>6} {:>12.4e} {:>8} {:>12.4e} {:>8}",
            r.fd.errors[i],
            rate(&r.fd),
            r.cheb.errors[i],
            rate(&r.cheb)
        );
    }
    let _ = writeln!(s, "fitted rate: FD {:.4}, Chebyshev {:.4}", r.fd.rate, r.cheb.rate);
    s
}

// ------------------------------------------------------------- energy

#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub series: Vec<(f64, EnergyBreakdown)>,
    /// `max |E(t)/E(0) - 1|` of the Hamiltonian total.
    pub peak_deviation: f64,
    pub peak_deviation_printed: f64,
    /// Interior extrema of the Hamiltonian deviation series.
    pub turning_points: usize,
}

pub fn cmd_energy(cfg: &RunConfig, ctx: &Ctx) -> Result<EnergyReport, CliError> {
    let dir = &cfg.out_dir;
    write_config(dir, cfg)?;
    ctx.note(format!("energy: {} on n = {}, dt = {:e}, T = {}", cfg.model, cfg.n, cfg.dt(), cfg.t_final));
    let system = build_system(cfg, cfg.model, cfg.n, cfg.delta)?;
    let mut series = Vec::new();
    integrate(cfg, &system, |_, t, u, v| {
        series.push((t, energy_of(cfg, &system, &state_at(t, u, v))?));
        Ok(())
    })?;
    write_energy(&dir.join("energy.dat"), cfg, &series)?;
    let (h0, p0) = (series[0].1.total_hamiltonian(), series[0].1.total_printed());
    let mut ratio = Table::create(
        &dir.join("energy_ratio.dat"),
        "energy-ratio",
        cfg,
        &[],
        &["t", "printed_over_initial", "hamiltonian_over_initial"],
    )?;
    for (t, e) in &series {
        ratio.row(&[*t, e.total_printed() / p0, e.total_hamiltonian() / h0])?;
    }
    ratio.finish()?;
    let dev: Vec<f64> = series.iter().map(|(_, e)| e.total_hamiltonian() / h0 - 1.0).collect();
    let report = EnergyReport {
        peak_deviation: dev.iter().fold(0.0, |m, d| m.max(d.abs())),
        peak_deviation_printed: series
            .iter()
            .fold(0.0, |m, (_, e)| m.max((e.total_printed() / p0 - 1.0).abs())),
        turning_points: turning_points(&dev),
        series,
    };
    if cfg.plots {
        energy_plot(&dir.join("energy.svg"), &report.series)?;
    }
    Ok(report)
}

/// Number of strict local extrema in the interior of `xs`.
pub fn turning_points(xs: &[f64]) -> usize {
    let diffs: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    diffs.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

// --------------------------------------------------------- dispersive

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveReport {
    /// Square-rooted relative L2 distance nonlocal vs classical, per output time.
    pub series: Vec<(f64, f64)>,
    pub final_distance: f64,
    /// First output time at which either boundary value moved by more than
    /// the arrival threshold: (nonlocal, classical).
    pub arrival: (Option<f64>, Option<f64>),
    /// `(delta, final distance)` for each horizon in `dispersive.deltas`.
    pub sweep: Vec<(f64, f64)>,
}

impl DispersiveReport {
    pub fn arrival_delay(&self) -> Option<f64> {
        match self.arrival {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        }
    }
}

struct Recorded {
    times: Vec<f64>,
    frames: Vec<Field>,
}

fn record(cfg: &RunConfig, system: &SemiDiscrete) -> Result<Recorded, CliError> {
    let mut rec = Recorded { times: Vec::new(), frames: Vec::new() };
    integrate(cfg, system, |_, t, u, _| {
        rec.times.push(t);
        rec.frames.push(u.to_vec());
        Ok(())
    })?;
    Ok(rec)
}

fn arrival_time(rec: &Recorded, threshold: f64) -> Option<f64> {
    let first = rec.frames.first()?;
    let last = first.len() - 1;
    rec.times.iter().zip(&rec.frames).find_map(|(t, u)| {
        let moved = (u[0] - first[0]).abs().max((u[last] - first[last]).abs());
        (moved > threshold).then_some(*t)
    })
}

fn write_spacetime(path: &Path, cfg: &RunConfig, x: &[f64], rec: &Recorded) -> Result<(), CliError> {
    let mut table = Table::create(path, "spacetime", cfg, &[], &["t", "x", "u"])?;
    for (t, u) in rec.times.iter().zip(&rec.frames) {
        for (x, u) in x.iter().zip(u) {
            table.row(&[*t, *x, *u])?;
        }
    }
    table.finish()
}

pub fn cmd_dispersive(cfg: &RunConfig, ctx: &Ctx) -> Result<DispersiveReport, CliError> {
    let dir = &cfg.out_dir;
    write_config(dir, cfg)?;
    if !cfg.model.is_nonlocal() {
        return Err(CliError::Config("model: the dispersive comparison needs a nonlocal model".into()));
    }
    ctx.note(format!(
        "dispersive: {} vs classical on n = {}, delta = {}, sweep {:?}",
        cfg.model, cfg.n, cfg.delta, cfg.deltas
    ));
    let mut deltas = vec![cfg.delta];
    deltas.extend(cfg.deltas.iter().copied());
    let runs: Vec<(Option<f64>, Recorded)> = std::iter::once(None)
        .chain(deltas.iter().map(|d| Some(*d)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|delta| {
            let system = match delta {
                None => build_system(cfg, ModelKind::ClassicalLocal, cfg.n, cfg.delta)?,
                Some(d) => build_system(cfg, cfg.model, cfg.n, d)?,
            };
            record(cfg, &system).map(|r| (delta, r))
        })
        .collect::<Result<_, CliError>>()?;
    let classical = &runs[0].1;
    let nonlocal = &runs[1].1;
    let distance = |a: &Field, b: &Field| relative_l2_error_sqrt(a, b);
    let series: Vec<(f64, f64)> = nonlocal
        .times
        .iter()
        .zip(nonlocal.frames.iter().zip(&classical.frames))
        .map(|(t, (a, b))| Ok((*t, distance(a, b)?)))
        .collect::<Result<_, psg_core::Error>>()?;
    let final_of = |r: &Recorded| distance(r.frames.last().expect("frames"), classical.frames.last().expect("frames"));
    let sweep: Vec<(f64, f64)> = runs[2..]
        .iter()
        .map(|(d, r)| Ok((d.expect("nonlocal run"), final_of(r)?)))
        .collect::<Result<_, psg_core::Error>>()?;
    let report = DispersiveReport {
        final_distance: final_of(nonlocal)?,
        arrival: (
            arrival_time(nonlocal, cfg.arrival_threshold),
            arrival_time(classical, cfg.arrival_threshold),
        ),
        series,
        sweep,
    };

    let x = Grid::new(cfg.n, cfg.a, cfg.b)?.nodes().to_vec();
    write_spacetime(&dir.join("nonlocal.dat"), cfg, &x, nonlocal)?;
    write_spacetime(&dir.join("classical.dat"), cfg, &x, classical)?;
    let mut div = Table::create(&dir.join("divergence.dat"), "divergence", cfg, &[], &["t", "distance"])?;
    for (t, d) in &report.series {
        div.row(&[*t, *d])?;
    }
    div.finish()?;
    let mut sw = Table::create(&dir.join("delta_sweep.dat"), "delta-sweep", cfg, &[], &["delta", "distance"])?;
    for (d, v) in &report.sweep {
        sw.row(&[*d, *v])?;
    }
    sw.finish()?;
    let fmt_t = |t: Option<f64>| t.map_or("none".to_string(), |t| format!("{t:.16e}"));
    write_text(
        &dir.join("arrival.txt"),
        &format!(
            "threshold = {}\nnonlocal = {}\nclassical = {}\ndelay = {}\n",
            cfg.arrival_threshold,
            fmt_t(report.arrival.0),
            fmt_t(report.arrival.1),
            fmt_t(report.arrival_delay()),
        ),
    )?;
    if cfg.plots {
        let last = |r: &Recorded| x.iter().copied().zip(r.frames.last().expect("frames").iter().copied()).collect();
        line_plot(
            &dir.join("final_profiles.svg"),
            "final displacement",
            "x",
            "u",
            &[
                Series { label: "nonlocal", points: last(nonlocal) },
                Series { label: "classical", points: last(classical) },
            ],
            false,
        )?;
        line_plot(
            &dir.join("divergence.svg"),
            "nonlocal vs classical",
            "t",
            "relative L2 distance",
            &[Series { label: "distance", points: report.series.clone() }],
            false,
        )?;
    }
    Ok(report)
}

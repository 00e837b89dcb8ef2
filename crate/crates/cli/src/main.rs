use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psg_cli::experiment::{self, format_converge, Ctx};
use psg_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "psg", version, about = "Peridynamic Sine-Gordon experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one trajectory, writing snapshots and the energy series
    Run(Common),
    /// Compare the spectral solver against the finite-difference solver
    Validate(Common),
    /// Error table against a fine finite-difference reference
    Converge(Common),
    /// Energy history relative to its initial value
    Energy(Common),
    /// Nonlocal vs classical dynamics on the same grid
    Dispersive(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file (flat dotted keys)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value, applied after the file; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output stride in time steps (overrides output.stride)
    #[arg(long)]
    stride: Option<usize>,
    /// Suppress progress messages
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut overrides = self.overrides.clone();
        if let Some(out) = &self.out {
            overrides.push(format!("output.dir={:?}", out.display().to_string()));
        }
        if let Some(stride) = self.stride {
            overrides.push(format!("output.stride={stride}"));
        }
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (cmd, common) = match &cli.command {
        Command::Run(c) => ("run", c),
        Command::Validate(c) => ("validate", c),
        Command::Converge(c) => ("converge", c),
        Command::Energy(c) => ("energy", c),
        Command::Dispersive(c) => ("dispersive", c),
    };
    let cfg = common.load()?;
    let ctx = Ctx { quiet: common.quiet };
    match cmd {
        "run" => {
            let r = experiment::cmd_run(&cfg, &ctx)?;
            println!("wrote {} snapshots to {}", r.snapshots, cfg.out_dir.display());
        }
        "validate" => {
            let r = experiment::cmd_validate(&cfg, &ctx)?;
            println!(
                "relative L2 (squared ratio) = {:.4e}, square-rooted = {:.4e}, max |diff| = {:.4e}",
                r.rel_l2, r.rel_l2_sqrt, r.max_abs
            );
        }
        "converge" => print!("{}", format_converge(&experiment::cmd_converge(&cfg, &ctx)?)),
        "energy" => {
            let r = experiment::cmd_energy(&cfg, &ctx)?;
            println!(
                "max |E/E0 - 1| = {:.4e} (hamiltonian), {:.4e} (printed signs); {} turning points",
                r.peak_deviation, r.peak_deviation_printed, r.turning_points
            );
        }
        _ => {
            let r = experiment::cmd_dispersive(&cfg, &ctx)?;
            println!("final distance = {:.4e}", r.final_distance);
            for (d, v) in &r.sweep {
                println!("  delta = {d}: {v:.4e}");
            }
            match r.arrival_delay() {
                Some(d) => println!("boundary arrival delay = {d:.4}"),
                None => println!("boundary arrival delay: not reached"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

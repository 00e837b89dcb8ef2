//! Plain-text data files. Every file starts with `#` header lines: the format
//! version, then the full configuration, then the column names. Floats are
//! written with 17 significant digits so files round-trip exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use psg_core::analysis::EnergyBreakdown;

use crate::config::RunConfig;
use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Tabular data file with a config-echo header.
pub struct Table {
    path: PathBuf,
    out: BufWriter<fs::File>,
    columns: usize,
}

impl Table {
    pub fn create(path: &Path, kind: &str, config: &RunConfig, extra: &[String], columns: &[&str]) -> Result<Self, CliError> {
        if let Some(parent) = path.parent() {
            ensure_dir(parent)?;
        }
        let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
        let mut t = Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            columns: columns.len(),
        };
        let mut head = format!("# psg {kind} format {FORMAT_VERSION}\n");
        for line in config.to_text().lines() {
            head.push_str(&format!("# config {line}\n"));
        }
        for line in extra {
            head.push_str(&format!("# {line}\n"));
        }
        head.push_str(&format!("# {}\n", columns.join(" ")));
        t.write_raw(&head)?;
        Ok(t)
    }

    fn write_raw(&mut self, s: &str) -> Result<(), CliError> {
        let path = &self.path;
        self.out.write_all(s.as_bytes()).map_err(|e| io_err(path, e))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.columns);
        let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        self.write_raw(&(line.join(" ") + "\n"))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        let path = self.path.clone();
        self.out.flush().map_err(|e| io_err(&path, e))
    }
}

/// Snapshot `x u v` at one output time.
pub fn write_snapshot(
    path: &Path,
    config: &RunConfig,
    t: f64,
    step: usize,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<(), CliError> {
    let extra = [format!("t = {t:.16e}"), format!("step = {step}")];
    let mut table = Table::create(path, "snapshot", config, &extra, &["x", "u", "v"])?;
    for ((x, u), v) in x.iter().zip(u).zip(v) {
        table.row(&[*x, *u, *v])?;
    }
    table.finish()
}

pub const ENERGY_COLUMNS: [&str; 6] = [
    "t",
    "kinetic",
    "nonlocal",
    "potential",
    "total_printed",
    "total_hamiltonian",
];

pub fn energy_row(t: f64, e: &EnergyBreakdown) -> [f64; 6] {
    [
        t,
        e.kinetic,
        e.nonlocal,
        e.potential,
        e.total_printed(),
        e.total_hamiltonian(),
    ]
}

pub fn write_energy(path: &Path, config: &RunConfig, series: &[(f64, EnergyBreakdown)]) -> Result<(), CliError> {
    let mut table = Table::create(path, "energy", config, &[], &ENERGY_COLUMNS)?;
    for (t, e) in series {
        table.row(&energy_row(*t, e))?;
    }
    table.finish()
}

/// Free-form report text.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads the numeric rows of a data file written by [`Table`].
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| CliError::Io(format!("{}: bad number '{tok}': {e}", path.display())))
                })
                .collect()
        })
        .collect()
}

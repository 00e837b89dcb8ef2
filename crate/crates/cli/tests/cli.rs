use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psg_cli::output::read_table;

fn psg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psg")).args(args).output().expect("spawn psg")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn snapshot_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&["run", "--quiet", "--out", dir.path().to_str().unwrap(), "--override", "grid.size=10"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.size"));
}

#[test]
fn invalid_value_is_a_config_error() {
    let out = psg(&["run", "--quiet", "--override", "kernel.alpha=1.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel.alpha"));
}

#[test]
fn unreadable_config_is_an_io_error() {
    let out = psg(&["run", "--quiet", "--config", "/nonexistent/experiment.toml"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let target = blocker.join("out");
    let out = psg(&["run", "--quiet", "--out", target.to_str().unwrap(), "--override", "time.steps=1"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn blow_up_is_reported_as_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&[
        "run",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
        "--override",
        "model=classical-local",
        "--override",
        "time.t=100",
        "--override",
        "time.dt=0.5",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn zero_steps_writes_only_the_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&["run", "--quiet", "--out", dir.path().to_str().unwrap(), "--override", "time.steps=0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(snapshot_names(dir.path()), vec!["step_000000.dat"]);
    let energy = read_table(&dir.path().join("energy.dat")).unwrap();
    assert_eq!(energy.len(), 1);
    assert_eq!(energy[0][0], 0.0);
}

#[test]
fn equilibrium_snapshots_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&[
        "run",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
        "--stride",
        "20",
        "--override",
        "scenario.name=\"gaussian\"",
        "--override",
        "scenario.amplitude=0.0",
        "--override",
        "time.steps=100",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let names = snapshot_names(dir.path());
    assert_eq!(names.len(), 6);
    let first = read_table(&dir.path().join("snapshots").join(&names[0])).unwrap();
    assert!(first.iter().all(|row| row[1] == 0.0 && row[2] == 0.0));
    for name in &names[1..] {
        assert_eq!(read_table(&dir.path().join("snapshots").join(name)).unwrap(), first);
    }
}

#[test]
fn validate_reports_small_difference() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&[
        "validate",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
        "--override",
        "grid.n=64",
        "--override",
        "validate.fd_intervals=400",
        "--override",
        "time.t=0.25",
        "--override",
        "time.steps=250",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let rel: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("rel_l2_sqrt = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 2e-2, "{report}");
    assert!(dir.path().join("overlay.dat").exists());
}

#[test]
fn outputs_echo_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out = psg(&["run", "--quiet", "--out", dir.path().to_str().unwrap(), "--override", "time.steps=2"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("snapshots/step_000002.dat")).unwrap();
    assert!(text.starts_with("# psg snapshot format 1\n"));
    assert!(text.contains("# config time.steps = 2\n"));
    assert!(dir.path().join("config.toml").exists());
}

//! Experiment configuration: flat dotted keys (`grid.n = 400`) in a TOML
//! file, overridable from the command line.
//!
//! Every key has a default, so an empty file is a valid (small) experiment.
//! Unknown keys are rejected by name.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use psg_core::dynamics::ModelKind;
use psg_core::kernel::{CutoffPolicy, KernelSpec, SignConvention};
use psg_core::scenarios::ScenarioSpec;
use toml::Value;

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "model",
    "sign",
    "grid.n",
    "grid.a",
    "grid.b",
    "kernel.alpha",
    "kernel.delta",
    "kernel.cutoff",
    "kernel.scale",
    "classical.speed",
    "scenario.name",
    "scenario.c",
    "scenario.w",
    "scenario.amplitude",
    "scenario.width",
    "scenario.center",
    "time.t",
    "time.steps",
    "time.dt",
    "time.substeps",
    "output.dir",
    "output.stride",
    "output.plots",
    "energy.quadrature",
    "validate.fd_intervals",
    "converge.resolutions",
    "converge.reference",
    "dispersive.deltas",
    "dispersive.arrival_threshold",
];

/// Kernel constant: a number, or the value that normalizes the second moment
/// to 2 (so the operator tends to `u_xx` as the horizon shrinks).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelScale {
    Value(f64),
    LocalLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyQuadrature {
    /// Nodal trapezoid weights for every term; exactly the weights under
    /// which the quadrature operator is symmetric.
    Trapezoid,
    /// Clenshaw–Curtis for the kinetic and potential integrals.
    ClenshawCurtis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub sign: SignConvention,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub delta: f64,
    pub cutoff: CutoffPolicy,
    pub scale: KernelScale,
    pub wave_speed: f64,
    pub scenario: ScenarioSpec,
    pub t_final: f64,
    pub steps: usize,
    pub substeps: usize,
    pub out_dir: PathBuf,
    pub stride: usize,
    pub plots: bool,
    pub energy_quadrature: EnergyQuadrature,
    pub fd_intervals: Option<usize>,
    pub resolutions: Vec<usize>,
    pub reference: usize,
    pub deltas: Vec<f64>,
    pub arrival_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::NonlocalQuadrature,
            sign: SignConvention::Diffusive,
            n: 64,
            a: -1.0,
            b: 1.0,
            alpha: 0.4,
            delta: 0.2,
            cutoff: CutoffPolicy::MinSpacing,
            scale: KernelScale::Value(1.0),
            wave_speed: 1.0,
            scenario: ScenarioSpec::Kink { c: 0.999 },
            t_final: 1.0,
            steps: 800,
            substeps: 1,
            out_dir: PathBuf::from("out"),
            stride: 100,
            plots: true,
            energy_quadrature: EnergyQuadrature::Trapezoid,
            fd_intervals: None,
            resolutions: vec![100, 200, 400, 800],
            reference: 1600,
            deltas: Vec::new(),
            arrival_threshold: 0.5,
        }
    }
}

/// Flattened `dotted.key -> value` view of a configuration document.
pub type FlatConfig = BTreeMap<String, Value>;

fn flatten_into(prefix: &str, table: &toml::Table, out: &mut FlatConfig) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten_into(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

pub fn parse_flat(text: &str) -> Result<FlatConfig, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    let mut flat = FlatConfig::new();
    flatten_into("", &table, &mut flat);
    Ok(flat)
}

/// Parses `key=value`; the value is read as a TOML literal, falling back to a
/// bare string (`scenario.name=kink`).
pub fn parse_override(spec: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not of the form key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

fn bad(key: &str, expected: &str, v: &Value) -> CliError {
    CliError::Config(format!("{key}: expected {expected}, got {v}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, "a number", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(bad(key, "a nonnegative integer", v)),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| bad(key, "a string", v))
}

fn as_list<T>(key: &str, v: &Value, f: impl Fn(&str, &Value) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    match v {
        Value::Array(items) => items.iter().map(|item| f(key, item)).collect(),
        _ => Err(bad(key, "an array", v)),
    }
}

fn keyed<T>(key: &str, r: psg_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn from_flat(flat: &FlatConfig) -> Result<Self, CliError> {
        if let Some(unknown) = flat.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown key '{unknown}'")));
        }
        let mut c = Self::default();
        let get = |k: &str| flat.get(k);

        if let Some(v) = get("model") {
            c.model = keyed("model", as_str("model", v)?.parse())?;
        }
        if let Some(v) = get("sign") {
            c.sign = keyed("sign", as_str("sign", v)?.parse())?;
        }
        if let Some(v) = get("grid.n") {
            c.n = as_usize("grid.n", v)?;
        }
        if let Some(v) = get("grid.a") {
            c.a = as_f64("grid.a", v)?;
        }
        if let Some(v) = get("grid.b") {
            c.b = as_f64("grid.b", v)?;
        }
        if let Some(v) = get("kernel.alpha") {
            c.alpha = as_f64("kernel.alpha", v)?;
        }
        if let Some(v) = get("kernel.delta") {
            c.delta = as_f64("kernel.delta", v)?;
        }
        if let Some(v) = get("kernel.cutoff") {
            c.cutoff = match v {
                Value::String(s) if s == "min-spacing" => CutoffPolicy::MinSpacing,
                Value::Float(_) | Value::Integer(_) => CutoffPolicy::Fixed(as_f64("kernel.cutoff", v)?),
                _ => return Err(bad("kernel.cutoff", "\"min-spacing\" or a number", v)),
            };
        }
        if let Some(v) = get("kernel.scale") {
            c.scale = match v {
                Value::String(s) if s == "local-limit" => KernelScale::LocalLimit,
                Value::Float(_) | Value::Integer(_) => KernelScale::Value(as_f64("kernel.scale", v)?),
                _ => return Err(bad("kernel.scale", "\"local-limit\" or a number", v)),
            };
        }
        if let Some(v) = get("classical.speed") {
            c.wave_speed = as_f64("classical.speed", v)?;
        }

        let (mut name, mut sc_c, mut w, mut amp, mut width, mut center) =
            ("kink".to_string(), 0.999, 0.4, 1.0, 0.002, 0.0);
        if let Some(v) = get("scenario.name") {
            name = as_str("scenario.name", v)?.to_string();
        }
        if let Some(v) = get("scenario.c") {
            sc_c = as_f64("scenario.c", v)?;
        }
        if let Some(v) = get("scenario.w") {
            w = as_f64("scenario.w", v)?;
        }
        if let Some(v) = get("scenario.amplitude") {
            amp = as_f64("scenario.amplitude", v)?;
        }
        if let Some(v) = get("scenario.width") {
            width = as_f64("scenario.width", v)?;
        }
        if let Some(v) = get("scenario.center") {
            center = as_f64("scenario.center", v)?;
        }
        c.scenario = ScenarioSpec::from_parts(&name, sc_c, w, amp, width, center)
            .map_err(|e| CliError::Config(format!("scenario: {e}")))?;

        if let Some(v) = get("time.t") {
            c.t_final = as_f64("time.t", v)?;
        }
        match (get("time.steps"), get("time.dt")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "time.steps and time.dt are mutually exclusive; give one".into(),
                ))
            }
            (Some(v), None) => c.steps = as_usize("time.steps", v)?,
            (None, Some(v)) => {
                let dt = as_f64("time.dt", v)?;
                if !(dt > 0.0) {
                    return Err(CliError::Config(format!("time.dt: must be positive, got {dt}")));
                }
                let ratio = c.t_final / dt;
                let steps = ratio.round();
                if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
                    return Err(CliError::Config(format!(
                        "time.dt: T / dt = {ratio} is not an integer step count"
                    )));
                }
                c.steps = steps as usize;
            }
            (None, None) => {}
        }
        if let Some(v) = get("time.substeps") {
            c.substeps = as_usize("time.substeps", v)?;
        }
        if let Some(v) = get("output.dir") {
            c.out_dir = PathBuf::from(as_str("output.dir", v)?);
        }
        if let Some(v) = get("output.stride") {
            c.stride = as_usize("output.stride", v)?;
        }
        if let Some(v) = get("output.plots") {
            c.plots = v.as_bool().ok_or_else(|| bad("output.plots", "a boolean", v))?;
        }
        if let Some(v) = get("energy.quadrature") {
            c.energy_quadrature = match as_str("energy.quadrature", v)? {
                "trapezoid" => EnergyQuadrature::Trapezoid,
                "clenshaw-curtis" => EnergyQuadrature::ClenshawCurtis,
                _ => return Err(bad("energy.quadrature", "trapezoid | clenshaw-curtis", v)),
            };
        }
        if let Some(v) = get("validate.fd_intervals") {
            c.fd_intervals = Some(as_usize("validate.fd_intervals", v)?);
        }
        if let Some(v) = get("converge.resolutions") {
            c.resolutions = as_list("converge.resolutions", v, as_usize)?;
        }
        if let Some(v) = get("converge.reference") {
            c.reference = as_usize("converge.reference", v)?;
        }
        if let Some(v) = get("dispersive.deltas") {
            c.deltas = as_list("dispersive.deltas", v, as_f64)?;
        }
        if let Some(v) = get("dispersive.arrival_threshold") {
            c.arrival_threshold = as_f64("dispersive.arrival_threshold", v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_flat(&parse_flat(text)?)
    }

    /// Reads `path` and applies `key=value` overrides on top of it.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut flat = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                parse_flat(&text)?
            }
            None => FlatConfig::new(),
        };
        for o in overrides {
            let (k, v) = parse_override(o)?;
            // a step count and a time step cannot both be in force
            match k.as_str() {
                "time.steps" => flat.remove("time.dt"),
                "time.dt" => flat.remove("time.steps"),
                _ => None,
            };
            flat.insert(k, v);
        }
        Self::from_flat(&flat)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if self.n < 2 {
            return fail("grid.n", format!("must be at least 2, got {}", self.n));
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return fail("grid.a", format!("need finite a < b, got [{}, {}]", self.a, self.b));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return fail("time.t", format!("must be positive, got {}", self.t_final));
        }
        if self.substeps == 0 {
            return fail("time.substeps", "must be at least 1".into());
        }
        if self.stride == 0 {
            return fail("output.stride", "must be at least 1".into());
        }
        if let CutoffPolicy::Fixed(eps) = self.cutoff {
            if !(eps >= 0.0 && eps < self.delta) {
                return fail("kernel.cutoff", format!("need 0 <= cutoff < delta, got {eps}"));
            }
        }
        if let KernelScale::Value(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return fail("kernel.scale", format!("must be positive, got {s}"));
            }
        }
        keyed("kernel", KernelSpec::new(self.alpha, self.delta, 0.0).map(|_| ()))?;
        if !(self.wave_speed > 0.0 && self.wave_speed.is_finite()) {
            return fail("classical.speed", format!("must be positive, got {}", self.wave_speed));
        }
        if let Some(m) = self.fd_intervals {
            if m < 2 {
                return fail("validate.fd_intervals", format!("must be at least 2, got {m}"));
            }
        }
        if self.resolutions.iter().any(|&n| n < 2) {
            return fail("converge.resolutions", "every resolution must be at least 2".into());
        }
        if self.reference < 2 {
            return fail("converge.reference", format!("must be at least 2, got {}", self.reference));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return fail("dispersive.deltas", format!("horizons must be positive, got {d}"));
        }
        if !(self.arrival_threshold > 0.0) {
            return fail(
                "dispersive.arrival_threshold",
                format!("must be positive, got {}", self.arrival_threshold),
            );
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps.max(1) as f64
    }

    /// Kernel for the configured grid and horizon `delta`.
    pub fn kernel_for(&self, delta: f64, min_spacing: f64) -> psg_core::Result<KernelSpec> {
        let cutoff = self.cutoff.resolve(min_spacing);
        let spec = KernelSpec::new(self.alpha, delta, cutoff)?;
        match self.scale {
            KernelScale::Value(s) => spec.with_scale(s),
            KernelScale::LocalLimit => {
                spec.with_scale(KernelSpec::local_limit_scale(self.alpha, delta, cutoff))
            }
        }
    }

    pub fn to_flat(&self) -> FlatConfig {
        let mut m = FlatConfig::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        let f = Value::Float;
        let i = |n: usize| Value::Integer(n as i64);
        put("model", Value::String(self.model.to_string()));
        put("sign", Value::String(self.sign.to_string()));
        put("grid.n", i(self.n));
        put("grid.a", f(self.a));
        put("grid.b", f(self.b));
        put("kernel.alpha", f(self.alpha));
        put("kernel.delta", f(self.delta));
        put(
            "kernel.cutoff",
            match self.cutoff {
                CutoffPolicy::MinSpacing => Value::String("min-spacing".into()),
                CutoffPolicy::Fixed(e) => f(e),
            },
        );
        put(
            "kernel.scale",
            match self.scale {
                KernelScale::LocalLimit => Value::String("local-limit".into()),
                KernelScale::Value(s) => f(s),
            },
        );
        put("classical.speed", f(self.wave_speed));
        put("scenario.name", Value::String(self.scenario.name().into()));
        match self.scenario {
            ScenarioSpec::Gaussian { amplitude, width, center } => {
                put("scenario.amplitude", f(amplitude));
                put("scenario.width", f(width));
                put("scenario.center", f(center));
            }
            ScenarioSpec::Breather { c, w } => {
                put("scenario.c", f(c));
                put("scenario.w", f(w));
            }
            other => put("scenario.c", f(other.velocity().unwrap_or(0.0))),
        }
        put("time.t", f(self.t_final));
        put("time.steps", i(self.steps));
        put("time.substeps", i(self.substeps));
        put("output.dir", Value::String(self.out_dir.display().to_string()));
        put("output.stride", i(self.stride));
        put("output.plots", Value::Boolean(self.plots));
        put(
            "energy.quadrature",
            Value::String(
                match self.energy_quadrature {
                    EnergyQuadrature::Trapezoid => "trapezoid",
                    EnergyQuadrature::ClenshawCurtis => "clenshaw-curtis",
                }
                .into(),
            ),
        );
        if let Some(mf) = self.fd_intervals {
            put("validate.fd_intervals", i(mf));
        }
        put(
            "converge.resolutions",
            Value::Array(self.resolutions.iter().map(|&n| i(n)).collect()),
        );
        put("converge.reference", i(self.reference));
        put("dispersive.deltas", Value::Array(self.deltas.iter().map(|&d| f(d)).collect()));
        put("dispersive.arrival_threshold", f(self.arrival_threshold));
        m
    }

    /// One `key = value` line per key, sorted; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_flat() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

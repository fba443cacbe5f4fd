//! TOML run configuration.
//!
//! ```toml
//! n = 32
//! viscosity = 1.0          # μ1, required
//! diffusivity = 1.0        # μ2, required
//! seed = 7
//! output = "runs/demo"
//!
//! [data]
//! kind = "large-data"      # or "checkpoint" with `path = "..."`
//! rho_min = 1.5
//! rho_max = 2.5
//! amplitude = 1.0
//! stream = "deterministic" # or "seeded" (uses the top-level seed)
//! m = 8
//!
//! [integrator]
//! dt = 0.005               # required
//! t_end = 1.0              # required
//! scheme = "if-rk2"
//! cfl_safety = 0.5
//! snapshot_every = 10
//!
//! [[monitor]]
//! field = "W-"
//! s = -0.5
//! p = 6.0
//! r = 1.0
//!
//! [conditions]
//! p = 6.0
//! r = 1.0
//! C = 1.0
//! eta = 0.01
//! epsilon = 0.5
//! epsilon0 = 0.05
//! C1 = 1.0
//! C2 = 1.0
//! c = 1.0
//! # b = 2.0               # χ bootstrap threshold, see `chi_threshold`
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial_data::StreamSpec;
use crate::monitor::{check_epsilon_r, chi_feasibility, BesovConstants};
use crate::solver::{IntegratorParams, MonitoredField, Scheme, Viscosities};
use crate::spaces::{BesovParams, Exponent};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamKind {
    #[default]
    Deterministic,
    Seeded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataConfig {
    LargeData {
        rho_min: f64,
        rho_max: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        stream: StreamKind,
        m: u32,
    },
    /// Six-component checkpoint holding `u` then `B`.
    Checkpoint { path: String },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_every")]
    pub snapshot_every: u64,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_every() -> u64 {
    10
}

impl IntegratorConfig {
    pub fn params(&self) -> IntegratorParams {
        IntegratorParams {
            dt: self.dt,
            scheme: self.scheme,
            cfl_safety: self.cfl_safety,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
        }
    }
}

/// One monitored Besov norm `‖field‖_{Ḃ^s_{p,r}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSpec {
    pub field: MonitoredField,
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl MonitorSpec {
    pub fn name(&self) -> String {
        self.field.name().to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionConfig {
    pub p: f64,
    pub r: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Constant of the dissipation lemma in the `W⁺` bound.
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self { p: 6.0, r: 1.0, big_c: 1.0, eta: 0.01, epsilon: 0.5, epsilon0: 0.05, c1: 1.0, c2: 1.0, c: 1.0, b: None }
    }
}

impl ConditionConfig {
    pub fn besov_params(&self) -> Result<BesovParams> {
        BesovParams::critical(self.p, self.r)
    }

    pub fn besov_constants(&self) -> BesovConstants {
        BesovConstants { c: self.big_c, eta: self.eta, epsilon: self.epsilon }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub viscosity: f64,
    pub diffusivity: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: String,
    pub data: DataConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub monitor: Vec<MonitorSpec>,
    #[serde(default)]
    pub conditions: ConditionConfig,
}

fn default_output() -> String {
    "run".into()
}

const TOP_KEYS: &[&str] = &["n", "viscosity", "diffusivity", "seed", "output", "data", "integrator", "monitor", "conditions"];
const LARGE_DATA_KEYS: &[&str] = &["kind", "rho_min", "rho_max", "amplitude", "stream", "m"];
const CHECKPOINT_KEYS: &[&str] = &["kind", "path"];
const INTEGRATOR_KEYS: &[&str] = &["dt", "t_end", "scheme", "cfl_safety", "snapshot_every"];
const MONITOR_KEYS: &[&str] = &["field", "s", "p", "r"];
const CONDITION_KEYS: &[&str] = &["p", "r", "C", "eta", "epsilon", "epsilon0", "C1", "C2", "c", "b"];

fn config_error(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

/// Closest known key, if any is reasonably close.
pub fn suggest<'a>(key: &str, known: &[&'a str]) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (strsim::damerau_levenshtein(key, k), *k))
        .filter(|(d, k)| *d <= 2.max(k.len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line that assigns `key`, optionally within `[section]`.
fn line_of_key(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = Some(line.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        if section.map(str::to_string) != current {
            continue;
        }
        let Some(rest) = line.strip_prefix(key).or_else(|| line.strip_prefix(&format!("\"{key}\""))) else {
            continue;
        };
        if rest.trim_start().starts_with('=') {
            return Some(i + 1);
        }
    }
    None
}

fn check_keys(text: &str, section: Option<&str>, table: &toml::Table, known: &[&str]) -> Result<()> {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            let place = section.map(|s| format!(" in [{s}]")).unwrap_or_default();
            let hint = suggest(key, known).map(|k| format!("; did you mean `{k}`?")).unwrap_or_default();
            return Err(config_error(line_of_key(text, section, key), format!("unknown key `{key}`{place}{hint}")));
        }
    }
    Ok(())
}

fn section<'a>(table: &'a toml::Table, name: &str) -> Option<&'a toml::Table> {
    table.get(name).and_then(toml::Value::as_table)
}

/// Parses and validates a configuration; unknown keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        config_error(e.span().map(|s| line_of(text, s.start)), e.message().trim().to_string())
    })?;
    check_keys(text, None, &table, TOP_KEYS)?;
    if let Some(data) = section(&table, "data") {
        let known = match data.get("kind").and_then(toml::Value::as_str) {
            Some("checkpoint") => CHECKPOINT_KEYS,
            _ => LARGE_DATA_KEYS,
        };
        check_keys(text, Some("data"), data, known)?;
    }
    if let Some(t) = section(&table, "integrator") {
        check_keys(text, Some("integrator"), t, INTEGRATOR_KEYS)?;
    }
    if let Some(t) = section(&table, "conditions") {
        check_keys(text, Some("conditions"), t, CONDITION_KEYS)?;
    }
    if let Some(list) = table.get("monitor").and_then(toml::Value::as_array) {
        for entry in list.iter().filter_map(toml::Value::as_table) {
            check_keys(text, Some("[monitor]"), entry, MONITOR_KEYS)?;
        }
    }
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config_error(None, e.message().trim().to_string()))?;
    config.validated()
}

fn need(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(None, message()))
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn viscosities(&self) -> Result<Viscosities> {
        Viscosities::new(self.viscosity, self.diffusivity)
            .map_err(|e| config_error(None, format!("{e} (viscosity and diffusivity must both be positive)")))
    }

    pub fn stream_spec(&self) -> Option<StreamSpec> {
        match &self.data {
            DataConfig::LargeData { rho_min, rho_max, amplitude, stream, .. } => Some(match stream {
                StreamKind::Deterministic => StreamSpec::deterministic(*rho_min, *rho_max, *amplitude),
                StreamKind::Seeded => StreamSpec::seeded(*rho_min, *rho_max, *amplitude, self.seed),
            }),
            DataConfig::Checkpoint { .. } => None,
        }
    }

    /// Checks every invariant and fills the default monitor list (u, B, W±
    /// at the critical index of the condition exponents).
    pub fn validated(mut self) -> Result<Self> {
        let grid = self.grid().map_err(|e| config_error(None, e.to_string()))?;
        self.viscosities()?;
        if let Some(spec) = self.stream_spec() {
            spec.validate(&grid).map_err(|e| config_error(None, format!("[data] {e}")))?;
        }
        if let DataConfig::LargeData { m, .. } = self.data {
            need(m > 0, || "[data] m must be a positive integer".into())?;
        }
        self.integrator.params().validate().map_err(|e| config_error(None, format!("[integrator] {e}")))?;
        let c = &self.conditions;
        need(c.p > 1.0 && c.p.is_finite(), || format!("[conditions] p must lie in (1, inf), got {}", c.p))?;
        need(c.r >= 1.0 && c.r.is_finite(), || format!("[conditions] r must lie in [1, inf), got {}", c.r))?;
        need(check_epsilon_r(c.epsilon, c.r).unwrap_or(false), || {
            format!("[conditions] (epsilon={}, r={}) is not an admissible pair", c.epsilon, c.r)
        })?;
        for (name, v) in [("C", c.big_c), ("eta", c.eta), ("epsilon0", c.epsilon0), ("c", c.c)] {
            need(v > 0.0 && v.is_finite(), || format!("[conditions] {name} must be positive, got {v}"))?;
        }
        chi_feasibility(c.c1, c.c2, c.epsilon0).map_err(|e| config_error(None, format!("[conditions] {e}")))?;
        if let Some(b) = c.b {
            need(b > 0.0, || format!("[conditions] b must be positive, got {b}"))?;
        }
        if self.monitor.is_empty() {
            let s = 3.0 / c.p - 1.0;
            self.monitor = MonitoredField::ALL
                .iter()
                .map(|&field| MonitorSpec { field, s, p: c.p, r: c.r })
                .collect();
        }
        for m in &self.monitor {
            need(Exponent::new(m.p).is_ok() && Exponent::new(m.r).is_ok() && m.s.is_finite(), || {
                format!("[[monitor]] {}: need finite s and p, r >= 1", m.field.name())
            })?;
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Lebesgue exponents needed by the monitors and the conditions.
    pub fn exponents(&self) -> Vec<Exponent> {
        let mut out: Vec<Exponent> = Vec::new();
        for p in self.monitor.iter().map(|m| m.p).chain([self.conditions.p]) {
            let e = Exponent::new(p).expect("validated");
            if !out.contains(&e) {
                out.push(e);
            }
        }
        out
    }

    /// Sets a numeric parameter by sweep-axis name.
    pub fn set_axis(&mut self, axis: &str, value: f64) -> Result<()> {
        let int = |v: f64| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(config_error(None, format!("axis `{axis}` needs a non-negative integer, got {v}")))
            }
        };
        match axis {
            "n" => self.n = int(value)? as usize,
            "seed" => self.seed = int(value)?,
            "viscosity" => self.viscosity = value,
            "diffusivity" => self.diffusivity = value,
            "nu_minus" | "nu_plus" => {
                let np = 0.5 * (self.viscosity + self.diffusivity);
                let nm = 0.5 * (self.viscosity - self.diffusivity);
                let (np, nm) = if axis == "nu_minus" { (np, value) } else { (value, nm) };
                self.viscosity = np + nm;
                self.diffusivity = np - nm;
            }
            "dt" => self.integrator.dt = value,
            "t_end" => self.integrator.t_end = value,
            "cfl_safety" => self.integrator.cfl_safety = value,
            "m" | "amplitude" | "rho_min" | "rho_max" => match &mut self.data {
                DataConfig::LargeData { m, amplitude, rho_min, rho_max, .. } => match axis {
                    "m" => *m = int(value)? as u32,
                    "amplitude" => *amplitude = value,
                    "rho_min" => *rho_min = value,
                    _ => *rho_max = value,
                },
                DataConfig::Checkpoint { .. } => {
                    return Err(config_error(None, format!("axis `{axis}` needs large-data initial data")))
                }
            },
            "eta" => self.conditions.eta = value,
            "epsilon" => self.conditions.epsilon = value,
            "C" => self.conditions.big_c = value,
            _ => {
                let hint = suggest(axis, SWEEP_AXES).map(|k| format!("; did you mean `{k}`?")).unwrap_or_default();
                return Err(config_error(None, format!("invalid sweep axis `{axis}`{hint}")));
            }
        }
        Ok(())
    }
}

pub const SWEEP_AXES: &[&str] = &[
    "n", "seed", "viscosity", "diffusivity", "nu_minus", "nu_plus", "dt", "t_end", "cfl_safety", "m", "amplitude",
    "rho_min", "rho_max", "eta", "epsilon", "C",
];

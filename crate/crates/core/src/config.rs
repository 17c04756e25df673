//! Experiment configuration: a TOML document plus `key=value` overrides,
//! validated in full before anything runs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::budget::Budget;
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Resonance,
    Dim,
    Sumdim,
    Marstrand,
    Tower,
    Homogenize,
    Drop,
    Project,
    Render,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Resonance,
        Command::Dim,
        Command::Sumdim,
        Command::Marstrand,
        Command::Tower,
        Command::Homogenize,
        Command::Drop,
        Command::Project,
        Command::Render,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Resonance => "resonance",
            Command::Dim => "dim",
            Command::Sumdim => "sumdim",
            Command::Marstrand => "marstrand",
            Command::Tower => "tower",
            Command::Homogenize => "homogenize",
            Command::Drop => "drop",
            Command::Project => "project",
            Command::Render => "render",
        }
    }

    fn available() -> String {
        Command::ALL.map(Command::name).join(", ")
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown subcommand '{s}'; available: {}",
                    Command::available()
                )
            })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderKind {
    Product,
    Planar,
}

/// One planar map: `scale · R_angle · O + translation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarMapSpec {
    pub scale: f64,
    /// Radians; strings such as `"0.5pi"` are accepted.
    #[serde(default)]
    pub angle: NumText,
    #[serde(default)]
    pub reflect: bool,
    pub translation: [f64; 2],
}

/// A number given either as a TOML number or as text (`"1/3"`, `"0.2pi"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumText {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Default for NumText {
    fn default() -> Self {
        NumText::Int(0)
    }
}

impl NumText {
    pub fn to_scalar(&self, mode: Mode) -> crate::Result<Scalar> {
        match self {
            NumText::Int(i) => Scalar::int(*i).to_mode(mode),
            // The decimal rendering of a float literal is what the user typed.
            NumText::Float(x) => Scalar::parse(&format!("{x:?}"), mode),
            NumText::Text(t) => Scalar::parse(t, mode),
        }
    }

    pub fn to_f64(&self) -> crate::Result<f64> {
        self.to_scalar(Mode::Float).map(|s| s.to_f64())
    }
}

impl fmt::Display for NumText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumText::Int(i) => write!(f, "{i}"),
            NumText::Float(x) => write!(f, "{x:?}"),
            NumText::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Every setting of a run. Systems come from `a`/`b` (central Cantor sets),
/// `left`/`right` (explicit `[ratio, translation]` lists) or, for planar
/// runs, `planar` or the regular preset `zeta`/`theta`/`n_maps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub mode: Mode,
    pub seed: u64,
    pub dry_run: bool,
    pub workers: Option<usize>,

    pub a: Option<NumText>,
    pub b: Option<NumText>,
    pub left: Option<Vec<[NumText; 2]>>,
    pub right: Option<Vec<[NumText; 2]>>,
    pub s: NumText,

    pub planar: Option<Vec<PlanarMapSpec>>,
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub zeta: Option<f64>,
    pub theta: Option<NumText>,
    pub n_maps: usize,

    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub base: Option<NumText>,
    pub k: Option<u32>,
    pub level: u32,
    pub theta_steps: usize,
    pub xi_steps: usize,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub m: u32,
    pub levels: u32,
    pub tau: f64,
    pub grid_steps: usize,
    pub orbit_steps: usize,
    pub delta1: Option<f64>,
    pub q_max: i64,
    pub tol: f64,
    pub samples: usize,
    pub target: RenderKind,
    pub depth: u32,

    pub budget: Budget,
    pub output: OutputPaths,
}

/// Keys accepted at the top level of the document.
pub const KEYS: &[&str] = &[
    "command",
    "mode",
    "seed",
    "dry_run",
    "workers",
    "a",
    "b",
    "left",
    "right",
    "s",
    "planar",
    "center",
    "radius",
    "zeta",
    "theta",
    "n_maps",
    "k_min",
    "k_max",
    "base",
    "k",
    "level",
    "theta_steps",
    "xi_steps",
    "epsilon",
    "delta",
    "m",
    "levels",
    "tau",
    "grid_steps",
    "orbit_steps",
    "delta1",
    "q_max",
    "tol",
    "samples",
    "target",
    "depth",
    "budget",
    "output",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    /// Dotted key path, or `None` for syntax errors.
    pub key: Option<String>,
    /// 1-based position of a syntax error.
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line, self.column) {
            (_, Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(k), ..) => write!(f, "at key '{k}': {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn key_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        line: None,
        column: None,
        message: message.into(),
    }
}

/// Parses TOML text into a table, reporting syntax errors with position.
pub fn parse_table(text: &str) -> Result<Table, ConfigErrors> {
    text.parse::<Table>().map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ConfigErrors(vec![ConfigError {
            key: None,
            line,
            column,
            message: e.message().to_string(),
        }])
    })
}

/// Sets `key=value` on the table. Dotted keys address nested tables; the
/// value is read as a TOML value when it parses as one, else as a string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| key_error(assignment, "expected key=value"))?;
    let key = key.trim().trim_start_matches("--").replace('-', "_");
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| key_error(&key, format!("'{p}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

struct Reader<'a> {
    table: &'a Table,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn opt<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        let v = self.table.get(key)?;
        match v.clone().try_into::<T>() {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors
                    .push(key_error(key, e.message().trim().to_string()));
                None
            }
        }
    }

    fn or<T: DeserializeOwned>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }
}

/// Parses and validates a full configuration. `command` overrides the
/// document's `command` key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    config_from_table(&parse_table(text)?)
}

pub fn config_from_table(table: &Table) -> Result<ExperimentConfig, ConfigErrors> {
    let mut r = Reader {
        table,
        errors: Vec::new(),
    };
    // Unknown keys never hide other errors; type errors do, since the
    // field then holds its default.
    let mut unknown = Vec::new();
    for k in table.keys() {
        if !KEYS.contains(&k.as_str()) {
            unknown.push(key_error(k, "unknown key"));
        }
    }
    let command = match r.opt::<String>("command") {
        Some(c) => c
            .parse::<Command>()
            .map_err(|m| r.errors.push(key_error("command", m)))
            .ok(),
        None => {
            if !table.contains_key("command") {
                r.errors.push(key_error(
                    "command",
                    format!("missing subcommand; available: {}", Command::available()),
                ));
            }
            None
        }
    };
    let mode = r.or("mode", Mode::Exact);
    let cfg = ExperimentConfig {
        command: command.unwrap_or(Command::Resonance),
        mode,
        seed: r.or("seed", 0),
        dry_run: r.or("dry_run", false),
        workers: r.opt("workers"),
        a: r.opt("a"),
        b: r.opt("b"),
        left: r.opt("left"),
        right: r.opt("right"),
        s: r.or("s", NumText::Int(1)),
        planar: r.opt("planar"),
        center: r.opt("center"),
        radius: r.opt("radius"),
        zeta: r.opt("zeta"),
        theta: r.opt("theta"),
        n_maps: r.or("n_maps", 3),
        k_min: r.opt("k_min"),
        k_max: r.opt("k_max"),
        base: r.opt("base"),
        k: r.opt("k"),
        level: r.or("level", 6),
        theta_steps: r.or("theta_steps", 4096),
        xi_steps: r.or("xi_steps", 64),
        epsilon: r.or("epsilon", 0.1),
        delta: r.opt("delta"),
        m: r.or("m", 3),
        levels: r.or("levels", 8),
        tau: r.or("tau", 0.0),
        grid_steps: r.or("grid_steps", 4096),
        orbit_steps: r.or("orbit_steps", 100_000),
        delta1: r.opt("delta1"),
        q_max: r.or("q_max", 1_000_000),
        tol: r.or("tol", 1e-12),
        samples: r.or("samples", 1000),
        target: r.or("target", RenderKind::Product),
        depth: r.or("depth", 3),
        budget: r.or("budget", Budget::default()),
        output: r.or("output", OutputPaths::default()),
    };
    let mut errors = r.errors;
    if errors.is_empty() {
        validate(&cfg, &mut errors);
    }
    unknown.append(&mut errors);
    let errors = unknown;
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn validate(c: &ExperimentConfig, errors: &mut Vec<ConfigError>) {
    let mut bad = |key: &str, msg: String| errors.push(key_error(key, msg));
    for (key, v) in [("a", &c.a), ("b", &c.b)] {
        if let Some(v) = v {
            match v.to_scalar(c.mode) {
                Ok(x) if x.to_f64() > 0.0 && x.to_f64() < 0.5 => {}
                Ok(x) => bad(
                    key,
                    format!("central Cantor ratio {x} must lie in (0, 1/2)"),
                ),
                Err(e) => bad(key, e.to_string()),
            }
        }
    }
    for (key, list) in [("left", &c.left), ("right", &c.right)] {
        if let Some(list) = list {
            if list.is_empty() {
                bad(key, "empty map list".into());
            }
            for (i, [r, t]) in list.iter().enumerate() {
                for (what, v) in [("ratio", r), ("translation", t)] {
                    if let Err(e) = v.to_scalar(c.mode) {
                        bad(&format!("{key}[{i}]"), format!("{what}: {e}"));
                    }
                }
            }
        }
    }
    if let Err(e) = c.s.to_scalar(c.mode) {
        bad("s", e.to_string());
    }
    if let Some(t) = &c.theta {
        if let Err(e) = t.to_f64() {
            bad("theta", e.to_string());
        }
    }
    if let Some(z) = c.zeta {
        if !(z > 0.0 && z < 1.0) {
            bad("zeta", format!("{z} must lie in (0, 1)"));
        }
    }
    if let Some(base) = &c.base {
        match base.to_scalar(c.mode) {
            Ok(b) if b.to_f64() > 1.0 => {}
            Ok(b) => bad("base", format!("{b} must exceed 1")),
            Err(e) => bad("base", e.to_string()),
        }
    }
    if let (Some(lo), Some(hi)) = (c.k_min, c.k_max) {
        if lo >= hi {
            bad("k_min", format!("k_min = {lo} must be below k_max = {hi}"));
        }
    }
    if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
        bad("epsilon", format!("{} must lie in (0, 1)", c.epsilon));
    }
    if c.q_max < 1 {
        bad("q_max", "must be at least 1".into());
    }
    if !(c.tol >= 0.0) {
        bad("tol", "must be nonnegative".into());
    }
    if c.xi_steps < 4 {
        bad("xi_steps", "need at least 4 directions".into());
    }
    if c.theta_steps < 1 {
        bad("theta_steps", "need at least one angle".into());
    }
    if c.level < 1 {
        bad("level", "must be at least 1".into());
    }
    if c.m < 1 {
        bad("m", "must be at least 1".into());
    }
    if c.n_maps < 1 {
        bad("n_maps", "must be at least 1".into());
    }
    if c.workers == Some(0) {
        bad("workers", "must be at least 1".into());
    }
    if !(c.tau.is_finite() && c.tau >= 0.0) {
        bad("tau", "must be a nonnegative number".into());
    }
    let one_d = c.a.is_some() || c.left.is_some();
    let two_d = c.b.is_some() || c.right.is_some();
    let planar = c.planar.is_some() || c.zeta.is_some();
    use Command::*;
    match c.command {
        Dim | Homogenize if !one_d => bad(
            "a",
            format!("'{}' needs a system: set 'a' or 'left'", c.command),
        ),
        Resonance | Sumdim | Marstrand | Tower | Drop if !(one_d && two_d) => {
            let key = if one_d { "b" } else { "a" };
            bad(
                key,
                format!(
                    "'{}' needs two systems: set 'a'/'b' or 'left'/'right'",
                    c.command
                ),
            )
        }
        Project if !planar => bad(
            "planar",
            "'project' needs 'planar' maps or the 'zeta' preset".into(),
        ),
        Render if c.target == RenderKind::Product && !(one_d && two_d) => {
            bad("a", "product rendering needs two systems".into())
        }
        Render if c.target == RenderKind::Planar && !planar => bad(
            "planar",
            "planar rendering needs 'planar' maps or the 'zeta' preset".into(),
        ),
        _ => {}
    }
}

//! Flat `key = value` configuration with dotted namespaces.
//!
//! ```text
//! # comment
//! kernel.kind = fractional
//! kernel.s = 0.5
//! run.levels = 0.5, 0.9
//! ```
//!
//! Every key has a default except `kernel.s`. Unknown keys are rejected.
//! Any key can be overridden from the environment: `run.t_end` is read
//! from `NLFRONT_RUN_T_END`.

use crate::error::{Error, Result};
use crate::evolution::{InitialDatum, ReactionSpec, RunSpec, SolverKind, StepConfig};
use crate::grid::ExteriorDatum;
use crate::kernels::{fractional_norm_const, KernelSpec};
use crate::operator::{check_split_gamma, default_split_gamma, DiagonalTail};
use crate::subsolution::{Barrier, CertifyOptions, SubsolutionParams, Zone};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

pub const ENV_PREFIX: &str = "NLFRONT_";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { key: String, line: usize },
    #[error("`{key}`: cannot parse `{value}`: {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error("`{key}`: {reason}")]
    Range { key: String, reason: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
}

impl ConfigError {
    /// The offending key, when the error concerns one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Malformed { .. } => None,
            ConfigError::UnknownKey { key, .. }
            | ConfigError::Duplicate { key, .. }
            | ConfigError::Invalid { key, .. }
            | ConfigError::Range { key, .. }
            | ConfigError::Missing { key } => Some(key),
        }
    }
}

fn range(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Fractional,
    TruncatedAlgebraic,
}

impl KernelChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "fractional" => Some(Self::Fractional),
            "truncated-algebraic" => Some(Self::TruncatedAlgebraic),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Fractional => "fractional",
            Self::TruncatedAlgebraic => "truncated-algebraic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub kind: KernelChoice,
    pub s: f64,
    /// Only meaningful for the fractional kind.
    pub norm_const: f64,
    pub j0: f64,
    pub j1: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialChoice {
    Indicator,
    Ramp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub dx: f64,
    pub domain_left: f64,
    pub domain_right: f64,
    pub t_end: f64,
    pub max_add: usize,
    pub expand_tol: f64,
    pub expand_margin: usize,
    pub solver: SolverKind,
    pub initial: InitialChoice,
    pub initial_height: f64,
    pub initial_edge: f64,
    pub exterior_left: f64,
    pub exterior_right: f64,
    pub levels: Vec<f64>,
    pub level_every: f64,
    pub snapshot_every: f64,
    pub snapshot_times: Vec<f64>,
    pub max_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub tail_fits: bool,
    pub tail_window: (f64, f64),
    pub exponent_window: (f64, f64),
    pub flattening: bool,
    pub flattening_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionConfig {
    pub preset: bool,
    pub eps: f64,
    pub sigma: f64,
    pub d_amp: f64,
    /// Free mode only.
    pub kappa: f64,
    /// Free mode only.
    pub gamma: f64,
    pub zones: Vec<Zone>,
    pub t_samples: usize,
    pub x_samples: usize,
    pub tolerance: f64,
    /// `None` picks `[t0, 100 t0]` from the start time.
    pub t_window: Option<(f64, f64)>,
    pub barrier_nu: f64,
    pub barrier_kappa: f64,
    /// Times of the threshold search; empty disables it.
    pub ladder: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelConfig,
    pub reaction: ReactionSpec,
    pub run: RunConfig,
    pub split_gamma: f64,
    pub diagonal_tail: DiagonalTail,
    pub diagnostics: DiagnosticsConfig,
    pub subsolution: SubsolutionConfig,
}

struct Fields {
    map: BTreeMap<String, (String, usize)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(v, _)| v)
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: T) -> std::result::Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse::<T>().map_err(|e| ConfigError::Invalid {
                key: key.to_string(),
                value: v.clone(),
                reason: e.to_string(),
            }),
        }
    }

    fn num(&mut self, key: &str, default: f64) -> std::result::Result<f64, ConfigError> {
        let v = self.parse(key, default)?;
        if !v.is_finite() {
            return Err(range(key, format!("must be finite, got {v}")));
        }
        Ok(v)
    }

    fn auto_num(&mut self, key: &str) -> std::result::Result<Option<f64>, ConfigError> {
        match self.map.get(key).map(|(v, _)| v.as_str()) {
            None | Some("auto") => {
                self.take(key);
                Ok(None)
            }
            Some(_) => self.num(key, 0.0).map(Some),
        }
    }

    fn list(&mut self, key: &str, default: Vec<f64>) -> std::result::Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => split_list(&v)
                .map(|item| {
                    item.parse::<f64>().map_err(|e| ConfigError::Invalid {
                        key: key.to_string(),
                        value: item.to_string(),
                        reason: e.to_string(),
                    })
                })
                .collect(),
        }
    }

    fn choice<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>, allowed: &str) -> std::result::Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse(&v).ok_or_else(|| ConfigError::Invalid {
                key: key.to_string(),
                value: v.clone(),
                reason: format!("expected one of {allowed}"),
            }),
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Splits a document into `key -> (value, line)`.
fn read_fields(text: &str) -> std::result::Result<Fields, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(ConfigError::Malformed {
                line,
                reason: format!("invalid key `{k}`"),
            });
        }
        if map.insert(k.to_string(), (v.to_string(), line)).is_some() {
            return Err(ConfigError::Duplicate {
                key: k.to_string(),
                line,
            });
        }
    }
    Ok(Fields { map })
}

/// Environment variable consulted for `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_ascii_uppercase())
}

/// Every key the parser understands, in serialization order.
pub const KEYS: &[&str] = &[
    "kernel.kind",
    "kernel.s",
    "kernel.norm_const",
    "kernel.J0",
    "kernel.J1",
    "kernel.R0",
    "reaction.beta",
    "reaction.r",
    "run.dt",
    "run.dx",
    "run.domain_left",
    "run.domain_right",
    "run.t_end",
    "run.max_add",
    "run.expand_tol",
    "run.expand_margin",
    "run.solver",
    "run.initial",
    "run.initial_height",
    "run.initial_edge",
    "run.exterior_left",
    "run.exterior_right",
    "run.levels",
    "run.level_every",
    "run.snapshot_every",
    "run.snapshot_times",
    "run.max_nodes",
    "operator.split_gamma",
    "operator.diagonal_tail",
    "diagnostics.tail_fits",
    "diagnostics.tail_window_lo",
    "diagnostics.tail_window_hi",
    "diagnostics.exponent_window_lo",
    "diagnostics.exponent_window_hi",
    "diagnostics.flattening",
    "diagnostics.flattening_window_lo",
    "diagnostics.flattening_window_hi",
    "subsolution.mode",
    "subsolution.eps",
    "subsolution.sigma",
    "subsolution.D",
    "subsolution.kappa",
    "subsolution.gamma",
    "subsolution.zones",
    "subsolution.t_samples",
    "subsolution.x_samples",
    "subsolution.tolerance",
    "subsolution.t_min",
    "subsolution.t_max",
    "subsolution.barrier_nu",
    "subsolution.barrier_kappa",
    "subsolution.ladder",
];

/// Parses a document with no environment overrides.
pub fn parse_config(text: &str) -> std::result::Result<Config, ConfigError> {
    parse_config_with_env(text, |_| None)
}

/// Parses a document, letting `env(name)` override any key.
pub fn parse_config_with_env(
    text: &str,
    env: impl Fn(&str) -> Option<String>,
) -> std::result::Result<Config, ConfigError> {
    let mut f = read_fields(text)?;
    for key in KEYS {
        if let Some(v) = env(&env_name(key)) {
            f.map.insert(key.to_string(), (v.trim().to_string(), 0));
        }
    }
    let cfg = resolve(&mut f)?;
    if let Some((key, (_, line))) = f.map.iter().min_by_key(|(_, (_, line))| *line) {
        return Err(ConfigError::UnknownKey {
            key: key.clone(),
            line: *line,
        });
    }
    Ok(cfg)
}

/// Parses a document with overrides from the process environment.
pub fn parse_config_from_process_env(text: &str) -> std::result::Result<Config, ConfigError> {
    parse_config_with_env(text, |name| std::env::var(name).ok())
}

fn resolve(f: &mut Fields) -> std::result::Result<Config, ConfigError> {
    let kind = f.choice(
        "kernel.kind",
        KernelChoice::Fractional,
        KernelChoice::parse,
        "fractional, truncated-algebraic",
    )?;
    if !f.map.contains_key("kernel.s") {
        return Err(ConfigError::Missing { key: "kernel.s".into() });
    }
    let s = f.num("kernel.s", 0.0)?;
    if !(s > 0.0) {
        return Err(range("kernel.s", format!("must be positive, got {s}")));
    }
    if kind == KernelChoice::Fractional && s >= 1.0 {
        return Err(range("kernel.s", format!("the fractional kind needs s < 1, got {s}")));
    }
    let kernel = match kind {
        KernelChoice::Fractional => {
            let c = f.num("kernel.norm_const", fractional_norm_const(s))?;
            if !(c > 0.0) {
                return Err(range("kernel.norm_const", format!("must be positive, got {c}")));
            }
            let base = KernelSpec::fractional_with_norm(s, c).map_err(|e| range("kernel.norm_const", e.to_string()))?;
            KernelConfig {
                kind,
                s,
                norm_const: c,
                j0: f.num("kernel.J0", base.j0)?,
                j1: f.num("kernel.J1", base.j1)?,
                r0: f.num("kernel.R0", base.r0)?,
            }
        }
        KernelChoice::TruncatedAlgebraic => {
            if f.map.contains_key("kernel.norm_const") {
                return Err(range("kernel.norm_const", "only used by the fractional kind"));
            }
            KernelConfig {
                kind,
                s,
                norm_const: 1.0,
                j0: f.num("kernel.J0", 1.0)?,
                j1: f.num("kernel.J1", 0.0)?,
                r0: f.num("kernel.R0", 1.0)?,
            }
        }
    };
    if !(kernel.j0 > 0.0) {
        return Err(range("kernel.J0", format!("must be positive, got {}", kernel.j0)));
    }
    if !(kernel.j1 >= 0.0) {
        return Err(range("kernel.J1", format!("must be nonnegative, got {}", kernel.j1)));
    }
    if !(kernel.r0 >= 1.0) {
        return Err(range("kernel.R0", format!("must be at least 1, got {}", kernel.r0)));
    }

    let beta = f.num("reaction.beta", 1.5)?;
    if !(beta >= 1.0) {
        return Err(range("reaction.beta", format!("must be at least 1, got {beta}")));
    }
    let r = f.num("reaction.r", 1.0)?;
    if !(r >= 0.0) {
        return Err(range("reaction.r", format!("must be nonnegative, got {r}")));
    }
    let reaction = ReactionSpec { beta, r };

    let run = resolve_run(f)?;

    let split_gamma = f.num("operator.split_gamma", default_split_gamma(s))?;
    if kind == KernelChoice::Fractional {
        check_split_gamma(s, split_gamma).map_err(|e| range("operator.split_gamma", e.to_string()))?;
    }
    let diagonal_tail = f.choice(
        "operator.diagonal_tail",
        DiagonalTail::Consistent,
        DiagonalTail::parse,
        "consistent, printed",
    )?;

    let t_end = run.t_end;
    let diagnostics = DiagnosticsConfig {
        tail_fits: f.parse("diagnostics.tail_fits", true)?,
        tail_window: (
            f.num("diagnostics.tail_window_lo", 1e-4)?,
            f.num("diagnostics.tail_window_hi", 1e-2)?,
        ),
        exponent_window: (
            f.num("diagnostics.exponent_window_lo", (0.5 * t_end).max(5.0).min(t_end))?,
            f.num("diagnostics.exponent_window_hi", t_end)?,
        ),
        flattening: f.parse("diagnostics.flattening", true)?,
        flattening_window: (
            f.num("diagnostics.flattening_window_lo", 0.5 * t_end)?,
            f.num("diagnostics.flattening_window_hi", t_end)?,
        ),
    };
    for (key, (lo, hi)) in [
        ("diagnostics.tail_window_hi", diagnostics.tail_window),
        ("diagnostics.exponent_window_hi", diagnostics.exponent_window),
        ("diagnostics.flattening_window_hi", diagnostics.flattening_window),
    ] {
        if !(hi >= lo) {
            return Err(range(key, format!("window [{lo}, {hi}] is empty")));
        }
    }
    if !(diagnostics.tail_window.0 > 0.0 && diagnostics.tail_window.1 < 1.0) {
        return Err(range("diagnostics.tail_window_lo", "tail window must lie in (0, 1)"));
    }

    let subsolution = resolve_subsolution(f, &kernel)?;
    Ok(Config {
        kernel,
        reaction,
        run,
        split_gamma,
        diagonal_tail,
        diagnostics,
        subsolution,
    })
}

fn resolve_run(f: &mut Fields) -> std::result::Result<RunConfig, ConfigError> {
    let run = RunConfig {
        dt: f.num("run.dt", 0.01)?,
        dx: f.num("run.dx", 0.2)?,
        domain_left: f.num("run.domain_left", -1000.0)?,
        domain_right: f.num("run.domain_right", 1000.0)?,
        t_end: f.num("run.t_end", 10.0)?,
        max_add: f.parse("run.max_add", 150usize)?,
        expand_tol: f.num("run.expand_tol", 1e-8)?,
        expand_margin: f.parse("run.expand_margin", 10usize)?,
        solver: f.choice("run.solver", SolverKind::Inverse, SolverKind::parse, "inverse, levinson")?,
        initial: f.choice(
            "run.initial",
            InitialChoice::Indicator,
            |v| match v {
                "indicator" => Some(InitialChoice::Indicator),
                "ramp" => Some(InitialChoice::Ramp),
                _ => None,
            },
            "indicator, ramp",
        )?,
        initial_height: f.num("run.initial_height", 1.0)?,
        initial_edge: f.num("run.initial_edge", 0.0)?,
        exterior_left: f.num("run.exterior_left", 1.0)?,
        exterior_right: f.num("run.exterior_right", 0.0)?,
        levels: f.list("run.levels", vec![0.5])?,
        level_every: f.num("run.level_every", 0.1)?,
        snapshot_every: f.num("run.snapshot_every", 1.0)?,
        snapshot_times: f.list("run.snapshot_times", vec![1.0])?,
        max_nodes: f.parse("run.max_nodes", 2_000_000usize)?,
    };
    let positive = [("run.dt", run.dt), ("run.dx", run.dx), ("run.expand_tol", run.expand_tol), ("run.level_every", run.level_every)];
    for (key, v) in positive {
        if !(v > 0.0) {
            return Err(range(key, format!("must be positive, got {v}")));
        }
    }
    if !(run.expand_tol < 1.0) {
        return Err(range("run.expand_tol", "must be below 1"));
    }
    if !(run.domain_right > run.domain_left) {
        return Err(range("run.domain_right", "must exceed run.domain_left"));
    }
    if ((run.domain_right - run.domain_left) / run.dx) < 2.0 {
        return Err(range("run.dx", "domain holds fewer than 3 nodes"));
    }
    if ((run.domain_right - run.domain_left) / run.dx).round() as usize + 1 > run.max_nodes {
        return Err(range("run.max_nodes", "initial domain already exceeds the node cap"));
    }
    if !(run.t_end >= 0.0) {
        return Err(range("run.t_end", format!("must be nonnegative, got {}", run.t_end)));
    }
    if !(run.snapshot_every >= 0.0) {
        return Err(range("run.snapshot_every", "must be nonnegative (0 disables)"));
    }
    for (key, v) in [
        ("run.initial_height", run.initial_height),
        ("run.exterior_left", run.exterior_left),
        ("run.exterior_right", run.exterior_right),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(range(key, format!("must lie in [0, 1], got {v}")));
        }
    }
    if let Some(l) = run.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(range("run.levels", format!("levels must lie in (0, 1), got {l}")));
    }
    Ok(run)
}

fn resolve_subsolution(f: &mut Fields, kernel: &KernelConfig) -> std::result::Result<SubsolutionConfig, ConfigError> {
    let preset = f.choice(
        "subsolution.mode",
        true,
        |v| match v {
            "preset" => Some(true),
            "free" => Some(false),
            _ => None,
        },
        "preset, free",
    )?;
    let (kappa, gamma) = if preset {
        for key in ["subsolution.kappa", "subsolution.gamma"] {
            if f.map.contains_key(key) {
                return Err(range(key, "only used when subsolution.mode = free"));
            }
        }
        (f64::NAN, f64::NAN)
    } else {
        (f.num("subsolution.kappa", 1.0)?, f.num("subsolution.gamma", 1.0)?)
    };
    let zones = match f.take("subsolution.zones") {
        None => Zone::ALL.to_vec(),
        Some(v) => split_list(&v)
            .map(|z| {
                Zone::parse(z).ok_or_else(|| ConfigError::Invalid {
                    key: "subsolution.zones".into(),
                    value: z.to_string(),
                    reason: "expected blue, orange, green, farfield or barrier".into(),
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?,
    };
    if zones.is_empty() {
        return Err(range("subsolution.zones", "at least one zone is required"));
    }
    let t_min = f.auto_num("subsolution.t_min")?;
    let t_max = f.auto_num("subsolution.t_max")?;
    let t_window = match (t_min, t_max) {
        (None, None) => None,
        (Some(a), Some(b)) if b >= a && a > 0.0 => Some((a, b)),
        (Some(_), Some(_)) => return Err(range("subsolution.t_max", "need 0 < t_min <= t_max")),
        _ => return Err(range("subsolution.t_max", "set both subsolution.t_min and subsolution.t_max, or neither")),
    };
    let barrier_nu = f.num("subsolution.barrier_nu", 4.0)?;
    if !(barrier_nu > 0.0) {
        return Err(range("subsolution.barrier_nu", "must be positive"));
    }
    let bound = 1.0 / (2.0 * kernel.s * kernel.j0);
    let cfg = SubsolutionConfig {
        preset,
        eps: f.num("subsolution.eps", 1e-3)?,
        sigma: f.num("subsolution.sigma", 20.0)?,
        d_amp: f.num("subsolution.D", 1.0)?,
        kappa,
        gamma,
        zones,
        t_samples: f.parse("subsolution.t_samples", 32usize)?,
        x_samples: f.parse("subsolution.x_samples", 64usize)?,
        tolerance: f.num("subsolution.tolerance", 1e-6)?,
        t_window,
        barrier_nu,
        barrier_kappa: f.num("subsolution.barrier_kappa", bound / barrier_nu)?,
        ladder: f.list("subsolution.ladder", Vec::new())?,
    };
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(range("subsolution.eps", format!("must lie in (0, 1), got {}", cfg.eps)));
    }
    for (key, v) in [
        ("subsolution.sigma", cfg.sigma),
        ("subsolution.D", cfg.d_amp),
        ("subsolution.barrier_kappa", cfg.barrier_kappa),
    ] {
        if !(v > 0.0) {
            return Err(range(key, format!("must be positive, got {v}")));
        }
    }
    if !preset && !(cfg.kappa > 0.0) {
        return Err(range("subsolution.kappa", "must be positive"));
    }
    if !preset && !(cfg.gamma >= 0.0) {
        return Err(range("subsolution.gamma", "must be nonnegative"));
    }
    if cfg.t_samples == 0 || cfg.x_samples == 0 {
        return Err(range("subsolution.t_samples", "sample counts must be positive"));
    }
    if !(cfg.tolerance >= 0.0) {
        return Err(range("subsolution.tolerance", "must be nonnegative"));
    }
    if let Some(t) = cfg.ladder.iter().find(|t| !(**t > 0.0)) {
        return Err(range("subsolution.ladder", format!("times must be positive, got {t}")));
    }
    Ok(cfg)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl Config {
    /// Resolved configuration as a document that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let k = &self.kernel;
        put("kernel.kind", k.kind.label().into());
        put("kernel.s", format!("{:?}", k.s));
        if k.kind == KernelChoice::Fractional {
            put("kernel.norm_const", format!("{:?}", k.norm_const));
        }
        put("kernel.J0", format!("{:?}", k.j0));
        put("kernel.J1", format!("{:?}", k.j1));
        put("kernel.R0", format!("{:?}", k.r0));
        put("reaction.beta", format!("{:?}", self.reaction.beta));
        put("reaction.r", format!("{:?}", self.reaction.r));
        let r = &self.run;
        put("run.dt", format!("{:?}", r.dt));
        put("run.dx", format!("{:?}", r.dx));
        put("run.domain_left", format!("{:?}", r.domain_left));
        put("run.domain_right", format!("{:?}", r.domain_right));
        put("run.t_end", format!("{:?}", r.t_end));
        put("run.max_add", r.max_add.to_string());
        put("run.expand_tol", format!("{:?}", r.expand_tol));
        put("run.expand_margin", r.expand_margin.to_string());
        put("run.solver", r.solver.label().into());
        put(
            "run.initial",
            match r.initial {
                InitialChoice::Indicator => "indicator",
                InitialChoice::Ramp => "ramp",
            }
            .into(),
        );
        put("run.initial_height", format!("{:?}", r.initial_height));
        put("run.initial_edge", format!("{:?}", r.initial_edge));
        put("run.exterior_left", format!("{:?}", r.exterior_left));
        put("run.exterior_right", format!("{:?}", r.exterior_right));
        put("run.levels", join(&r.levels));
        put("run.level_every", format!("{:?}", r.level_every));
        put("run.snapshot_every", format!("{:?}", r.snapshot_every));
        put("run.snapshot_times", join(&r.snapshot_times));
        put("run.max_nodes", r.max_nodes.to_string());
        put("operator.split_gamma", format!("{:?}", self.split_gamma));
        put("operator.diagonal_tail", self.diagonal_tail.label().into());
        let d = &self.diagnostics;
        put("diagnostics.tail_fits", d.tail_fits.to_string());
        put("diagnostics.tail_window_lo", format!("{:?}", d.tail_window.0));
        put("diagnostics.tail_window_hi", format!("{:?}", d.tail_window.1));
        put("diagnostics.exponent_window_lo", format!("{:?}", d.exponent_window.0));
        put("diagnostics.exponent_window_hi", format!("{:?}", d.exponent_window.1));
        put("diagnostics.flattening", d.flattening.to_string());
        put("diagnostics.flattening_window_lo", format!("{:?}", d.flattening_window.0));
        put("diagnostics.flattening_window_hi", format!("{:?}", d.flattening_window.1));
        let s = &self.subsolution;
        put("subsolution.mode", if s.preset { "preset" } else { "free" }.into());
        put("subsolution.eps", format!("{:?}", s.eps));
        put("subsolution.sigma", format!("{:?}", s.sigma));
        put("subsolution.D", format!("{:?}", s.d_amp));
        if !s.preset {
            put("subsolution.kappa", format!("{:?}", s.kappa));
            put("subsolution.gamma", format!("{:?}", s.gamma));
        }
        put(
            "subsolution.zones",
            s.zones.iter().map(|z| z.label()).collect::<Vec<_>>().join(", "),
        );
        put("subsolution.t_samples", s.t_samples.to_string());
        put("subsolution.x_samples", s.x_samples.to_string());
        put("subsolution.tolerance", format!("{:?}", s.tolerance));
        match s.t_window {
            Some((a, b)) => {
                put("subsolution.t_min", format!("{a:?}"));
                put("subsolution.t_max", format!("{b:?}"));
            }
            None => {
                put("subsolution.t_min", "auto".into());
                put("subsolution.t_max", "auto".into());
            }
        }
        put("subsolution.barrier_nu", format!("{:?}", s.barrier_nu));
        put("subsolution.barrier_kappa", format!("{:?}", s.barrier_kappa));
        put("subsolution.ladder", join(&s.ladder));
        out
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let k = &self.kernel;
        let base = match k.kind {
            KernelChoice::Fractional => KernelSpec::fractional_with_norm(k.s, k.norm_const)?,
            KernelChoice::TruncatedAlgebraic => KernelSpec::truncated_algebraic(k.s)?,
        };
        base.with_constants(k.j0, k.j1, k.r0)
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        let r = &self.run;
        let initial = match r.initial {
            InitialChoice::Indicator => InitialDatum::Indicator {
                a: r.initial_height,
                b: r.initial_edge,
            },
            InitialChoice::Ramp => InitialDatum::Ramp {
                a: r.initial_height,
                b: r.initial_edge,
            },
        };
        Ok(RunSpec {
            kernel: self.kernel_spec()?,
            reaction: ReactionSpec::new(self.reaction.beta, self.reaction.r)?,
            step: StepConfig {
                dt: r.dt,
                expand_tol: r.expand_tol,
                expand_margin: r.expand_margin,
                max_add: r.max_add,
            },
            dx: r.dx,
            domain: (r.domain_left, r.domain_right),
            t_end: r.t_end,
            split_gamma: self.split_gamma,
            diagonal_tail: self.diagonal_tail,
            solver: r.solver,
            initial,
            exterior: ExteriorDatum::new(r.exterior_left, r.exterior_right),
            levels: r.levels.clone(),
            level_every: r.level_every,
            snapshot_every: r.snapshot_every,
            snapshot_times: r.snapshot_times.clone(),
            max_nodes: r.max_nodes,
        })
    }

    /// Subsolution parameters, with `β` from the reaction and `s` from the kernel.
    pub fn subsolution_params(&self) -> Result<SubsolutionParams> {
        let c = &self.subsolution;
        let (beta, s) = (self.reaction.beta, self.kernel.s);
        if c.preset {
            SubsolutionParams::preset(c.eps, c.sigma, c.d_amp, beta, s)
        } else {
            let mut p = SubsolutionParams::free(c.eps, c.kappa, c.gamma, beta, s)?;
            p.sigma = c.sigma;
            p.d_amp = c.d_amp;
            p.check()?;
            Ok(p)
        }
    }

    pub fn barrier(&self) -> Result<Barrier> {
        Barrier::new(self.subsolution.barrier_nu, self.subsolution.barrier_kappa, self.kernel.s)
    }

    pub fn certify_options(&self) -> Result<CertifyOptions> {
        let c = &self.subsolution;
        Ok(CertifyOptions {
            t_samples: c.t_samples,
            x_samples: c.x_samples,
            tolerance: c.tolerance,
            t_range: c.t_window,
            barrier: Some(self.barrier()?),
            ..CertifyOptions::default()
        })
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(parse_config(s)?)
    }
}

//! Run configuration: a strictly keyed TOML file.
//!
//! ```toml
//! mode = "pipeline"        # groundstate | classify | evolve | pipeline | validate
//! seed = 7
//!
//! [grid]
//! dim = 3
//! n = 64
//! half_len = 12.0
//!
//! [model]
//! gamma = 2.5
//!
//! [potential]
//! kind = "gaussian_bump"   # zero | gaussian_bump | smooth_compact_bump | inverse_poly | ball_indicator | grid_sampled
//! a = -0.5
//! sigma = 1.0
//!
//! [ground_state]
//! omega_mode = "fixed"     # fixed | self_consistent
//! omega = 1.0
//!
//! [initial]
//! family = "scaled_ground_state"   # scaled_ground_state | gaussian | file
//! scale = 1.05
//! chirp = -0.1
//!
//! [evolve]
//! t_max = 5.0
//! dt0 = 1e-3
//!
//! [validate]
//! trials = 100
//! ```
//!
//! Every section is optional except where the mode needs it: `classify`
//! needs `[initial]`, `evolve` and `pipeline` need `[initial]` and
//! `[evolve]` with `t_max`. Unknown keys are errors. All violations are
//! reported together.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::ground_state::{OmegaMode, SolverOptions};
use crate::grid::Grid;
use crate::initial::InitialSpec;
use crate::model::validate_gamma;
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Groundstate,
    Classify,
    Evolve,
    Pipeline,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Groundstate => "groundstate",
            Mode::Classify => "classify",
            Mode::Evolve => "evolve",
            Mode::Pipeline => "pipeline",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_half_len")]
    pub half_len: f64,
}

fn default_dim() -> usize {
    3
}
fn default_n() -> usize {
    64
}
fn default_half_len() -> f64 {
    8.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dim: 3, n: 64, half_len: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaModeName {
    Fixed,
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateConfig {
    pub omega_mode: OmegaModeName,
    /// Fixed frequency, or the starting value in self-consistent mode.
    pub omega: f64,
    pub solver: SolverOptions,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        GroundStateConfig { omega_mode: OmegaModeName::Fixed, omega: 1.0, solver: SolverOptions::default() }
    }
}

impl GroundStateConfig {
    pub fn omega_mode(&self) -> OmegaMode {
        match self.omega_mode {
            OmegaModeName::Fixed => OmegaMode::Fixed { omega: self.omega },
            OmegaModeName::SelfConsistent => OmegaMode::SelfConsistent { initial: self.omega },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    /// Random trial fields for the Weinstein maximality check.
    pub trials: usize,
    /// Random (V, u) pairs for the Kato bounds.
    pub kato_pairs: usize,
    /// Random (E, M, C_Q, gamma) tuples for the threshold algebra.
    pub threshold_tuples: usize,
    /// Subset of suites to run; empty runs all.
    pub suites: Vec<String>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { trials: 100, kato_pairs: 50, threshold_tuples: 50, suites: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub grid: GridConfig,
    pub gamma: f64,
    pub potential: PotentialSpec,
    pub ground_state: GroundStateConfig,
    pub initial: Option<InitialSpec>,
    pub evolve: Option<EvolveConfig>,
    pub validate: ValidateConfig,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.half_len)
    }
}

const TOP_KEYS: &[&str] = &["mode", "seed", "out", "grid", "model", "potential", "ground_state", "initial", "evolve", "validate"];
const GRID_KEYS: &[&str] = &["dim", "n", "half_len"];
const MODEL_KEYS: &[&str] = &["gamma"];
const POTENTIAL_KEYS: &[&str] = &["kind", "a", "sigma", "radius", "k", "values"];
const GROUND_KEYS: &[&str] = &[
    "omega_mode",
    "omega",
    "max_iter",
    "tol",
    "accept_tol",
    "inner_tol",
    "max_inner",
    "omega_tol",
    "relaxation",
    "max_outer",
];
const INITIAL_KEYS: &[&str] = &["family", "scale", "chirp", "amplitude", "width", "path"];
const EVOLVE_KEYS: &[&str] = &[
    "dt0",
    "t_max",
    "tol_step",
    "blowup_grad_factor",
    "blowup_tail_frac",
    "record_stride",
    "adaptive",
    "dt_min",
    "dt_max",
];
const VALIDATE_KEYS: &[&str] = &["trials", "kato_pairs", "threshold_tuples", "suites"];

fn suggestion(key: &str, allowed: &[&str]) -> String {
    let best = allowed
        .iter()
        .map(|a| (strsim::levenshtein(key, a), *a))
        .min_by_key(|(d, _)| *d)
        .filter(|(d, a)| *d <= 2.max(a.len() / 3));
    match best {
        Some((_, a)) => format!("; did you mean `{a}`?"),
        None => format!("; allowed keys: {}", allowed.join(", ")),
    }
}

fn check_keys(table: &Table, section: &str, allowed: &[&str], errors: &mut Vec<String>) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            let place = if section.is_empty() { "at top level".to_string() } else { format!("in [{section}]") };
            errors.push(format!("unknown key `{key}` {place}{}", suggestion(key, allowed)));
        }
    }
}

fn section<'a>(root: &'a Table, name: &str, errors: &mut Vec<String>) -> Option<&'a Table> {
    match root.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errors.push(format!("`{name}` must be a table ([{name}])"));
            None
        }
    }
}

fn decode<T: DeserializeOwned>(table: &Table, what: &str, errors: &mut Vec<String>) -> Option<T> {
    match Value::Table(table.clone()).try_into::<T>() {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("[{what}]: {}", e.message().trim()));
            None
        }
    }
}

fn take<T: DeserializeOwned>(table: &Table, key: &str, what: &str, errors: &mut Vec<String>) -> Option<T> {
    let v = table.get(key)?;
    match v.clone().try_into::<T>() {
        Ok(x) => Some(x),
        Err(e) => {
            errors.push(format!("{what}.{key}: {}", e.message().trim()));
            None
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_for(path, None)
}

/// As [`parse_config`], with `mode` taken from `verb` when given. The
/// file's own `mode` key then becomes optional.
pub fn parse_config_for(path: &Path, verb: Option<Mode>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str_for(&text, verb)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    parse_config_str_for(text, None)
}

pub fn parse_config_str_for(text: &str, verb: Option<Mode>) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![format!("syntax: {}", e.message())]))?;
    let mut errors = Vec::new();
    check_keys(&root, "", TOP_KEYS, &mut errors);

    let file_mode = match root.get("mode") {
        None => None,
        Some(v) => match v.clone().try_into::<Mode>() {
            Ok(m) => Some(m),
            Err(_) => {
                errors.push(format!("mode = {v} is not one of groundstate, classify, evolve, pipeline, validate"));
                None
            }
        },
    };
    let mode = match (verb, file_mode) {
        (Some(v), Some(f)) if v != f => {
            log::warn!("config mode `{}` overridden by `{}`", f.name(), v.name());
            Some(v)
        }
        (Some(v), _) => Some(v),
        (None, Some(f)) => Some(f),
        (None, None) => {
            if !root.contains_key("mode") {
                errors.push("missing `mode` (one of groundstate, classify, evolve, pipeline, validate)".into());
            }
            None
        }
    };
    let seed = match root.get("seed") {
        None => 0,
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(v) => {
            errors.push(format!("seed = {v} must be a nonnegative integer"));
            0
        }
    };
    let out = take::<PathBuf>(&root, "out", "top", &mut errors);

    let grid_cfg = match section(&root, "grid", &mut errors) {
        Some(t) => {
            check_keys(t, "grid", GRID_KEYS, &mut errors);
            decode::<GridConfig>(t, "grid", &mut errors).unwrap_or_default()
        }
        None => GridConfig::default(),
    };
    if let Err(e) = Grid::new(grid_cfg.dim, grid_cfg.n, grid_cfg.half_len) {
        errors.push(format!("[grid]: {e}"));
    }

    let mut gamma = 2.5;
    if let Some(t) = section(&root, "model", &mut errors) {
        check_keys(t, "model", MODEL_KEYS, &mut errors);
        if let Some(g) = take::<f64>(t, "gamma", "model", &mut errors) {
            gamma = g;
        }
    }
    if let Err(e) = validate_gamma(gamma, grid_cfg.dim) {
        errors.push(format!("[model]: {e}"));
    }

    let potential = match section(&root, "potential", &mut errors) {
        Some(t) => {
            check_keys(t, "potential", POTENTIAL_KEYS, &mut errors);
            let p = decode::<PotentialSpec>(t, "potential", &mut errors).unwrap_or(PotentialSpec::Zero);
            if let Err(e) = p.validate() {
                errors.push(format!("[potential]: {e}"));
            }
            if let PotentialSpec::GridSampled { values } = &p {
                let expect = grid_cfg.n.pow(grid_cfg.dim as u32);
                if values.len() != expect {
                    errors.push(format!("[potential]: grid_sampled has {} values, grid needs {expect}", values.len()));
                }
            }
            p
        }
        None => PotentialSpec::Zero,
    };

    let mut ground_state = GroundStateConfig::default();
    if let Some(t) = section(&root, "ground_state", &mut errors) {
        check_keys(t, "ground_state", GROUND_KEYS, &mut errors);
        if let Some(m) = take::<OmegaModeName>(t, "omega_mode", "ground_state", &mut errors) {
            ground_state.omega_mode = m;
        }
        if let Some(w) = take::<f64>(t, "omega", "ground_state", &mut errors) {
            ground_state.omega = w;
        }
        let s = &mut ground_state.solver;
        macro_rules! opt {
            ($field:ident, $ty:ty) => {
                if let Some(v) = take::<$ty>(t, stringify!($field), "ground_state", &mut errors) {
                    s.$field = v;
                }
            };
        }
        opt!(max_iter, usize);
        opt!(tol, f64);
        opt!(accept_tol, f64);
        opt!(inner_tol, f64);
        opt!(max_inner, usize);
        opt!(omega_tol, f64);
        opt!(relaxation, f64);
        opt!(max_outer, usize);
    }
    if !(ground_state.omega > 0.0 && ground_state.omega.is_finite()) {
        errors.push(format!("[ground_state]: omega = {} must be positive", ground_state.omega));
    }
    if !(ground_state.solver.relaxation > 0.0 && ground_state.solver.relaxation <= 1.0) {
        errors.push(format!("[ground_state]: relaxation = {} must lie in (0, 1]", ground_state.solver.relaxation));
    }

    let initial = section(&root, "initial", &mut errors).and_then(|t| {
        check_keys(t, "initial", INITIAL_KEYS, &mut errors);
        let spec = decode::<InitialSpec>(t, "initial", &mut errors)?;
        if let Err(e) = spec.validate() {
            errors.push(format!("[initial]: {e}"));
        }
        Some(spec)
    });
    let initial_present = root.contains_key("initial");

    let evolve_table = section(&root, "evolve", &mut errors);
    let evolve = evolve_table.and_then(|t| {
        check_keys(t, "evolve", EVOLVE_KEYS, &mut errors);
        if !t.contains_key("t_max") {
            errors.push("[evolve]: `t_max` is required".into());
        }
        let cfg = decode::<EvolveConfig>(t, "evolve", &mut errors)?;
        if let Err(Error::Config(v)) = cfg.validate() {
            errors.extend(v.into_iter().map(|m| format!("[evolve]: {m}")));
        }
        Some(cfg)
    });

    let validate = match section(&root, "validate", &mut errors) {
        Some(t) => {
            check_keys(t, "validate", VALIDATE_KEYS, &mut errors);
            let v = decode::<ValidateConfig>(t, "validate", &mut errors).unwrap_or_default();
            for s in &v.suites {
                if !crate::suites::SUITE_NAMES.contains(&s.as_str()) {
                    errors.push(format!("[validate]: unknown suite `{s}`{}", suggestion(s, crate::suites::SUITE_NAMES)));
                }
            }
            v
        }
        None => ValidateConfig::default(),
    };

    if let Some(m) = mode {
        let needs_initial = matches!(m, Mode::Classify | Mode::Evolve | Mode::Pipeline);
        let needs_evolve = matches!(m, Mode::Evolve | Mode::Pipeline);
        if needs_initial && !initial_present {
            errors.push(format!("mode `{}` requires an [initial] section", m.name()));
        }
        if needs_evolve && evolve_table.is_none() {
            errors.push(format!("mode `{}` requires an [evolve] section with t_max", m.name()));
        }
    }

    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    Ok(RunConfig {
        mode: mode.expect("checked"),
        seed,
        grid: grid_cfg,
        gamma,
        potential,
        ground_state,
        initial,
        evolve,
        validate,
        out,
    })
}

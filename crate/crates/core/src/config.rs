//! Experiment configuration: TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{uniform_grid, DEFAULT_NUM_PATHS, DEFAULT_PATH_LENGTH, MAX_EXACT_PATH_LENGTH};
use crate::equilibria::SpaceKind;
use crate::ipd::PayoffMatrix;
use crate::strategies::StrategySpec;
use crate::values::ValueId;

pub const DEFAULT_GRID_POINTS: usize = 11;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Offending key for parse and validation errors.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { key, .. } | ConfigError::Validation { key, .. } => Some(key),
            ConfigError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Align,
    SweepRandom,
    SweepHeterogeneous,
    Equilibria,
    NashCheck,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Align => "align",
            Mode::SweepRandom => "sweep-random",
            Mode::SweepHeterogeneous => "sweep-heterogeneous",
            Mode::Equilibria => "equilibria",
            Mode::NashCheck => "nash-check",
        }
    }

    /// Extension of the results file.
    pub fn extension(self) -> &'static str {
        match self {
            Mode::Equilibria | Mode::NashCheck => "json",
            _ => "csv",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Mode::Align,
            Mode::SweepRandom,
            Mode::SweepHeterogeneous,
            Mode::Equilibria,
            Mode::NashCheck,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// A validated experiment description.
///
/// `workers` and `output_path` do not affect results and are left out of
/// the serialized form, which is what the run manifest records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub payoff_matrix: PayoffMatrix,
    pub grid: Vec<f64>,
    pub path_length: usize,
    pub num_paths: usize,
    pub master_seed: u64,
    pub value_alpha: ValueId,
    pub value_beta: ValueId,
    pub space: SpaceKind,
    pub use_exact: bool,
    pub tolerance: Option<f64>,
    /// Profile evaluated in `align` mode.
    pub alpha_strategy: StrategySpec,
    pub beta_strategy: StrategySpec,
    /// Alpha's options in the heterogeneous space.
    pub alpha_strategies: Vec<StrategySpec>,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mode = Mode::Align;
        Self {
            mode,
            payoff_matrix: PayoffMatrix::default(),
            grid: uniform_grid(DEFAULT_GRID_POINTS),
            path_length: DEFAULT_PATH_LENGTH,
            num_paths: DEFAULT_NUM_PATHS,
            master_seed: DEFAULT_SEED,
            value_alpha: ValueId::Equality,
            value_beta: ValueId::Equality,
            space: SpaceKind::RandomGrid,
            use_exact: false,
            tolerance: None,
            alpha_strategy: StrategySpec::Random(0.5),
            beta_strategy: StrategySpec::Random(0.5),
            alpha_strategies: StrategySpec::NAMED.to_vec(),
            workers: None,
            output_path: default_output(mode),
        }
    }
}

fn default_output(mode: Mode) -> PathBuf {
    PathBuf::from(format!("{}.{}", mode.as_str(), mode.extension()))
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMatrix {
    pub cc: [i64; 2],
    pub cd: [i64; 2],
    pub dc: [i64; 2],
    pub dd: [i64; 2],
}

/// Unvalidated settings, as read from a file or collected from flags.
/// Signed integers let negative inputs reach validation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<String>,
    pub payoff_matrix: Option<RawMatrix>,
    pub grid: Option<Vec<f64>>,
    pub grid_points: Option<i64>,
    pub path_length: Option<i64>,
    pub num_paths: Option<i64>,
    pub master_seed: Option<u64>,
    pub value_alpha: Option<String>,
    pub value_beta: Option<String>,
    pub space: Option<String>,
    pub use_exact: Option<bool>,
    pub tolerance: Option<f64>,
    pub alpha_strategy: Option<String>,
    pub beta_strategy: Option<String>,
    pub alpha_strategies: Option<Vec<String>>,
    pub workers: Option<i64>,
    pub output_path: Option<PathBuf>,
}

impl RawConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            key: offending_key(text, &e),
            message: e.message().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `over` replace those in `self`. A grid given either
    /// way replaces the other form.
    pub fn overridden_by(mut self, over: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        if over.grid.is_some() || over.grid_points.is_some() {
            self.grid = None;
            self.grid_points = None;
        }
        take!(
            mode, payoff_matrix, grid, grid_points, path_length, num_paths, master_seed,
            value_alpha, value_beta, space, use_exact, tolerance, alpha_strategy,
            beta_strategy, alpha_strategies, workers, output_path
        );
        self
    }

    pub fn validate(self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();

        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| ConfigError::invalid(key, e.to_string()))
        }
        fn positive(key: &str, v: i64) -> Result<usize, ConfigError> {
            if v >= 1 {
                Ok(v as usize)
            } else {
                Err(ConfigError::invalid(key, format!("must be >= 1, got {v}")))
            }
        }

        if let Some(m) = &self.mode {
            cfg.mode = parse("mode", m)?;
        }
        if let Some(m) = self.payoff_matrix {
            let entry = |name: &str, [a, b]: [i64; 2]| {
                if a < 0 || b < 0 {
                    Err(ConfigError::invalid(
                        &format!("payoff_matrix.{name}"),
                        "rewards must be non-negative",
                    ))
                } else {
                    Ok((a as u64, b as u64))
                }
            };
            cfg.payoff_matrix = PayoffMatrix {
                cc: entry("cc", m.cc)?,
                cd: entry("cd", m.cd)?,
                dc: entry("dc", m.dc)?,
                dd: entry("dd", m.dd)?,
            };
        }
        if let Some(n) = self.grid_points {
            cfg.grid = uniform_grid(positive("grid_points", n)?);
        }
        if let Some(g) = self.grid {
            if g.is_empty() {
                return Err(ConfigError::invalid("grid", "must not be empty"));
            }
            if let Some(p) = g.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(ConfigError::invalid("grid", format!("{p} is outside [0, 1]")));
            }
            cfg.grid = g;
        }
        if let Some(l) = self.path_length {
            cfg.path_length = positive("path_length", l)?;
        }
        if let Some(x) = self.num_paths {
            cfg.num_paths = positive("num_paths", x)?;
        }
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        if let Some(v) = &self.value_alpha {
            cfg.value_alpha = parse("value_alpha", v)?;
        }
        if let Some(v) = &self.value_beta {
            cfg.value_beta = parse("value_beta", v)?;
        }
        if let Some(s) = &self.space {
            cfg.space = parse("space", s)?;
        }
        if let Some(e) = self.use_exact {
            cfg.use_exact = e;
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ConfigError::invalid("tolerance", format!("must be >= 0, got {t}")));
            }
            cfg.tolerance = Some(t);
        }
        if let Some(s) = &self.alpha_strategy {
            cfg.alpha_strategy = parse("alpha_strategy", s)?;
        }
        if let Some(s) = &self.beta_strategy {
            cfg.beta_strategy = parse("beta_strategy", s)?;
        }
        if let Some(list) = &self.alpha_strategies {
            let specs = list
                .iter()
                .map(|s| parse::<StrategySpec>("alpha_strategies", s))
                .collect::<Result<Vec<_>, _>>()?;
            if specs.is_empty() {
                return Err(ConfigError::invalid("alpha_strategies", "must not be empty"));
            }
            if let Some(s) = specs.iter().find(|s| !s.is_named()) {
                return Err(ConfigError::invalid(
                    "alpha_strategies",
                    format!("`{s}` is not tft, mostly_cooperate or mostly_defect"),
                ));
            }
            cfg.alpha_strategies = specs;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(positive("workers", w)?);
        }
        cfg.output_path = self.output_path.unwrap_or_else(|| default_output(cfg.mode));

        if cfg.use_exact && cfg.path_length > MAX_EXACT_PATH_LENGTH {
            return Err(ConfigError::invalid(
                "path_length",
                format!("exact evaluation supports at most {MAX_EXACT_PATH_LENGTH}"),
            ));
        }
        Ok(cfg)
    }
}

/// Loads `file` (if any), applies `flags` on top, and validates.
pub fn load_config(file: Option<&Path>, flags: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let base = match file {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    base.overridden_by(flags).validate()
}

// Best effort: the key on the line where the parser stopped, else the
// backquoted name in the message.
fn offending_key(text: &str, err: &toml::de::Error) -> String {
    if let Some(name) = err
        .message()
        .split('`')
        .nth(1)
        .filter(|_| err.message().contains("unknown field"))
    {
        return name.to_string();
    }
    err.span()
        .and_then(|span| {
            let line_start = text[..span.start.min(text.len())]
                .rfind('\n')
                .map_or(0, |i| i + 1);
            let line = text[line_start..].lines().next()?;
            let key = line.split('=').next()?.trim();
            (!key.is_empty() && !key.starts_with('[')).then(|| key.to_string())
        })
        .unwrap_or_else(|| "<document>".to_string())
}

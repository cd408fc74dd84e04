//! Run configuration, loaded from JSON. All physical quantities are in units
//! of ω₀.

use std::path::{Path, PathBuf};

use dicke_core::dissipation::LambShift;
use dicke_core::model::DEFAULT_MAX_DIMENSION;
use dicke_core::observables::{DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_POINTS};
use dicke_core::qoptical::{DEFAULT_QO_N_MAX, QO_MAX_DIMENSION};
use dicke_core::spectral::DEFAULT_TOLERANCE;
use dicke_core::{DressedOptions, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SIMULATE_OUT_DIR";

/// Smallest chart coupling unless configured otherwise; g = 0 itself is a
/// degenerate ladder.
pub const DEFAULT_G_MIN: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Eigen,
    Spectrum,
    G2chart,
    G2time,
    QoChart,
    AnalyticCompare,
    Converge,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Eigen => "eigen",
            Task::Spectrum => "spectrum",
            Task::G2chart => "g2chart",
            Task::G2time => "g2time",
            Task::QoChart => "qo-chart",
            Task::AnalyticCompare => "analytic-compare",
            Task::Converge => "converge",
        }
    }
}

fn default_g_min() -> f64 {
    DEFAULT_G_MIN
}
fn default_g_max() -> f64 {
    0.8
}
fn default_t_min() -> f64 {
    0.02
}
fn default_t_max() -> f64 {
    0.3
}
fn default_steps() -> usize {
    40
}

/// Rectangular (g, T) chart. g′ = `g_prime_ratio` · g at every point; when
/// the ratio is absent it is taken from the model (g′/g, or 1 when g = 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartGrid {
    #[serde(default = "default_g_min")]
    pub g_min: f64,
    #[serde(default = "default_g_max")]
    pub g_max: f64,
    #[serde(default = "default_steps")]
    pub g_steps: usize,
    #[serde(rename = "T_min", alias = "t_min", default = "default_t_min")]
    pub t_min: f64,
    #[serde(rename = "T_max", alias = "t_max", default = "default_t_max")]
    pub t_max: f64,
    #[serde(rename = "T_steps", alias = "t_steps", default = "default_steps")]
    pub t_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_prime_ratio: Option<f64>,
}

impl Default for ChartGrid {
    fn default() -> Self {
        Self {
            g_min: DEFAULT_G_MIN,
            g_max: default_g_max(),
            g_steps: default_steps(),
            t_min: default_t_min(),
            t_max: default_t_max(),
            t_steps: default_steps(),
            g_prime_ratio: None,
        }
    }
}

fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect()
}

impl ChartGrid {
    pub fn g_values(&self) -> Vec<f64> {
        axis(self.g_min, self.g_max, self.g_steps)
    }

    pub fn t_values(&self) -> Vec<f64> {
        axis(self.t_min, self.t_max, self.t_steps)
    }
}

fn default_omega_max() -> f64 {
    DEFAULT_OMEGA_MAX
}
fn default_omega_points() -> usize {
    DEFAULT_OMEGA_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGrid {
    #[serde(default)]
    pub min: f64,
    #[serde(default = "default_omega_max")]
    pub max: f64,
    #[serde(default = "default_omega_points")]
    pub points: usize,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: DEFAULT_OMEGA_MAX,
            points: DEFAULT_OMEGA_POINTS,
        }
    }
}

impl OmegaGrid {
    pub fn values(&self) -> Vec<f64> {
        axis(self.min, self.max, self.points)
    }
}

fn default_t_grid_max() -> f64 {
    5000.0
}
fn default_t_grid_points() -> usize {
    501
}

/// Delay times for g²(t): either explicit `values` or `points` uniform
/// samples on [0, max].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default = "default_t_grid_max")]
    pub max: f64,
    #[serde(default = "default_t_grid_points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            max: default_t_grid_max(),
            points: default_t_grid_points(),
            values: None,
        }
    }
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        match &self.values {
            Some(v) => v.clone(),
            None => axis(0.0, self.max, self.points),
        }
    }
}

/// One parameter point for the convergence task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub g: f64,
    #[serde(default)]
    pub g_prime: f64,
    #[serde(rename = "T", alias = "temperature")]
    pub temperature: f64,
}

fn default_qo_n_max() -> usize {
    DEFAULT_QO_N_MAX
}
fn default_eigen_levels() -> usize {
    20
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the task given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub model: ModelParams,
    #[serde(default)]
    pub grid: ChartGrid,
    #[serde(default)]
    pub omega_grid: OmegaGrid,
    #[serde(default)]
    pub t_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub lamb_shift: LambShift,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_qo_n_max")]
    pub qo_n_max: usize,
    #[serde(default = "default_eigen_levels")]
    pub eigen_levels: usize,
    /// Finer Fock cutoff for convergence checks; defaults to n_max + 20.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max_fine: Option<usize>,
    /// Points for the convergence task; defaults to the model point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointSpec>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn options(&self) -> DressedOptions {
        DressedOptions {
            lamb_shift: self.lamb_shift,
            tolerance: self.tolerance,
            max_dimension: DEFAULT_MAX_DIMENSION,
        }
    }

    pub fn g_prime_ratio(&self) -> f64 {
        self.grid.g_prime_ratio.unwrap_or(if self.model.g > 0.0 { self.model.g_prime / self.model.g } else { 1.0 })
    }

    pub fn n_max_fine(&self) -> usize {
        self.n_max_fine.unwrap_or(self.model.n_max + 20)
    }

    /// Model parameters at a chart point.
    pub fn at(&self, g: f64, temperature: f64) -> ModelParams {
        ModelParams {
            g,
            g_prime: self.g_prime_ratio() * g,
            temperature,
            ..self.model.clone()
        }
    }

    pub fn validate(&self, task: Task) -> Result<(), ConfigError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(ConfigError::new("task", format!("config is for `{}`, command line asks for `{}`", t.name(), task.name())));
            }
        }
        self.model.validate().map_err(|e| match e {
            dicke_core::Error::InvalidParameter { field, reason } => ConfigError::new(format!("model.{field}"), reason),
            other => ConfigError::new("model", other.to_string()),
        })?;
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        match task {
            Task::Eigen | Task::G2chart | Task::QoChart | Task::AnalyticCompare => self.validate_grid(task)?,
            Task::Spectrum => self.validate_omega()?,
            Task::G2time => self.validate_times()?,
            Task::Converge => {}
        }
        if self.n_max_fine() <= self.model.n_max {
            return Err(ConfigError::new("n_max_fine", "must exceed model.n_max"));
        }
        if task == Task::QoChart {
            if self.qo_n_max < 2 {
                return Err(ConfigError::new("qo_n_max", "must be at least 2"));
            }
            let dim = (1usize << self.model.n_emitters.min(20)) * (self.qo_n_max + 1);
            if dim > QO_MAX_DIMENSION {
                return Err(ConfigError::new("qo_n_max", format!("dimension {dim} exceeds the master-equation limit {QO_MAX_DIMENSION}")));
            }
        }
        if task == Task::Eigen && self.eigen_levels == 0 {
            return Err(ConfigError::new("eigen_levels", "must be at least 1"));
        }
        for (i, p) in self.points.iter().enumerate() {
            for (name, v) in [("g", p.g), ("g_prime", p.g_prime), ("T", p.temperature)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ConfigError::new(format!("points[{i}].{name}"), "must be nonnegative and finite"));
                }
            }
        }
        Ok(())
    }

    fn validate_grid(&self, task: Task) -> Result<(), ConfigError> {
        let g = &self.grid;
        check_axis("grid.g", g.g_min, g.g_max, g.g_steps)?;
        if task != Task::Eigen {
            check_axis("grid.T", g.t_min, g.t_max, g.t_steps)?;
        }
        if let Some(r) = g.g_prime_ratio {
            if !(r.is_finite() && r >= 0.0) {
                return Err(ConfigError::new("grid.g_prime_ratio", "must be nonnegative and finite"));
            }
        }
        Ok(())
    }

    fn validate_omega(&self) -> Result<(), ConfigError> {
        let o = &self.omega_grid;
        if !(o.min.is_finite() && o.min >= 0.0) {
            return Err(ConfigError::new("omega_grid.min", "must be nonnegative"));
        }
        if !(o.max.is_finite() && o.max > o.min) {
            return Err(ConfigError::new("omega_grid.max", "must exceed omega_grid.min"));
        }
        if o.points < 2 {
            return Err(ConfigError::new("omega_grid.points", "must be at least 2"));
        }
        Ok(())
    }

    fn validate_times(&self) -> Result<(), ConfigError> {
        let t = &self.t_grid;
        match &t.values {
            Some(v) => {
                if v.is_empty() {
                    return Err(ConfigError::new("t_grid.values", "must not be empty"));
                }
                if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(ConfigError::new(format!("t_grid.values[{i}]"), "must be nonnegative and finite"));
                }
                if let Some(i) = v.windows(2).position(|w| !(w[1] > w[0])) {
                    return Err(ConfigError::new(format!("t_grid.values[{}]", i + 1), "times must be strictly increasing"));
                }
            }
            None => {
                if !(t.max.is_finite() && t.max > 0.0) {
                    return Err(ConfigError::new("t_grid.max", "must be positive"));
                }
                if t.points < 2 {
                    return Err(ConfigError::new("t_grid.points", "must be at least 2"));
                }
            }
        }
        Ok(())
    }
}

fn check_axis(prefix: &str, min: f64, max: f64, steps: usize) -> Result<(), ConfigError> {
    if !(min.is_finite() && min > 0.0) {
        return Err(ConfigError::new(format!("{prefix}_min"), format!("must be positive, got {min}")));
    }
    if steps == 0 {
        return Err(ConfigError::new(format!("{prefix}_steps"), "must be at least 1"));
    }
    let ordered = if steps == 1 { max >= min } else { max > min };
    if !(max.is_finite() && ordered) {
        return Err(ConfigError::new(format!("{prefix}_max"), format!("must exceed {prefix}_min")));
    }
    Ok(())
}

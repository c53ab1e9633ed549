use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Built-in scenarios plus user-supplied matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    /// Two qubits under `σ3 ⊗ σ3` with diagonal product metrics.
    HermitianTwoQubit,
    /// A Hermitian qubit coupled to a PT-symmetric qubit.
    PtCoupled,
    /// Direct sum of a Hermitian and a PT-symmetric block.
    NoSeparableMetric,
    /// Hamiltonian, metric and state read from matrix files.
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HermitianTwoQubit => "hermitian-two-qubit",
            Self::PtCoupled => "pt-coupled",
            Self::NoSeparableMetric => "no-separable-metric",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: std::f64::consts::PI,
            steps: 101,
        }
    }
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|k| {
                if k == last {
                    self.stop
                } else {
                    self.start + span * (k as f64 / last as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixPaths {
    pub hamiltonian: Option<PathBuf>,
    pub metric: Option<PathBuf>,
    pub density: Option<PathBuf>,
    /// Parity for the PT verdict; replaces the built-in one.
    pub parity: Option<PathBuf>,
}

/// Everything `run` needs; loadable from JSON with the same field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub t_grid: TimeGrid,
    pub weights_a: Option<Vec<f64>>,
    pub weights_b: Option<Vec<f64>>,
    pub seed: u64,
    pub starts: usize,
    pub tolerance: Option<f64>,
    /// Factor dimensions `(n, m)`; required by `custom` unless the
    /// Hamiltonian has dimension 4.
    pub dims: Option<(usize, usize)>,
    pub matrix_paths: MatrixPaths,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioName::HermitianTwoQubit,
            t_grid: TimeGrid::default(),
            weights_a: None,
            weights_b: None,
            seed: 0,
            starts: 32,
            tolerance: None,
            dims: None,
            matrix_paths: MatrixPaths::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let g = &self.t_grid;
        if g.steps < 1 {
            return Err(CliError::Config("steps must be at least 1".into()));
        }
        if !(g.start.is_finite() && g.stop.is_finite()) || g.stop < g.start {
            return Err(CliError::Config(format!(
                "time grid [{}, {}] must be finite with stop >= start",
                g.start, g.stop
            )));
        }
        for (name, w) in [("weights_a", &self.weights_a), ("weights_b", &self.weights_b)] {
            if let Some(w) = w {
                if w.is_empty() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(CliError::Config(format!("{name} must be a non-empty list of positive numbers")));
                }
            }
        }
        if self.starts == 0 {
            return Err(CliError::Config("starts must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config(format!("tolerance {t} must be positive")));
            }
        }
        if let Some((n, m)) = self.dims {
            if n == 0 || m == 0 {
                return Err(CliError::Config("dims must be positive".into()));
            }
        }
        if self.scenario == ScenarioName::Custom && self.matrix_paths.hamiltonian.is_none() {
            return Err(CliError::Config("custom scenario needs matrix_paths.hamiltonian".into()));
        }
        if self.scenario == ScenarioName::NoSeparableMetric && (self.weights_a.is_some() || self.weights_b.is_some()) {
            return Err(CliError::Config(
                "no-separable-metric has no component metrics to weight".into(),
            ));
        }
        Ok(())
    }
}

/// Parses `1,2.5,3` into positive numbers.
pub fn parse_weights(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(format!("weight {v} must be positive"))
            }
        })
        .collect()
}

/// Parses `n,m`.
pub fn parse_dims(text: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `n,m`, got `{text}`"));
    }
    let n = parts[0].trim().parse().map_err(|_| format!("bad dimension `{}`", parts[0]))?;
    let m = parts[1].trim().parse().map_err(|_| format!("bad dimension `{}`", parts[1]))?;
    Ok((n, m))
}

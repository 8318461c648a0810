//! Run configuration: command-line flags over a JSON config file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const DEFAULT_K: usize = 32;
pub const DEFAULT_SAMPLES: usize = 40;
pub const DEFAULT_GAP_FACTOR: f64 = 2.0;
pub const DEFAULT_EPS_GRID: &str = "0.005,0.01,0.02";
pub const DEFAULT_KAPPA_GRID: &str = "0:2:201";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every field optional, so a file may set any subset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kappa: Option<f64>,
    pub kappa_grid: Option<String>,
    pub eps: Option<f64>,
    pub eps_grid: Option<String>,
    pub mu: Option<f64>,
    pub mu_max: Option<f64>,
    pub samples: Option<usize>,
    #[serde(rename = "K")]
    pub k_max: Option<usize>,
    pub gap_factor: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Invalid(String),
}

/// Resolved settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kappa: Option<f64>,
    pub kappa_grid: String,
    pub eps: Option<f64>,
    pub eps_grid: String,
    pub mu: Option<f64>,
    pub mu_max: Option<f64>,
    pub samples: usize,
    pub k_max: usize,
    pub gap_factor: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn merge(flags: &FileConfig, file: &FileConfig, default_format: Format) -> Self {
        RunConfig {
            kappa: flags.kappa.or(file.kappa),
            kappa_grid: flags
                .kappa_grid
                .clone()
                .or_else(|| file.kappa_grid.clone())
                .unwrap_or_else(|| DEFAULT_KAPPA_GRID.into()),
            eps: flags.eps.or(file.eps),
            eps_grid: flags
                .eps_grid
                .clone()
                .or_else(|| file.eps_grid.clone())
                .unwrap_or_else(|| DEFAULT_EPS_GRID.into()),
            mu: flags.mu.or(file.mu),
            mu_max: flags.mu_max.or(file.mu_max),
            samples: flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            k_max: flags.k_max.or(file.k_max).unwrap_or(DEFAULT_K),
            gap_factor: flags.gap_factor.or(file.gap_factor).unwrap_or(DEFAULT_GAP_FACTOR),
            out: flags.out.clone().or_else(|| file.out.clone()),
            format: flags.format.or(file.format).unwrap_or(default_format),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [self.kappa, self.eps, self.mu, self.mu_max, Some(self.gap_factor)];
        if finite.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid("numeric settings must be finite".into()));
        }
        if !(8..=512).contains(&self.k_max) {
            return Err(ConfigError::Invalid(format!("K must lie in [8, 512], got {}", self.k_max)));
        }
        if let Some(eps) = self.eps {
            if !(0.0..=0.05).contains(&eps) {
                return Err(ConfigError::Invalid(format!("eps must lie in [0, 0.05], got {eps}")));
            }
        }
        if let Some(k) = self.kappa {
            if k < 0.0 {
                return Err(ConfigError::Invalid(format!("kappa must be non-negative, got {k}")));
            }
        }
        if self.samples < 2 {
            return Err(ConfigError::Invalid("samples must be at least 2".into()));
        }
        Ok(())
    }

    pub fn require_kappa(&self) -> Result<f64, ConfigError> {
        self.kappa.ok_or_else(|| ConfigError::Invalid("--kappa is required".into()))
    }

    pub fn require_eps(&self) -> Result<f64, ConfigError> {
        self.eps.ok_or_else(|| ConfigError::Invalid("--eps is required".into()))
    }

    pub fn require_mu(&self) -> Result<f64, ConfigError> {
        self.mu.ok_or_else(|| ConfigError::Invalid("--mu is required".into()))
    }
}

/// `a:b:n` (inclusive, `n` points) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("cannot parse grid {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = if parts.len() == 3 {
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        return Err(bad());
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    let mut values = values;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values)
}

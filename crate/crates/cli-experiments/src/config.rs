//! JSON experiment configuration.

use std::path::Path;

use dyadic_core::{Grid, GridSpec};
use serde::{Deserialize, Serialize};
use weights::MatrixWeight;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthRange {
    pub from: usize,
    pub to: usize,
}

impl DepthRange {
    pub fn values(&self) -> Vec<usize> {
        (self.from..=self.to).collect()
    }
}

/// Every experiment reads the fields it needs and ignores the rest; unknown
/// keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Stem of every output file.
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub weight: Option<MatrixWeight>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub depths: Option<DepthRange>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub density: Option<f64>,
    /// Operator name for `opnorm`.
    #[serde(default)]
    pub operator: Option<String>,
    /// Symbol name: `log-swap` or `random`.
    #[serde(default)]
    pub symbol: Option<String>,
    /// Haar shift name (`left-child`, `right-child`, `random`).
    #[serde(default)]
    pub shift: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.') {
            return Err(CliError::Config(format!("id '{}' must be a non-empty file stem", self.id)));
        }
        if let Some(w) = &self.weight {
            w.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(g) = &self.grid {
            g.build().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(p) = self.p {
            if !(p > 1.0 && p.is_finite()) {
                return Err(CliError::Config(format!("p = {p} must lie in (1, ∞)")));
            }
        }
        if let Some(r) = self.depths {
            if r.from > r.to {
                return Err(CliError::Config(format!("empty depth range {}..={}", r.from, r.to)));
            }
        }
        for a in self.alpha.iter().chain(self.alphas.iter().flatten()) {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(CliError::Config(format!("alpha = {a} must lie in (0, 1)")));
            }
        }
        if let Some(d) = self.density {
            if !(d > 0.0 && d <= 0.5) {
                return Err(CliError::Config(format!("density {d} must lie in (0, 1/2]")));
            }
        }
        Ok(())
    }

    pub fn grid_or(&self, d: usize, depth: usize) -> Result<Grid, CliError> {
        let spec = self.grid.clone().unwrap_or(GridSpec::standard(d, depth));
        spec.build().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn weight_or(&self, w: MatrixWeight) -> MatrixWeight {
        self.weight.clone().unwrap_or(w)
    }

    pub fn p_or(&self, p: f64) -> f64 {
        self.p.unwrap_or(p)
    }

    pub fn depths_or(&self, from: usize, to: usize) -> Vec<usize> {
        self.depths.unwrap_or(DepthRange { from, to }).values()
    }

    pub fn alphas_or(&self, default: &[f64]) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn kind_in(&self, allowed: &[&str], default: &str) -> Result<String, CliError> {
        let k = self.kind.clone().unwrap_or_else(|| default.to_string());
        if allowed.contains(&k.as_str()) {
            Ok(k)
        } else {
            Err(CliError::Config(format!("kind '{k}' is not one of {allowed:?}")))
        }
    }
}

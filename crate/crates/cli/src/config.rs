//! Benchmark configuration files (TOML).
//!
//! ```toml
//! k_values = [2, 3]
//! d_values = [1, 2]
//! n_samples = 2000
//! sigma = 1.0
//! noise = ["gaussian", "laplacian"]
//! repetitions = 10
//! n_iterations = 500
//! rho = 10.0
//! base_seed = 2024
//! lad_path = "auto"      # auto | lp | irls
//! lp_cap = 5000          # auto: LP path when N <= lp_cap
//! normalization = "raw"  # raw | per_component | relative
//! ```

use std::path::Path;

use mlrfit::em::DEFAULT_LP_CAP;
use mlrfit::model::{DEFAULT_ITERATIONS, DEFAULT_RHO};
use mlrfit::{ExperimentGrid, LadPolicy, NoiseKind, Normalization};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub k_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub n_samples: usize,
    pub sigma: f64,
    pub noise: Vec<String>,
    pub repetitions: usize,
    #[serde(default = "default_iterations")]
    pub n_iterations: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_lad_path")]
    pub lad_path: String,
    #[serde(default = "default_lp_cap")]
    pub lp_cap: usize,
    #[serde(default = "default_normalization")]
    pub normalization: String,
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_lad_path() -> String {
    "auto".into()
}

fn default_lp_cap() -> usize {
    DEFAULT_LP_CAP
}

fn default_normalization() -> String {
    Normalization::Raw.as_str().into()
}

/// Parses `auto`, `lp` or `irls`.
pub fn lad_policy(name: &str, lp_cap: usize) -> Result<LadPolicy, String> {
    match name {
        "auto" => Ok(LadPolicy::Auto { lp_cap }),
        "lp" => Ok(LadPolicy::Lp),
        "irls" => Ok(LadPolicy::Irls),
        other => Err(format!("unknown LAD path `{other}` (expected auto, lp or irls)")),
    }
}

pub fn lad_policy_name(policy: LadPolicy) -> &'static str {
    match policy {
        LadPolicy::Auto { .. } => "auto",
        LadPolicy::Lp => "lp",
        LadPolicy::Irls => "irls",
    }
}

impl BenchmarkConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        Self::parse(&text).map_err(|e| CliError::file(path, e))
    }

    pub fn to_grid(&self) -> Result<ExperimentGrid, String> {
        let noise_kinds = self
            .noise
            .iter()
            .map(|s| s.parse::<NoiseKind>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = ExperimentGrid {
            k_values: self.k_values.clone(),
            d_values: self.d_values.clone(),
            n_samples: self.n_samples,
            sigma: self.sigma,
            noise_kinds,
            repetitions: self.repetitions,
            n_iterations: self.n_iterations,
            rho: self.rho,
            base_seed: self.base_seed,
            lad_policy: lad_policy(&self.lad_path, self.lp_cap)?,
            normalization: self.normalization.parse().map_err(|e: mlrfit::MlrError| e.to_string())?,
        };
        grid.validate().map_err(|e| e.to_string())?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
k_values = [2]
d_values = [1, 2]
n_samples = 100
sigma = 0.5
noise = ["laplacian"]
repetitions = 3
"#;

    #[test]
    fn defaults_are_filled_in() {
        let grid = BenchmarkConfig::parse(MINIMAL).unwrap().to_grid().unwrap();
        assert_eq!(grid.rho, DEFAULT_RHO);
        assert_eq!(grid.n_iterations, DEFAULT_ITERATIONS);
        assert_eq!(grid.lad_policy, LadPolicy::default());
        assert_eq!(grid.normalization, Normalization::Raw);
        assert_eq!(grid.noise_kinds, vec![NoiseKind::Laplacian]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(BenchmarkConfig::parse(&format!("{MINIMAL}rhoo = 2.0\n")).unwrap_err().contains("rhoo"));
        let bad = BenchmarkConfig::parse(&format!("{MINIMAL}lad_path = \"simplex\"\n")).unwrap();
        assert!(bad.to_grid().unwrap_err().contains("simplex"));
        let bad = BenchmarkConfig::parse(&MINIMAL.replace("0.5", "0.0")).unwrap();
        assert!(bad.to_grid().is_err());
    }
}

//! Declarative run configuration.
//!
//! One TOML file describes a whole run: backend, dataset, enabled modes
//! and strategies, probing counts, entailment and synonym backends, and
//! budget. Relative paths are resolved against the config file's
//! directory, so a config plus its fixtures is a self-contained,
//! reproducible unit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agreement::{EntailmentBackendSpec, EntailmentDirection};
use crate::analysis::Strategy;
use crate::domain::ExplanationMode;
use crate::gateway::HttpBackendConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Invalid { path: String, message: String },
}

/// Which completion backend a run talks to.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// Scripted mock loaded from a fixture file.
    Mock { fixture: String },
    /// Remote HTTP endpoint.
    Http(HttpBackendConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// JSONL dataset file.
    pub path: String,
}

/// Synonym source for the counterfactual faithfulness test.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynonymConfig {
    Wordlist { path: String },
    Llm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntailmentConfig {
    #[serde(flatten)]
    pub spec: EntailmentBackendSpec,
    #[serde(default)]
    pub direction: EntailmentDirection,
}

fn default_modes() -> Vec<ExplanationMode> {
    vec![ExplanationMode::TokenImportance, ExplanationMode::Cot]
}

fn default_strategies() -> Vec<Strategy> {
    vec![
        Strategy::Verbalized,
        Strategy::SampleProbe,
        Strategy::ModelProbe,
    ]
}

fn default_n_paraphrases() -> u32 {
    10
}

fn default_n_samples() -> u32 {
    5
}

fn default_tau() -> f64 {
    1.0
}

fn default_k() -> usize {
    3
}

fn default_subset_size() -> usize {
    100
}

fn default_max_tokens() -> u32 {
    1024
}

fn default_concurrency() -> usize {
    4
}

fn default_model_name() -> String {
    "default-model".to_string()
}

fn default_run_root() -> String {
    "runs".to_string()
}

fn default_cache_path() -> String {
    "cache.jsonl".to_string()
}

/// Tunables of the pipeline itself. Unknown keys are rejected so
/// config typos fail loudly instead of silently using defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    #[serde(default = "default_model_name")]
    pub model_name: String,
    #[serde(default = "default_modes")]
    pub modes: Vec<ExplanationMode>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    /// Paraphrase count for sample probing.
    #[serde(default = "default_n_paraphrases")]
    pub n_paraphrases: u32,
    /// Sample count for model probing.
    #[serde(default = "default_n_samples")]
    pub n_samples: u32,
    /// Sampling temperature for model probing.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Top-k cutoff for rank agreement.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Questions drawn (seeded, uniform) from the dataset.
    #[serde(default = "default_subset_size")]
    pub subset_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Temperature for original (reference) elicitations.
    #[serde(default)]
    pub base_temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Hard cap on backend calls; absent means unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Run the faithfulness tests as part of the pipeline.
    #[serde(default)]
    pub faithfulness: bool,
    #[serde(default = "default_run_root")]
    pub run_root: String,
    #[serde(default = "default_cache_path")]
    pub cache_path: String,
}

impl Default for RunParams {
    fn default() -> Self {
        toml::from_str("").expect("empty RunParams defaults")
    }
}

/// The whole declarative run description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub backend: BackendConfig,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub run: RunParams,
    /// Entailment backend for CoT scoring. Defaults to the LLM judge,
    /// since a run always has a gateway configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entailment: Option<EntailmentConfig>,
    /// Synonym provider for the counterfactual test. Defaults to the
    /// LLM prompt for HTTP backends and an empty wordlist for mocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonyms: Option<SynonymConfig>,
}

/// A parsed config plus the directory its relative paths resolve
/// against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.base_dir.join(relative)
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.resolve(&self.config.dataset.path)
    }

    pub fn run_root(&self) -> PathBuf {
        self.resolve(&self.config.run.run_root)
    }

    pub fn cache_path(&self) -> PathBuf {
        self.resolve(&self.config.run.cache_path)
    }

    /// Hex digest identifying the effective configuration; the run
    /// directory is content-addressed by this, so distinct configs never
    /// collide and re-running the same config reuses its directory.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))[..16].to_string()
    }
}

/// Loads and validates a TOML run config.
pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Invalid {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    validate(&config).map_err(|message| ConfigError::Invalid {
        path: path.display().to_string(),
        message,
    })?;
    let base_dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(LoadedConfig { config, base_dir })
}

/// Field-level validation beyond what deserialization enforces.
pub fn validate(config: &RunConfig) -> Result<(), String> {
    let run = &config.run;
    if config.dataset.path.trim().is_empty() {
        return Err("dataset.path must not be empty".to_string());
    }
    if run.modes.is_empty() {
        return Err("run.modes must name at least one mode".to_string());
    }
    if run.strategies.is_empty() {
        return Err("run.strategies must name at least one strategy".to_string());
    }
    if run.n_paraphrases == 0 {
        return Err("run.n_paraphrases must be >= 1".to_string());
    }
    if run.n_samples == 0 {
        return Err("run.n_samples must be >= 1".to_string());
    }
    if run.k == 0 {
        return Err("run.k must be >= 1".to_string());
    }
    if run.subset_size == 0 {
        return Err("run.subset_size must be >= 1".to_string());
    }
    if run.tau.is_nan() || run.tau < 0.0 {
        return Err("run.tau must be >= 0".to_string());
    }
    if run.base_temperature.is_nan() || run.base_temperature < 0.0 {
        return Err("run.base_temperature must be >= 0".to_string());
    }
    if run.concurrency == 0 {
        return Err("run.concurrency must be >= 1".to_string());
    }
    if run.model_name.trim().is_empty() {
        return Err("run.model_name must not be empty".to_string());
    }
    if let Some(entailment) = &config.entailment {
        entailment.spec.validate().map_err(|e| e.to_string())?;
    }
    Ok(())
}

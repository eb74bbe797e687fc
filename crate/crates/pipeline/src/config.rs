//! Optional TOML configuration for `generate`; command-line flags win.

use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use sfcgen_core::safety::VerifyLimits;
use thiserror::Error;

use crate::generate::GenerationConfig;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub samples: Option<usize>,
    pub few_shot: Option<usize>,
    pub constrained: Option<bool>,
    pub max_retries: Option<u32>,
    pub max_states: Option<usize>,
    pub max_time_secs: Option<u64>,
    pub parallelism: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: String, source: toml::de::Error },
    #[error("{0}")]
    Limits(#[from] sfcgen_core::safety::LimitsError),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: shown.clone(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigFileError::Toml { path: shown, source })
    }

    /// Overlays `other` on `self`: fields set in `other` win.
    pub fn overlay(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            endpoint: other.endpoint.or(self.endpoint),
            model: other.model.or(self.model),
            temperature: other.temperature.or(self.temperature),
            samples: other.samples.or(self.samples),
            few_shot: other.few_shot.or(self.few_shot),
            constrained: other.constrained.or(self.constrained),
            max_retries: other.max_retries.or(self.max_retries),
            max_states: other.max_states.or(self.max_states),
            max_time_secs: other.max_time_secs.or(self.max_time_secs),
            parallelism: other.parallelism.or(self.parallelism),
            seed: other.seed.or(self.seed),
        }
    }

    /// Fills unset fields with defaults.
    pub fn resolve(self) -> Result<GenerationConfig, ConfigFileError> {
        let d = GenerationConfig::default();
        let limits = VerifyLimits::new(
            self.max_states.unwrap_or(d.limits.max_states),
            self.max_time_secs.map_or(d.limits.max_time, Duration::from_secs),
        )?;
        Ok(GenerationConfig {
            endpoint: self.endpoint.unwrap_or(d.endpoint),
            model: self.model.unwrap_or(d.model),
            temperature: self.temperature.unwrap_or(d.temperature),
            samples: self.samples.unwrap_or(d.samples),
            few_shot: self.few_shot.unwrap_or(d.few_shot),
            constrained: self.constrained.unwrap_or(d.constrained),
            max_retries: self.max_retries.unwrap_or(d.max_retries),
            limits,
            parallelism: self.parallelism.unwrap_or(d.parallelism),
            seed: self.seed.unwrap_or(d.seed),
        })
    }
}

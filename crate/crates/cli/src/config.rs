//! Run configuration: one JSON file with flat sections, every field
//! overridable by a CLI flag (the flag wins).

use std::path::{Path, PathBuf};

use embalign_core::{AlignmentParams, ProviderConfig, RateLimiterConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub provider: ProviderConfig,
    pub rate: RateLimiterConfig,
    pub align: AlignmentParams,
    pub cache_path: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::default(),
            rate: RateLimiterConfig::default(),
            align: AlignmentParams::default(),
            cache_path: PathBuf::from("embeddings.cache"),
            seed: 42,
        }
    }
}

impl RunConfig {
    /// Load from a JSON file, or defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))
            }
        }
    }
}

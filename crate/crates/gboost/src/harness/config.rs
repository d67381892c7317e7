//! JSON run configuration. Every search hyperparameter lives under the
//! `search` section; the rest describes the task source.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::SearchConfig;
use crate::error::{GBoostError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub search: SearchConfig,
    /// Synthetic profile used when no task file is given and for building
    /// the in-memory backends: "complementary", "tuned-strong", or
    /// "general-strong".
    #[serde(default = "default_profile")]
    pub profile: String,
    /// Number of tasks to generate when no task file is given.
    #[serde(default = "default_n_tasks")]
    pub n_tasks: usize,
    /// Seed for task generation and the synthetic models.
    #[serde(default)]
    pub task_seed: u64,
}

fn default_profile() -> String {
    "complementary".to_string()
}

fn default_n_tasks() -> usize {
    50
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            profile: default_profile(),
            n_tasks: default_n_tasks(),
            task_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| GBoostError::InvalidInput(format!("config {}: {e}", path.display())))?;
        cfg.search.validate()?;
        Ok(cfg)
    }
}

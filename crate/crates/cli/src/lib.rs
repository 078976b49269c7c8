//! File formats, experiment reports and configuration for the `depdag`
//! command-line tool.

pub mod io;
pub mod report;

use std::path::Path;

use anyhow::{Context, Result};
use depdag_core::experiment::ExperimentConfig;

/// Loads an experiment configuration; missing fields take their defaults.
pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

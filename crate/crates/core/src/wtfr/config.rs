//! Flat key-value (TOML) configuration for the loss.
//!
//! ```toml
//! alpha = 0.5
//! beta = 1.0
//! delta = 0.05
//! phase_mode = "wrapped"   # or "raw"
//! weighting = true
//! ```
//!
//! Missing keys keep their defaults; unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use super::WtfrConfig;
use crate::error::{Error, Result};
use crate::tfc::PhaseMode;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    alpha: Option<f64>,
    beta: Option<f64>,
    delta: Option<f64>,
    phase_mode: Option<PhaseMode>,
    weighting: Option<bool>,
}

pub fn parse_config(text: &str) -> Result<WtfrConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let d = WtfrConfig::default();
    let cfg = WtfrConfig {
        alpha: file.alpha.unwrap_or(d.alpha),
        beta: file.beta.unwrap_or(d.beta),
        delta: file.delta.unwrap_or(d.delta),
        phase_mode: file.phase_mode.unwrap_or(d.phase_mode),
        weighting: file.weighting.unwrap_or(d.weighting),
        gradient_flow: d.gradient_flow,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<WtfrConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

//! Bundled scenario configs, one per reproduced experiment.

use crate::config::ScenarioConfig;
use crate::error::RunnerError;

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../presets/", $name, ".toml")))
    };
}

/// `(name, TOML text)` for every bundled preset.
pub const PRESETS: &[(&str, &str)] = &[
    preset!("stefan-plant"),
    preset!("stefan-full-observer"),
    preset!("stefan-joint-observer"),
    preset!("stefan-baseline-observer"),
    preset!("seaice-annual-cycle"),
    preset!("seaice-observer"),
    preset!("seaice-observer-fast"),
    preset!("seaice-observer-slow"),
    preset!("seaice-openloop"),
    preset!("seaice-robustness"),
    preset!("battery-discharge"),
    preset!("battery-estimation"),
    preset!("battery-ekf"),
    preset!("battery-estimation-noisy"),
    preset!("battery-ekf-noisy"),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load_preset(name: &str) -> Result<ScenarioConfig, RunnerError> {
    let text = preset_text(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        RunnerError::Config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
    })?;
    ScenarioConfig::from_toml(text).map_err(|e| match e {
        RunnerError::Config(msg) => RunnerError::Config(format!("preset {name}: {msg}")),
        other => other,
    })
}

/// First comment line of a preset.
pub fn description(text: &str) -> &str {
    text.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("")
}

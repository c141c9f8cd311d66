//! Scenario configuration. One TOML file selects the model, the run mode and
//! optional overrides; everything left out takes the preset defaults.

use std::path::{Path, PathBuf};

use phasefront::battery::EkfParams;
use serde::{Deserialize, Serialize};

use crate::error::RunnerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Stefan,
    Seaice,
    Battery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    ObserveFull,
    ObserveJoint,
    ObserveBaseline,
    ObserveOpenloop,
    Ekf,
    Robustness,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::ObserveFull => "observe-full",
            Mode::ObserveJoint => "observe-joint",
            Mode::ObserveBaseline => "observe-baseline",
            Mode::ObserveOpenloop => "observe-openloop",
            Mode::Ekf => "ekf",
            Mode::Robustness => "robustness",
        }
    }

    pub fn is_estimator(self) -> bool {
        self != Mode::Simulate
    }
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Stefan => "stefan",
            Model::Seaice => "seaice",
            Model::Battery => "battery",
        }
    }

    fn modes(self) -> &'static [Mode] {
        match self {
            Model::Stefan => &[Mode::Simulate, Mode::ObserveFull, Mode::ObserveJoint, Mode::ObserveBaseline],
            Model::Seaice => &[Mode::Simulate, Mode::ObserveFull, Mode::ObserveOpenloop, Mode::Robustness],
            Model::Battery => &[Mode::Simulate, Mode::ObserveFull, Mode::Ekf],
        }
    }
}

/// Seeded Gaussian noise on the measured channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StefanOverrides {
    pub conductivity: Option<f64>,
    pub density: Option<f64>,
    pub heat_capacity: Option<f64>,
    pub latent_heat: Option<f64>,
    pub melt_temp: Option<f64>,
    pub domain_len: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StefanConfig {
    #[serde(default)]
    pub params: StefanOverrides,
    /// Boundary heat flux, W/m^2.
    pub flux: Option<f64>,
    /// Initial interface position, m.
    pub s0: Option<f64>,
    pub nodes: Option<usize>,
    /// RK4 steps between recorded samples.
    pub stride: Option<usize>,
    pub lambda: Option<f64>,
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaIceConfig {
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub ice_nodes: Option<usize>,
    pub snow_nodes: Option<usize>,
    /// Time between recorded samples, s.
    pub sample_interval: Option<f64>,
    pub salinity: Option<bool>,
    /// Length of an annual run, years.
    pub years: Option<usize>,
    /// Relative errors in the observer's `D_i`, `beta`, `F_w`.
    pub deltas: Option<[f64; 3]>,
    /// Monthly forcing table replacing the bundled one.
    pub forcing: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub c_rate: Option<f64>,
    /// Current density taken as 1C, A/m^2.
    pub one_c: Option<f64>,
    pub shell_nodes: Option<usize>,
    pub neg_nodes: Option<usize>,
    pub contact_resistance: Option<bool>,
    /// Measurement sampling period, s.
    pub measurement_interval: Option<f64>,
    /// True and estimated initial interface over `R_p+`.
    pub true_interface: Option<f64>,
    pub estimate_interface: Option<f64>,
    pub ocp_pos: Option<PathBuf>,
    pub ocp_neg: Option<PathBuf>,
    pub ekf: Option<EkfParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: Model,
    pub mode: Mode,
    /// Simulated time, s.
    pub horizon: Option<f64>,
    /// Write every `output_stride`-th sample; the last sample is always written.
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    pub output_dir: Option<PathBuf>,
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub stefan: StefanConfig,
    #[serde(default)]
    pub seaice: SeaIceConfig,
    #[serde(default)]
    pub battery: BatteryConfig,
}

fn default_stride() -> usize {
    1
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunnerError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema checks that serde cannot express. Relative asset paths are
    /// taken as given (relative to the working directory).
    pub fn validate(&self) -> Result<(), RunnerError> {
        if !self.model.modes().contains(&self.mode) {
            return Err(RunnerError::Config(format!("mode `{}` is not available for model `{}`", self.mode.name(), self.model.name())));
        }
        if self.output_stride == 0 {
            return Err(RunnerError::Config("output_stride must be at least 1".into()));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) || !h.is_finite() {
                return Err(RunnerError::Config(format!("horizon must be positive, got {h}")));
            }
        }
        if let Some(n) = self.noise {
            if !(n.std >= 0.0) || !n.std.is_finite() {
                return Err(RunnerError::Config("noise.std must be non-negative".into()));
            }
            if self.model != Model::Battery {
                return Err(RunnerError::Config("measurement noise is only modelled for the battery".into()));
            }
        }
        let assets = [&self.seaice.forcing, &self.battery.ocp_pos, &self.battery.ocp_neg];
        for path in assets.into_iter().flatten() {
            if !path.is_file() {
                return Err(RunnerError::Config(format!("asset {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_toml(&text).map_err(|e| match e {
        RunnerError::Config(msg) => RunnerError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

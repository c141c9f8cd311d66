//! Configuration, scenario orchestration and persistence for the
//! `phasefront` command-line tool.

pub mod compare;
pub mod config;
pub mod error;
pub mod presets;
pub mod records;
pub mod run;
pub mod summary;

pub use config::{load_config, Mode, Model, ScenarioConfig};
pub use error::RunnerError;
pub use run::{execute, RunContext, RunOutput};

//! Moving-boundary heat and diffusion models with PDE state estimators.
//!
//! * [`stefan`]: one-phase Stefan problem in boundary-fixed coordinates.
//! * [`observers`]: backstepping estimators for the Stefan problem.
//! * [`seaice`]: two-layer snow/ice thermodynamics and its thickness observer.
//! * [`battery`]: single-particle cell with a core-shell positive particle.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod battery;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod observers;
pub mod real;
pub mod seaice;
pub mod stefan;

pub use error::{Error, NumericsError, Result};
pub use real::Real;

pub type StefanParams = stefan::StefanParams<f64>;
pub type StefanState = stefan::StefanState<f64>;
pub type HeatInput = stefan::HeatInput<f64>;
pub type StefanTrajectory = stefan::StefanTrajectory<f64>;
pub type ObserverGains = observers::ObserverGains<f64>;
pub type SeaIceParams = seaice::SeaIceParams<f64>;
pub type SeaIceState = seaice::SeaIceState<f64>;
pub type MonthlyForcing = seaice::MonthlyForcing<f64>;
pub type SeaIceObserverParams = seaice::SeaIceObserverParams<f64>;
pub type SeaIceObserverScenario = seaice::SeaIceObserverScenario<f64>;
pub type CellParams = battery::CellParams<f64>;
pub type CellState = battery::CellState<f64>;
pub type ShellState = battery::ShellState<f64>;
pub type NegParticleState = battery::NegParticleState<f64>;
pub type BatteryObserverParams = battery::BatteryObserverParams<f64>;
pub type EstimationScenario = battery::EstimationScenario<f64>;

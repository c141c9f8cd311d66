//! Single-particle cell with a shrinking-core positive electrode and its
//! state-of-charge estimators.
//!
//! The positive particle holds a lithium-poor core at `c_alpha` inside a
//! shell whose inner edge sits at `c_beta` and moves with the interface
//! mass balance. Both particles use conservative finite volumes, so the
//! lithium total is constant on the grid. The backstepping observer injects
//! the surface error with Bessel gains; the negative observer's gains keep
//! the estimated total fixed. An extended Kalman filter on a coarse shell
//! model serves as the comparison baseline.

mod ekf;
mod model;
mod observer;
mod ocp;
mod params;
pub mod presets;

pub use ekf::run_ekf;
pub use model::{
    neg_average, neg_rhs, pos_average, shell_rhs, simulate_discharge, terminal_voltage, total_lithium, BatteryOptions, CellState,
    DischargeSample, DischargeTrajectory, NegParticleState, ShellState,
};
pub use observer::{
    gain_p, gain_q, matched_negative, observer_gains_neg, observer_gains_pos, observer_rhs_neg, observer_rhs_pos, run_estimation,
    weighted_error, BatteryObserverParams, EkfParams, EstimationSample, EstimationScenario, EstimationTrajectory, InterfaceMode,
    NoiseSpec, INTERFACE_GUARD,
};
pub use ocp::{OcpCurve, OcpPair};
pub use params::{butler_volmer, exchange_current, molar_flux, soc, soc_window, CellParams, Electrode, ElectrodeParams};

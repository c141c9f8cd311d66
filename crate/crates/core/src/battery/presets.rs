//! Reference cell experiments.

use crate::error::Result;
use crate::real::Real;

use super::model::{BatteryOptions, CellState, ShellState};
use super::observer::{matched_negative, BatteryObserverParams, EkfParams, EstimationScenario, NoiseSpec};
use super::ocp::OcpPair;
use super::params::CellParams;

/// Current density taken as 1C, A/m^2.
pub const ONE_C: f64 = 3.0;
/// Discharge rate of the reference experiments.
pub const C_RATE: f64 = 5.0;
/// True initial interface over `R_p+` (positive SoC about 66 %).
pub const TRUE_INTERFACE: f64 = 0.65;
/// Estimated initial interface over `R_p+` (positive SoC about 46 %).
pub const ESTIMATE_INTERFACE: f64 = 0.80;
/// Initial negative stoichiometry.
pub const NEG_STOICHIOMETRY: f64 = 0.8;
/// Backstepping decay rate, 1/s.
pub const REFERENCE_LAMBDA: f64 = 0.3;
/// Interface injection gain, m/s.
pub const REFERENCE_KAPPA: f64 = 2e-7;
/// Measurement noise of the noisy comparison, mol/m^3.
pub const REFERENCE_NOISE_STD: f64 = 50.0;
pub const REFERENCE_SEED: u64 = 7;

pub fn reference_current<T: Real>() -> T {
    T::lit(C_RATE * ONE_C)
}

pub fn reference_observer<T: Real>() -> BatteryObserverParams<T> {
    BatteryObserverParams { lambda: T::lit(REFERENCE_LAMBDA), kappa: T::lit(REFERENCE_KAPPA), ekf: EkfParams::default() }
}

/// Truth at the reference interface with the quasi-steady shell.
pub fn truth_initial<T: Real>(params: &CellParams<T>, opts: &BatteryOptions) -> CellState<T> {
    let r_p = T::lit(TRUE_INTERFACE) * params.pos.radius;
    CellState::initial(params, reference_current(), r_p, T::lit(NEG_STOICHIOMETRY), opts)
}

/// Estimate with a uniform shell at `c_beta` and the negative particle set
/// so that the lithium total matches the truth.
pub fn estimate_initial<T: Real>(params: &CellParams<T>, truth: &CellState<T>, r_hat: T, opts: &BatteryOptions) -> CellState<T> {
    let shell = ShellState::uniform(r_hat, params.c_beta, opts.shell_nodes);
    let neg = matched_negative(truth, &shell, params, opts.neg_nodes);
    CellState { time: truth.time, neg, shell }
}

/// Constant 5C discharge with backstepping estimation from a 20-point SoC error.
pub fn estimation<T: Real>(noise: Option<NoiseSpec>, horizon: f64) -> Result<EstimationScenario<T>> {
    let params = CellParams::table();
    let options = BatteryOptions::default();
    let truth = truth_initial(&params, &options);
    let estimate = estimate_initial(&params, &truth, T::lit(ESTIMATE_INTERFACE) * params.pos.radius, &options);
    let sc = EstimationScenario {
        params,
        ocp: OcpPair::synthetic(),
        current: reference_current(),
        truth,
        estimate,
        obs: reference_observer(),
        noise,
        measurement_interval: 1.0,
        horizon: T::lit(horizon),
        options,
        pin_interface: false,
    };
    sc.validate()?;
    Ok(sc)
}

/// The estimation experiment with the observer on the true interface.
pub fn pinned_interface<T: Real>(horizon: f64) -> Result<EstimationScenario<T>> {
    let mut sc = estimation::<T>(None, horizon)?;
    let shell = ShellState::uniform(sc.truth.shell.r_p, sc.params.c_beta, sc.options.shell_nodes);
    sc.estimate.neg = matched_negative(&sc.truth, &shell, &sc.params, sc.options.neg_nodes);
    sc.estimate.shell = shell;
    sc.pin_interface = true;
    Ok(sc)
}

pub fn reference_noise() -> NoiseSpec {
    NoiseSpec { std: REFERENCE_NOISE_STD, seed: REFERENCE_SEED }
}

//! Reference scenarios for the Stefan estimators: a zinc-like melt heated by a
//! constant boundary flux, started from a flux-consistent linear profile.

use super::{ObserverGains, ObserverMode, ObserverScenario};
use crate::error::Result;
use crate::real::Real;
use crate::stefan::{HeatInput, SimOptions, StefanParams, StefanState};

/// Boundary heat flux, W/m^2.
pub const REFERENCE_FLUX: f64 = 1e5;
/// Initial interface position, m.
pub const REFERENCE_S0: f64 = 0.1;
/// Target decay rate of the full-state observer, 1/s.
pub const REFERENCE_LAMBDA: f64 = 0.05;
/// Interface injection gain of the joint estimator, m/(s K).
pub const REFERENCE_L: f64 = 1e-4;
/// Horizon of the full-state observer run, s.
pub const FULL_HORIZON: f64 = 300.0;
/// Horizon of the joint comparison, s.
pub const JOINT_HORIZON: f64 = 600.0;

/// Plant, flux, initial interface and grid shared by the Stefan scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct StefanSetup<T> {
    pub params: StefanParams<T>,
    pub flux: T,
    pub s0: T,
    pub options: SimOptions,
}

impl<T: Real> StefanSetup<T> {
    pub fn reference() -> Self {
        Self {
            params: StefanParams::zinc(),
            flux: T::lit(REFERENCE_FLUX),
            s0: T::lit(REFERENCE_S0),
            options: SimOptions { nodes: 51, stride: 200, ..SimOptions::default() },
        }
    }

    /// Flux-consistent linear plant profile.
    pub fn plant(&self) -> Result<StefanState<T>> {
        Ok(StefanState::linear(&self.params, self.options.grid()?, self.s0, self.flux))
    }

    /// Linear estimate with the interface scaled by `s_ratio` and the
    /// superheat by `heat_ratio`.
    pub fn estimate(&self, s_ratio: T, heat_ratio: T) -> Result<StefanState<T>> {
        Ok(StefanState::linear(&self.params, self.options.grid()?, self.s0 * s_ratio, self.flux * heat_ratio))
    }

    /// Full-state observer from an estimate at 30 % of the true superheat.
    pub fn full_observer(&self, lambda: T) -> Result<ObserverScenario<T>> {
        Ok(ObserverScenario {
            params: self.params,
            input: HeatInput::constant(self.flux),
            plant_init: self.plant()?,
            estimate_init: self.estimate(T::one(), T::lit(0.3))?,
            gains: ObserverGains { lambda, l: T::zero() },
            mode: ObserverMode::Full,
            horizon: T::lit(FULL_HORIZON),
            options: self.options,
        })
    }

    /// Joint estimator (or its baseline) from an interface guess 30 % short
    /// and half the true superheat.
    pub fn joint_comparison(&self, gains: ObserverGains<T>, mode: ObserverMode) -> Result<ObserverScenario<T>> {
        Ok(ObserverScenario {
            params: self.params,
            input: HeatInput::constant(self.flux),
            plant_init: self.plant()?,
            estimate_init: self.estimate(T::lit(0.7), T::lit(0.5))?,
            gains,
            mode,
            horizon: T::lit(JOINT_HORIZON),
            options: self.options,
        })
    }
}

/// Full-state observer on the reference setup.
pub fn full_observer<T: Real>(lambda: T) -> ObserverScenario<T> {
    StefanSetup::reference().full_observer(lambda).expect("reference grid is valid")
}

/// Joint estimator (or its baseline) on the reference setup.
pub fn joint_comparison<T: Real>(mode: ObserverMode) -> ObserverScenario<T> {
    let gains = ObserverGains { lambda: T::lit(REFERENCE_LAMBDA), l: T::lit(REFERENCE_L) };
    StefanSetup::reference().joint_comparison(gains, mode).expect("reference grid is valid")
}

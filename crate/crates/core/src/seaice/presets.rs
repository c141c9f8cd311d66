//! Reference column scenarios: a 2.8 m floe under 0.3 m of snow starting on
//! 1 January with the tabulated monthly forcing.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::real::Real;

use super::forcing::{MonthlyForcing, SnowSchedule, DAY_SECONDS};
use super::model::{SeaIceOptions, SeaIceState};
use super::observer::{quadratic_estimate, Perturbation, SeaIceObserverMode, SeaIceObserverParams, SeaIceObserverScenario};
use super::params::SeaIceParams;

/// Initial snow depth, m.
pub const REFERENCE_SNOW: f64 = 0.3;
/// Initial ice thickness, m.
pub const REFERENCE_THICKNESS: f64 = 2.8;
/// Amplitude of the sinusoid on the initial ice profile, C.
pub const WAVE_AMPLITUDE: f64 = 1.0;
/// Shape parameter of the quadratic initial estimate.
pub const ESTIMATE_BEND: f64 = 0.25;
/// Observer decay rates used across the comparison runs, 1/s.
pub const REFERENCE_LAMBDAS: [f64; 3] = [5e-6, 1e-5, 5e-7];
/// Parameter errors of the robustness run.
pub const ROBUSTNESS_DELTAS: [f64; 3] = [0.3, -0.3, 0.4];

/// Snow depth added per month (m), January first: autumn accumulation, light
/// winter and spring falls, none in summer.
pub const REFERENCE_SNOWFALL: [f64; 12] = [0.02, 0.02, 0.02, 0.02, 0.03, 0.0, 0.0, 0.05, 0.12, 0.08, 0.03, 0.02];

/// Multi-year plant run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualScenario<T> {
    pub params: SeaIceParams<T>,
    pub forcing: MonthlyForcing<T>,
    pub snowfall: SnowSchedule<T>,
    pub init: SeaIceState<T>,
    pub years: usize,
    pub options: SeaIceOptions,
}

/// Reference initial column under the January forcing.
pub fn initial_column<T: Real>(params: &SeaIceParams<T>, forcing: &MonthlyForcing<T>, opts: &SeaIceOptions) -> Result<SeaIceState<T>> {
    SeaIceState::initial(
        params,
        forcing.at(T::zero()).total(),
        T::lit(REFERENCE_SNOW),
        T::lit(REFERENCE_THICKNESS),
        T::lit(WAVE_AMPLITUDE),
        opts,
        T::zero(),
    )
}

/// Four years of the annual cycle with the reference snowfall, sampled daily.
pub fn annual<T: Real>() -> Result<AnnualScenario<T>> {
    let params = SeaIceParams::table();
    let forcing = MonthlyForcing::table();
    let options = SeaIceOptions::default();
    let init = initial_column(&params, &forcing, &options)?;
    Ok(AnnualScenario {
        params,
        forcing,
        snowfall: SnowSchedule { per_month: REFERENCE_SNOWFALL.iter().map(|v| T::lit(*v)).collect() },
        init,
        years: 4,
        options,
    })
}

/// January observer run from the quadratic estimate, sampled hourly for
/// `days` days. The estimate starts at the measured thickness.
pub fn january_observer<T: Real>(lambda: T, mode: SeaIceObserverMode, days: f64) -> Result<SeaIceObserverScenario<T>> {
    let params = SeaIceParams::table();
    let forcing = MonthlyForcing::table();
    let options = SeaIceOptions { sample_interval: 3600.0, ..SeaIceOptions::default() };
    let plant_init = initial_column(&params, &forcing, &options)?;
    let estimate_init = quadratic_estimate(plant_init.ice[0], params.tm2, T::lit(ESTIMATE_BEND), options.ice_nodes);
    Ok(SeaIceObserverScenario {
        thickness_est_init: plant_init.thickness,
        params,
        forcing,
        snowfall: SnowSchedule::default(),
        plant_init,
        estimate_init,
        obs: SeaIceObserverParams::reference(lambda),
        mode,
        perturbation: Perturbation::default(),
        horizon: T::lit(days * DAY_SECONDS),
        options,
    })
}

/// The observer with `D_i`, `beta`, `F_w` off by the reference deltas.
pub fn robustness<T: Real>(days: f64) -> Result<(SeaIceObserverScenario<T>, Perturbation<T>)> {
    let sc = january_observer(T::lit(REFERENCE_LAMBDAS[0]), SeaIceObserverMode::Backstepping, days)?;
    let [d1, d2, d3] = ROBUSTNESS_DELTAS;
    Ok((sc, Perturbation { diffusivity: T::lit(d1), beta: T::lit(d2), ocean_flux: T::lit(d3) }))
}

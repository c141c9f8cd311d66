//! Snow-covered sea-ice column with salinity-dependent ice properties, and
//! a backstepping estimator of the ice temperature driven by thickness and
//! ice-top temperature measurements.
//!
//! Depth `x` points down from the snow/ice interface. The snow occupies
//! `-h < x < 0`, the ice `0 < x < H`. Both layers are mapped onto fixed unit
//! grids. The surface temperature solves the radiative balance
//!
//! ```text
//! F_a - I0 - sigma (T + 273)^4 + k dT/dx = 0          (T < Tm1)
//! F_a - I0 - sigma (T + 273)^4 + k dT/dx = -q h_dot   (T = Tm1)
//! ```
//!
//! and the bottom grows by `q H_dot = k_i T_x(H) - F_w`. Once the snow is
//! gone, surface melt removes ice from the top instead.

mod forcing;
mod model;
mod observer;
mod params;
pub mod presets;
mod surface;

pub use forcing::{month_index, next_month_start, MonthFlux, MonthlyForcing, SnowSchedule, DAY_SECONDS, MONTH_SECONDS, YEAR_SECONDS};
pub use model::{
    seaice_rhs, simulate, simulate_annual, surface_step, SeaIceOptions, SeaIceRates, SeaIceSample, SeaIceState,
    SeaIceTrajectory, K_FLOOR,
};
pub use observer::{
    gain_p1, gain_p3, gain_p4, observer_boundaries, observer_gains, observer_rhs, quadratic_estimate, robustness_metrics,
    robustness_run, run_observer, GainBundle, Measurements, ObserverModel, Perturbation, RobustnessMetrics,
    SeaIceObserverMode, SeaIceObserverParams, SeaIceObserverSample, SeaIceObserverScenario, SeaIceObserverState,
    SeaIceObserverTrajectory, PROBE_FRACTIONS,
};
pub use params::{effective_coeffs, salinity, SalinitySpec, SeaIceParams, KJ_TO_J, SALINITY_GUARD};
pub use surface::{initial_interface_temperature, solve_surface, SurfaceStep, MAX_NEWTON};

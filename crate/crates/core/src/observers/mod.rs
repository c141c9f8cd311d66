//! Backstepping state estimators for the one-phase Stefan problem.
//!
//! The full-state observer measures the interface position and the boundary
//! temperature; the joint estimator measures the boundary temperature only
//! and reconstructs the interface with an injected ODE copy.

mod estimator;
mod gains;
mod kernel;
mod norms;
pub mod presets;

pub use estimator::{
    full_observer_rhs, joint_observer_rhs, run_observer, ObserverMode, ObserverSample, ObserverScenario,
    ObserverTrajectory, PROBE_FRACTIONS,
};
pub use gains::{gain_p1, gain_p2, ObserverGains};
pub use kernel::{
    forward_transform, inverse_transform, kernel_p, kernel_q, kernel_residual, kernel_solution, KernelKind,
};
pub use norms::{h1_error_norm, ErrorNorms};

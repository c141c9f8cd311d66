//! Special functions, linear solves, quadrature and time stepping shared by
//! every model.

mod bessel;
mod grid;
mod interp;
mod linalg;
mod ode;
mod quadrature;

pub use bessel::{
    bessel_i, bessel_j, bessel_ratio_i, bessel_ratio_i_sq, bessel_ratio_j, I_ARG_LIMIT, MAX_ORDER,
    SERIES_LIMIT,
};
pub use grid::{diff_left, diff_right, gradient, GridSpec};
pub use interp::{interp_uniform, Pchip};
pub use linalg::solve_tridiagonal;
pub use ode::{diffusion_step_limit, rk4_step, CFL_SAFETY};
pub use quadrature::{cumulative_trapezoid, integrate_trapezoid, integrate_trapezoid_uniform};

//! One-phase Stefan problem in boundary-fixed coordinates.
//!
//! The liquid occupies `0 < x < s(t)`, heated at `x = 0` by the flux `q_c`
//! and held at the melting temperature at the moving interface. With
//! `xi = x / s` the heat equation becomes
//!
//! ```text
//! theta_t = (alpha / s^2) theta_xixi + (xi s_dot / s) theta_xi
//! theta_xi(0) = -q_c s / k,   theta(1) = T_m,   s_dot = -(beta / s) theta_xi(1)
//! ```
//!
//! discretised with central differences, a ghost node for the flux condition
//! and a second-order one-sided difference for the interface gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{diff_right, diffusion_step_limit, integrate_trapezoid_uniform, rk4_step, GridSpec};
use crate::real::Real;

/// Material and geometry of the melt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StefanParams<T> {
    /// Thermal conductivity, W/(m K).
    pub conductivity: T,
    /// Liquid density, kg/m^3.
    pub density: T,
    /// Specific heat, J/(kg K).
    pub heat_capacity: T,
    /// Latent heat of fusion, J/kg.
    pub latent_heat: T,
    /// Melting temperature, K.
    pub melt_temp: T,
    /// Length of the material, m.
    pub domain_len: T,
}

impl<T: Real> StefanParams<T> {
    /// Zinc-like material on a 1 m bar.
    pub fn zinc() -> Self {
        Self {
            conductivity: T::lit(116.0),
            density: T::lit(6570.0),
            heat_capacity: T::lit(389.5),
            latent_heat: T::lit(111_961.0),
            melt_temp: T::lit(692.68),
            domain_len: T::lit(1.0),
        }
    }

    /// `alpha = k / (rho C_p)`, m^2/s.
    pub fn alpha(&self) -> T {
        self.conductivity / (self.density * self.heat_capacity)
    }

    /// `beta = k / (rho dH)`, m^2/(s K).
    pub fn beta(&self) -> T {
        self.conductivity / (self.density * self.latent_heat)
    }

    /// Smallest interface position before the run is declared collapsed.
    pub fn s_min(&self) -> T {
        T::lit(1e-6) * self.domain_len
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("conductivity", self.conductivity),
            ("density", self.density),
            ("heat_capacity", self.heat_capacity),
            ("latent_heat", self.latent_heat),
            ("domain_len", self.domain_len),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite")));
            }
        }
        if !self.melt_temp.is_finite() {
            return Err(Error::InvalidParams("melt_temp must be finite".into()));
        }
        Ok(())
    }
}

/// Boundary heat flux `q_c(t)`, piecewise constant in time (W/m^2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HeatInput<T> {
    Constant { flux: T },
    /// `flux[i]` applies from `start[i]` until the next start time.
    Schedule { start: Vec<T>, flux: Vec<T> },
}

impl<T: Real> HeatInput<T> {
    pub fn constant(flux: T) -> Self {
        HeatInput::Constant { flux }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HeatInput::Constant { flux } if flux.is_finite() => Ok(()),
            HeatInput::Constant { .. } => Err(Error::InvalidParams("heat flux must be finite".into())),
            HeatInput::Schedule { start, flux } => {
                if start.is_empty() || start.len() != flux.len() {
                    return Err(Error::InvalidParams("schedule needs matching non-empty start/flux".into()));
                }
                if start.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParams("schedule start times must increase".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: T) -> T {
        match self {
            HeatInput::Constant { flux } => *flux,
            HeatInput::Schedule { start, flux } => {
                let idx = start.iter().rposition(|&s| s <= t).unwrap_or(0);
                flux[idx]
            }
        }
    }

    /// Next switching time strictly after `t`, if any.
    pub fn next_switch(&self, t: T) -> Option<T> {
        match self {
            HeatInput::Constant { .. } => None,
            HeatInput::Schedule { start, .. } => start.iter().copied().find(|&s| s > t),
        }
    }

    /// Exact integral of the flux over `[t0, t1]`.
    pub fn integral(&self, t0: T, t1: T) -> T {
        match self {
            HeatInput::Constant { flux } => *flux * (t1 - t0),
            HeatInput::Schedule { start, flux } => {
                let mut acc = T::zero();
                let mut a = t0;
                while a < t1 {
                    let b = self.next_switch(a).map_or(t1, |s| s.min(t1));
                    let idx = start.iter().rposition(|&s| s <= a).unwrap_or(0);
                    acc += flux[idx] * (b - a);
                    a = b;
                }
                acc
            }
        }
    }
}

/// Interface position and temperature samples on the normalised grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StefanState<T> {
    pub time: T,
    /// Interface position, m.
    pub s: T,
    /// Temperature at `xi_i = i / (n - 1)`, K. The last entry is the melting temperature.
    pub theta: Vec<T>,
}

impl<T: Real> StefanState<T> {
    /// Profile from a function of the physical coordinate; the end node is pinned to `T_m`.
    pub fn from_fn(params: &StefanParams<T>, grid: GridSpec, s: T, f: impl Fn(T) -> T) -> Self {
        let mut theta: Vec<T> = grid.coords::<T>().into_iter().map(|xi| f(xi * s)).collect();
        *theta.last_mut().unwrap() = params.melt_temp;
        Self { time: T::zero(), s, theta }
    }

    /// Linear profile whose slope matches the boundary flux `q0`.
    pub fn linear(params: &StefanParams<T>, grid: GridSpec, s: T, q0: T) -> Self {
        let slope = q0 / params.conductivity;
        Self::from_fn(params, grid, s, |x| params.melt_temp + slope * (s - x))
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { nodes: self.theta.len() }
    }

    /// Temperature at a physical position; `T_m` beyond the interface.
    pub fn temperature_at(&self, x: T, melt_temp: T) -> T {
        if x >= self.s {
            return melt_temp;
        }
        crate::numerics::interp_uniform(&self.theta, self.s, x)
    }
}

/// `theta_t` for nodes `0..n-1` of the moving-domain heat equation with
/// Neumann data `theta_xi(0) = g0` and a fixed value at `xi = 1`.
pub(crate) fn moving_heat_operator<T: Real>(
    alpha: T,
    s: T,
    s_dot: T,
    theta: &[T],
    g0: T,
    dtheta: &mut [T],
) {
    let n = theta.len();
    let h = T::one() / T::from_usize_lossy(n - 1);
    let diff = alpha / (s * s * h * h);
    let adv = s_dot / (s * T::lit(2.0) * h);
    let two = T::lit(2.0);
    // Ghost node theta_{-1} = theta_1 - 2 h g0; advection vanishes at xi = 0.
    dtheta[0] = diff * (two * theta[1] - two * theta[0] - two * h * g0);
    for i in 1..n - 1 {
        let xi = T::from_usize_lossy(i) * h;
        dtheta[i] = diff * (theta[i + 1] - two * theta[i] + theta[i - 1]) + xi * adv * (theta[i + 1] - theta[i - 1]);
    }
    dtheta[n - 1] = T::zero();
}

/// Interface velocity `-(beta/s) theta_xi(1)`.
pub fn interface_speed<T: Real>(beta: T, s: T, theta: &[T]) -> T {
    let h = T::one() / T::from_usize_lossy(theta.len() - 1);
    -(beta / s) * diff_right(theta, h)
}

/// Time derivative of `(s, theta)` for the plant.
pub fn immobilized_rhs<T: Real>(params: &StefanParams<T>, q_c: T, s: T, theta: &[T]) -> Result<(T, Vec<T>)> {
    if !(s > T::zero()) {
        return Err(Error::InvalidState("interface position must be positive".into()));
    }
    let s_dot = interface_speed(params.beta(), s, theta);
    let g0 = -q_c * s / params.conductivity;
    let mut dtheta = vec![T::zero(); theta.len()];
    moving_heat_operator(params.alpha(), s, s_dot, theta, g0, &mut dtheta);
    Ok((s_dot, dtheta))
}

/// `E = (1/alpha) int_0^s (T - T_m) dx + s / beta`, which obeys `dE/dt = q_c / k`.
pub fn energy<T: Real>(params: &StefanParams<T>, s: T, theta: &[T]) -> Result<T> {
    let h = T::one() / T::from_usize_lossy(theta.len() - 1);
    let excess: Vec<T> = theta.iter().map(|v| *v - params.melt_temp).collect();
    let int = integrate_trapezoid_uniform(h, &excess)?;
    Ok(s * int / params.alpha() + s / params.beta())
}

/// Checks `T >= T_m - tol` and `s_min < s < L`.
pub fn validate_state<T: Real>(params: &StefanParams<T>, state: &StefanState<T>, tol: T) -> Result<()> {
    if !(state.s > params.s_min()) || !(state.s < params.domain_len) {
        return Err(Error::BoundaryExit { time: state.time.as_f64(), position: state.s.as_f64() });
    }
    let min = state.theta.iter().copied().fold(T::infinity(), T::min);
    if min < params.melt_temp - tol {
        return Err(Error::Validity {
            time: state.time.as_f64(),
            reason: format!("temperature {:.6e} K below melting point", min.as_f64()),
        });
    }
    Ok(())
}

/// Integration settings shared by the plant and observer runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    /// Grid nodes on the normalised coordinate.
    pub nodes: usize,
    /// RK4 steps between recorded samples.
    pub stride: usize,
    /// Halt on the first temperature-sign violation instead of flagging it.
    pub strict_validity: bool,
    /// Allowed undershoot below the melting point, K.
    pub validity_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { nodes: 101, stride: 100, strict_validity: false, validity_tol: 1e-6 }
    }
}

impl SimOptions {
    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.nodes)?)
    }
}

/// One recorded sample of a plant run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StefanSample<T> {
    pub state: StefanState<T>,
    pub s_dot: T,
    pub energy: T,
    pub valid: bool,
}

/// Why a run stopped before its horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StefanTrajectory<T> {
    pub samples: Vec<StefanSample<T>>,
    pub halt: Option<Halt>,
}

/// Integrates the plant from `init` to `horizon` seconds.
pub fn simulate<T: Real>(
    params: &StefanParams<T>,
    init: &StefanState<T>,
    input: &HeatInput<T>,
    horizon: T,
    opts: &SimOptions,
) -> Result<StefanTrajectory<T>> {
    params.validate()?;
    input.validate()?;
    if init.theta.len() < 4 {
        return Err(Error::InvalidState("profile needs at least 4 nodes".into()));
    }
    let tol = T::lit(opts.validity_tol);
    let n = init.theta.len();
    let h_xi = T::one() / T::from_usize_lossy(n - 1);
    let alpha = params.alpha();

    let mut state = init.clone();
    let record = |state: &StefanState<T>| -> Result<StefanSample<T>> {
        let q = input.value(state.time);
        let (s_dot, _) = immobilized_rhs(params, q, state.s, &state.theta)?;
        let valid = validate_state(params, state, tol).is_ok();
        Ok(StefanSample { state: state.clone(), s_dot, energy: energy(params, state.s, &state.theta)?, valid })
    };

    validate_state(params, &state, tol)?;
    let mut samples = vec![record(&state)?];
    let mut steps = 0usize;
    while state.time < horizon {
        let q = input.value(state.time);
        let mut target = (state.time + diffusion_step_limit(h_xi, alpha / (state.s * state.s))).min(horizon);
        if let Some(ts) = input.next_switch(state.time) {
            target = target.min(ts);
        }
        let h = target - state.time;
        let mut y = Vec::with_capacity(n + 1);
        y.push(state.s);
        y.extend_from_slice(&state.theta);
        let y1 = rk4_step::<T, Error, _>(
            |_, y| {
                let (s_dot, dtheta) = immobilized_rhs(params, q, y[0], &y[1..])?;
                let mut out = Vec::with_capacity(y.len());
                out.push(s_dot);
                out.extend(dtheta);
                Ok(out)
            },
            state.time,
            &y,
            h,
        )?;
        state.s = y1[0];
        state.theta.copy_from_slice(&y1[1..]);
        state.time = target;
        steps += 1;

        match validate_state(params, &state, tol) {
            Ok(()) => {}
            Err(e @ Error::BoundaryExit { .. }) => {
                samples.push(record_unchecked(params, &state, input));
                return Ok(StefanTrajectory { samples, halt: Some(Halt { time: state.time.as_f64(), reason: e.to_string() }) });
            }
            Err(e) if opts.strict_validity => {
                samples.push(record(&state)?);
                return Ok(StefanTrajectory { samples, halt: Some(Halt { time: state.time.as_f64(), reason: e.to_string() }) });
            }
            Err(_) => {}
        }
        if steps % opts.stride.max(1) == 0 || state.time >= horizon {
            samples.push(record(&state)?);
        }
    }
    Ok(StefanTrajectory { samples, halt: None })
}

fn record_unchecked<T: Real>(params: &StefanParams<T>, state: &StefanState<T>, input: &HeatInput<T>) -> StefanSample<T> {
    let q = input.value(state.time);
    let s_dot = if state.s > T::zero() {
        immobilized_rhs(params, q, state.s, &state.theta).map(|r| r.0).unwrap_or(T::nan())
    } else {
        T::nan()
    };
    let e = energy(params, state.s, &state.theta).unwrap_or(T::nan());
    StefanSample { state: state.clone(), s_dot, energy: e, valid: false }
}

/// `E(t) - E(0) - int_0^t q_c / k` at every sample.
pub fn energy_balance<T: Real>(
    params: &StefanParams<T>,
    traj: &StefanTrajectory<T>,
    input: &HeatInput<T>,
) -> Vec<T> {
    let Some(first) = traj.samples.first() else { return Vec::new() };
    let e0 = first.energy;
    let t0 = first.state.time;
    traj.samples
        .iter()
        .map(|s| s.energy - e0 - input.integral(t0, s.state.time) / params.conductivity)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> StefanParams<f64> {
        StefanParams {
            conductivity: 1.0,
            density: 1.0,
            heat_capacity: 1.0,
            latent_heat: 1.0,
            melt_temp: 0.0,
            domain_len: 1.0,
        }
    }

    #[test]
    fn zinc_diffusivities() {
        let p = StefanParams::<f64>::zinc();
        assert!((p.alpha() - 116.0 / (6570.0 * 389.5)).abs() < 1e-18);
        assert!((p.beta() - 116.0 / (6570.0 * 111_961.0)).abs() < 1e-20);
    }

    #[test]
    fn uniform_melt_profile_is_stationary_without_input() {
        let p = unit_params();
        let grid = GridSpec::new(21).unwrap();
        let st = StefanState::from_fn(&p, grid, 0.3, |_| 0.0);
        let (s_dot, dtheta) = immobilized_rhs(&p, 0.0, st.s, &st.theta).unwrap();
        assert_eq!(s_dot, 0.0);
        assert!(dtheta.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_profile_interface_speed() {
        // T = T_m + (q/k)(s - x): theta_xi(1) = -q s / k exactly, so s_dot = beta q / k.
        let p = StefanParams::<f64>::zinc();
        let grid = GridSpec::new(31).unwrap();
        let st = StefanState::linear(&p, grid, 0.1, 1e5);
        let (s_dot, _) = immobilized_rhs(&p, 1e5, st.s, &st.theta).unwrap();
        assert!((s_dot - p.beta() * 1e5 / p.conductivity).abs() < 1e-15);
    }

    #[test]
    fn schedule_integral() {
        let q = HeatInput::Schedule { start: vec![0.0, 1.0, 3.0], flux: vec![2.0, -1.0, 4.0] };
        assert_eq!(q.value(2.0), -1.0);
        assert!((q.integral(0.5f64, 4.0) - (1.0 - 2.0 + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = unit_params();
        p.density = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn boundary_exit_is_a_halt() {
        let p = unit_params();
        let grid = GridSpec::new(11).unwrap();
        let st = StefanState::from_fn(&p, grid, 1.5, |_| 0.1);
        assert!(validate_state(&p, &st, 1e-9).unwrap_err().is_validity_halt());
    }
}

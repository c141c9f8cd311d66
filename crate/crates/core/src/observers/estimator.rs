use serde::{Deserialize, Serialize};

use super::gains::{gain_p1_profile, gain_p2, ObserverGains};
use super::norms::{h1_error_norm, ErrorNorms};
use crate::error::{Error, Result};
use crate::numerics::{diffusion_step_limit, rk4_step};
use crate::real::Real;
use crate::stefan::{
    immobilized_rhs, interface_speed, moving_heat_operator, validate_state, Halt, HeatInput, SimOptions,
    StefanParams, StefanState,
};

/// Which estimator to run against the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverMode {
    /// Measures `s(t)` and `T(0, t)`; estimates the temperature profile.
    Full,
    /// Measures `T(0, t)` only; estimates profile and interface.
    Joint,
    /// Plant copy with output injection on the interface ODE only.
    Baseline,
}

/// Probe locations as fractions of the true interface position.
pub const PROBE_FRACTIONS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
const NORM_SAMPLES: usize = 401;

/// Observer temperature derivative on the measured domain `[0, s]`.
pub fn full_observer_rhs<T: Real>(
    params: &StefanParams<T>,
    gains: &ObserverGains<T>,
    q_c: T,
    s: T,
    s_dot: T,
    y2: T,
    theta_hat: &[T],
) -> Result<Vec<T>> {
    let alpha = params.alpha();
    let e0 = y2 - theta_hat[0];
    let p2 = gain_p2(s, gains.lambda, alpha);
    let g0 = s * (-q_c / params.conductivity + p2 * e0);
    let mut d = vec![T::zero(); theta_hat.len()];
    moving_heat_operator(alpha, s, s_dot, theta_hat, g0, &mut d);
    if gains.lambda > T::zero() {
        let p1 = gain_p1_profile(theta_hat.len(), s, gains.lambda, alpha)?;
        let n = d.len();
        for (di, pi) in d[..n - 1].iter_mut().zip(&p1) {
            *di += *pi * e0;
        }
    }
    Ok(d)
}

/// Derivative of `(s_hat, theta_hat)` for the joint estimator. The baseline is
/// the same system with `lambda = 0`.
pub fn joint_observer_rhs<T: Real>(
    params: &StefanParams<T>,
    gains: &ObserverGains<T>,
    q_c: T,
    y: T,
    s_hat: T,
    theta_hat: &[T],
) -> Result<(T, Vec<T>)> {
    if !(s_hat > T::zero()) {
        return Err(Error::InvalidState("estimated interface must be positive".into()));
    }
    let e0 = y - theta_hat[0];
    let s_hat_dot = interface_speed(params.beta(), s_hat, theta_hat) + gains.l * e0;
    let d = full_observer_rhs(params, gains, q_c, s_hat, s_hat_dot, y, theta_hat)?;
    Ok((s_hat_dot, d))
}

/// A plant run with an estimator attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverScenario<T> {
    pub params: StefanParams<T>,
    pub input: HeatInput<T>,
    pub plant_init: StefanState<T>,
    /// Initial estimate. In `Full` mode its interface is replaced by the measured one.
    pub estimate_init: StefanState<T>,
    pub gains: ObserverGains<T>,
    pub mode: ObserverMode,
    pub horizon: T,
    pub options: SimOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverSample<T> {
    pub time: T,
    pub s: T,
    pub s_hat: T,
    pub norms: ErrorNorms<T>,
    pub probe_true: [T; 4],
    pub probe_est: [T; 4],
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverTrajectory<T> {
    pub samples: Vec<ObserverSample<T>>,
    pub halt: Option<Halt>,
}

impl<T: Real> ObserverTrajectory<T> {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time.as_f64()).collect()
    }

    pub fn h1_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norms.h1.as_f64()).collect()
    }

    pub fn interface_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| (s.s - s.s_hat).abs().as_f64()).collect()
    }

    pub fn probe_errors(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| (s.probe_true[k] - s.probe_est[k]).abs().as_f64()).collect()
    }
}

fn sample<T: Real>(
    params: &StefanParams<T>,
    time: T,
    plant: &StefanState<T>,
    s_hat: T,
    theta_hat: &[T],
    valid: bool,
) -> Result<ObserverSample<T>> {
    let est = StefanState { time, s: s_hat, theta: theta_hat.to_vec() };
    let tm = params.melt_temp;
    let norms = h1_error_norm(plant.s, &plant.theta, s_hat, theta_hat, tm, NORM_SAMPLES)?;
    let mut probe_true = [T::zero(); 4];
    let mut probe_est = [T::zero(); 4];
    for (k, f) in PROBE_FRACTIONS.iter().enumerate() {
        let x = T::lit(*f) * plant.s;
        probe_true[k] = plant.temperature_at(x, tm);
        probe_est[k] = est.temperature_at(x, tm);
    }
    Ok(ObserverSample { time, s: plant.s, s_hat, norms, probe_true, probe_est, valid })
}

/// Integrates plant and estimator together.
pub fn run_observer<T: Real>(sc: &ObserverScenario<T>) -> Result<ObserverTrajectory<T>> {
    sc.params.validate()?;
    sc.input.validate()?;
    sc.gains.validate()?;
    let n = sc.plant_init.theta.len();
    if sc.estimate_init.theta.len() != n {
        return Err(Error::InvalidState("plant and estimate grids differ".into()));
    }
    if n < 4 {
        return Err(Error::InvalidState("profile needs at least 4 nodes".into()));
    }
    let params = &sc.params;
    let alpha = params.alpha();
    let tol = T::lit(sc.options.validity_tol);
    let h_xi = T::one() / T::from_usize_lossy(n - 1);
    let mode = sc.mode;
    let gains = match mode {
        ObserverMode::Baseline => ObserverGains { lambda: T::zero(), l: sc.gains.l },
        _ => sc.gains,
    };

    let mut plant = sc.plant_init.clone();
    let mut s_hat = if mode == ObserverMode::Full { plant.s } else { sc.estimate_init.s };
    let mut theta_hat = sc.estimate_init.theta.clone();
    let mut time = T::zero();

    let rhs = |t: T, y: &[T]| -> Result<Vec<T>> {
        let q = sc.input.value(t);
        let (s, theta) = (y[0], &y[1..=n]);
        let (sh, th) = (y[n + 1], &y[n + 2..]);
        let (s_dot, dtheta) = immobilized_rhs(params, q, s, theta)?;
        let (sh_dot, dth) = match mode {
            ObserverMode::Full => (s_dot, full_observer_rhs(params, &gains, q, s, s_dot, theta[0], th)?),
            _ => joint_observer_rhs(params, &gains, q, theta[0], sh, th)?,
        };
        let mut out = Vec::with_capacity(y.len());
        out.push(s_dot);
        out.extend(dtheta);
        out.push(sh_dot);
        out.extend(dth);
        Ok(out)
    };

    validate_state(params, &plant, tol)?;
    let mut samples = vec![sample(params, time, &plant, s_hat, &theta_hat, true)?];
    let mut steps = 0usize;
    while time < sc.horizon {
        let s_small = plant.s.min(s_hat);
        let mut h = diffusion_step_limit(h_xi, alpha / (s_small * s_small));
        let p1_0 = gains.lambda * gains.lambda * s_hat.max(plant.s).powi(2) / (T::lit(8.0) * alpha);
        let inj = gains.lambda / h_xi + p1_0 + gains.l.abs() * params.beta();
        if inj > T::zero() {
            h = h.min(T::lit(0.4) / inj);
        }
        let mut target = (time + h).min(sc.horizon);
        if let Some(ts) = sc.input.next_switch(time) {
            target = target.min(ts);
        }
        let mut y = Vec::with_capacity(2 * n + 2);
        y.push(plant.s);
        y.extend_from_slice(&plant.theta);
        y.push(s_hat);
        y.extend_from_slice(&theta_hat);
        let y1 = rk4_step::<T, Error, _>(rhs, time, &y, target - time)?;
        time = target;
        plant.time = time;
        plant.s = y1[0];
        plant.theta.copy_from_slice(&y1[1..=n]);
        s_hat = if mode == ObserverMode::Full { plant.s } else { y1[n + 1] };
        theta_hat.copy_from_slice(&y1[n + 2..]);
        steps += 1;

        let check = validate_state(params, &plant, tol).and_then(|_| {
            if s_hat > params.s_min() && s_hat < params.domain_len {
                Ok(())
            } else {
                Err(Error::BoundaryExit { time: time.as_f64(), position: s_hat.as_f64() })
            }
        });
        let valid = check.is_ok();
        match check {
            Err(e) if e.is_validity_halt() && (matches!(e, Error::BoundaryExit { .. }) || sc.options.strict_validity) => {
                if plant.s > T::zero() && s_hat > T::zero() {
                    samples.push(sample(params, time, &plant, s_hat, &theta_hat, false)?);
                }
                return Ok(ObserverTrajectory { samples, halt: Some(Halt { time: time.as_f64(), reason: e.to_string() }) });
            }
            Err(e) if !e.is_validity_halt() => return Err(e),
            _ => {}
        }
        if steps % sc.options.stride.max(1) == 0 || time >= sc.horizon {
            samples.push(sample(params, time, &plant, s_hat, &theta_hat, valid)?);
        }
    }
    Ok(ObserverTrajectory { samples, halt: None })
}

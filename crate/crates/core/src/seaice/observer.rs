use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{band_after, peak_before, settling_time};
use crate::numerics::{bessel_ratio_i, diff_right, diffusion_step_limit, integrate_trapezoid_uniform, rk4_step};
use crate::real::Real;
use crate::stefan::Halt;

use super::forcing::{next_month_start, MonthlyForcing, SnowSchedule, DAY_SECONDS};
use super::model::{column, pack, regrid_snow, salinity_profile, unpack, SeaIceOptions, SeaIceState};
use super::params::SeaIceParams;

/// Free parameters of the thickness-driven observer and the bounds assumed
/// on the thickness and its rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaIceObserverParams<T> {
    /// Target decay rate of the profile error, 1/s.
    pub lambda: T,
    /// Target decay rate of the thickness error, 1/s.
    pub c: T,
    /// Boundary weight, C/m.
    pub epsilon: T,
    /// Bound on `|H_dot|`, m/s.
    pub rate_bound: T,
    /// Bound on `H`, m.
    pub thickness_bound: T,
}

impl<T: Real> SeaIceObserverParams<T> {
    /// `lambda = 5e-6`, `c = 3e-5`, `epsilon = 1e-8`, `M = 1.9e-7` m/s, `H_bar = 10` m.
    pub fn reference(lambda: T) -> Self {
        Self {
            lambda,
            c: T::lit(3e-5),
            epsilon: T::lit(1e-8),
            rate_bound: T::lit(1.9e-7),
            thickness_bound: T::lit(10.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("c", self.c),
            ("epsilon", self.epsilon),
            ("rate_bound", self.rate_bound),
            ("thickness_bound", self.thickness_bound),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Lower bound `beta M^2 f_bar / (epsilon lambda) + beta M epsilon` on `c`
    /// for a given bound `f_bar` of the target-system coupling. `f_bar` is
    /// not known in closed form, so this is advisory.
    pub fn c_lower_bound(&self, beta: T, f_bar: T) -> T {
        let m = self.rate_bound;
        beta * m * m * f_bar / (self.epsilon * self.lambda) + beta * m * self.epsilon
    }
}

/// Relative parameter errors in the observer: `D_i (1 + diffusivity)`,
/// `beta (1 + beta)`, `F_w (1 + ocean_flux)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation<T> {
    pub diffusivity: T,
    pub beta: T,
    pub ocean_flux: T,
}

/// The salinity-free column model the observer copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverModel<T> {
    /// `D_i`, m^2/s.
    pub diffusivity: T,
    /// `beta = k0 / q`, m^2/(s C).
    pub beta: T,
    /// `F_w / q`, m/s.
    pub ocean_melt: T,
    /// `I0 / (rho c0)`, C m/s.
    pub i0_bar: T,
    pub kappa_i: T,
    pub tm2: T,
}

impl<T: Real> ObserverModel<T> {
    pub fn nominal(params: &SeaIceParams<T>) -> Self {
        Self::perturbed(params, &Perturbation { diffusivity: T::zero(), beta: T::zero(), ocean_flux: T::zero() })
    }

    pub fn perturbed(params: &SeaIceParams<T>, d: &Perturbation<T>) -> Self {
        Self {
            diffusivity: params.diffusivity() * (T::one() + d.diffusivity),
            beta: params.beta() * (T::one() + d.beta),
            ocean_melt: params.f_w * (T::one() + d.ocean_flux) / params.q_latent,
            i0_bar: params.i0_bar(),
            kappa_i: params.kappa_i,
            tm2: params.tm2,
        }
    }
}

/// Interior injection gain at depth `x` for thickness `h_ice`:
///
/// ```text
/// p1 = (c lambda x / beta) I1(z)/z + (eps H / D - 3 / beta) lambda^2 x I2(z)/z^2
///      + lambda^3 x^3 / (D beta) I3(z)/z^3,        z = sqrt(lambda (H^2 - x^2) / D)
/// ```
pub fn gain_p1<T: Real>(x: T, h_ice: T, obs: &SeaIceObserverParams<T>, diffusivity: T, beta: T) -> Result<T> {
    if !(x >= T::zero()) || x > h_ice {
        return Err(Error::InvalidState(format!("gain depth {x} outside [0, {h_ice}]")));
    }
    let lam = obs.lambda;
    let z = (lam / diffusivity * (h_ice * h_ice - x * x)).max(T::zero()).sqrt();
    let r1 = bessel_ratio_i(1, z)?;
    let r2 = bessel_ratio_i(2, z)?;
    let r3 = bessel_ratio_i(3, z)?;
    Ok(obs.c * lam * x / beta * r1
        + (obs.epsilon * h_ice / diffusivity - T::lit(3.0) / beta) * lam * lam * x * r2
        + lam * lam * lam * x * x * x / (diffusivity * beta) * r3)
}

/// Bottom-temperature gain `p3 = -lambda H / (2 beta) - epsilon`.
pub fn gain_p3<T: Real>(h_ice: T, obs: &SeaIceObserverParams<T>, beta: T) -> T {
    -obs.lambda * h_ice / (T::lit(2.0) * beta) - obs.epsilon
}

/// Thickness gain
/// `p4 = c - (lambda / 2)(1 - lambda H^2 / (4 D)) + beta lambda eps H / (2 D)`.
pub fn gain_p4<T: Real>(h_ice: T, obs: &SeaIceObserverParams<T>, diffusivity: T, beta: T) -> T {
    let lam = obs.lambda;
    let two = T::lit(2.0);
    obs.c - lam / two * (T::one() - lam * h_ice * h_ice / (T::lit(4.0) * diffusivity))
        + beta * lam * obs.epsilon * h_ice / (two * diffusivity)
}

/// Gains evaluated on an `nodes`-point grid over `[0, H]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainBundle<T> {
    pub p1: Vec<T>,
    pub p2: T,
    pub p3: T,
    pub p4: T,
}

impl<T: Real> GainBundle<T> {
    pub fn zero(nodes: usize) -> Self {
        Self { p1: vec![T::zero(); nodes], p2: T::zero(), p3: T::zero(), p4: T::zero() }
    }
}

pub fn observer_gains<T: Real>(
    h_ice: T,
    nodes: usize,
    obs: &SeaIceObserverParams<T>,
    model: &ObserverModel<T>,
) -> Result<GainBundle<T>> {
    if !(h_ice > T::zero()) || nodes < 2 {
        return Err(Error::InvalidState("gains need H > 0 and at least 2 nodes".into()));
    }
    let dx = h_ice / T::from_usize_lossy(nodes - 1);
    let p1 = (0..nodes)
        .map(|i| {
            let x = if i + 1 == nodes { h_ice } else { T::from_usize_lossy(i) * dx };
            gain_p1(x, h_ice, obs, model.diffusivity, model.beta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainBundle {
        p1,
        p2: T::zero(),
        p3: gain_p3(h_ice, obs, model.beta),
        p4: gain_p4(h_ice, obs, model.diffusivity, model.beta),
    })
}

/// Measured thickness `Y1`, its rate, and the ice-top temperature `Y2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements<T> {
    pub y1: T,
    pub y1_dot: T,
    pub y2: T,
}

/// Observer state: estimated thickness and temperature on the normalised
/// grid over `[0, Y1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceObserverState<T> {
    pub thickness_est: T,
    pub profile: Vec<T>,
}

/// Boundary nodes fixed by the measurements and the thickness error.
pub fn observer_boundaries<T: Real>(model: &ObserverModel<T>, gains: &GainBundle<T>, meas: &Measurements<T>, h_hat: T) -> (T, T) {
    let err = meas.y1 - h_hat;
    (meas.y2 - gains.p2 * err, model.tm2 - gains.p3 * err)
}

/// Time derivative of the observer: `(dH_hat/dt, dT_hat/dt)` with the
/// boundary entries of the profile rate set to zero.
pub fn observer_rhs<T: Real>(
    model: &ObserverModel<T>,
    gains: &GainBundle<T>,
    meas: &Measurements<T>,
    state: &SeaIceObserverState<T>,
) -> Result<(T, Vec<T>)> {
    let n = state.profile.len();
    if n < 4 || gains.p1.len() != n {
        return Err(Error::InvalidState("observer profile and gains must share a grid of at least 4 nodes".into()));
    }
    if !(state.thickness_est > T::zero()) || !(meas.y1 > T::zero()) {
        return Err(Error::InvalidState("observer thickness must be positive".into()));
    }
    let mut full = state.profile.clone();
    let (top, bottom) = observer_boundaries(model, gains, meas, state.thickness_est);
    full[0] = top;
    full[n - 1] = bottom;
    let err = meas.y1 - state.thickness_est;
    let dxi = T::one() / T::from_usize_lossy(n - 1);
    let two = T::lit(2.0);
    let y1 = meas.y1;
    let diff = model.diffusivity / (y1 * y1 * dxi * dxi);
    let mut rates = vec![T::zero(); n];
    for i in 1..n - 1 {
        let xi = T::from_usize_lossy(i) * dxi;
        let lap = full[i + 1] - two * full[i] + full[i - 1];
        let adv = (full[i + 1] - full[i - 1]) / (two * dxi);
        let src = model.i0_bar * model.kappa_i * (-model.kappa_i * xi * y1).exp();
        rates[i] = diff * lap + xi * meas.y1_dot / y1 * adv + src - gains.p1[i] * err;
    }
    let h_dot = gains.p4 * err + model.beta * diff_right(&full, dxi) / y1 - model.ocean_melt;
    Ok((h_dot, rates))
}

/// Backstepping gains or the plain model copy (all gains zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeaIceObserverMode {
    Backstepping,
    OpenLoop,
}

/// A plant run with the observer riding along on its measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceObserverScenario<T> {
    pub params: SeaIceParams<T>,
    pub forcing: MonthlyForcing<T>,
    pub snowfall: SnowSchedule<T>,
    pub plant_init: SeaIceState<T>,
    /// Initial estimate on the plant's ice grid.
    pub estimate_init: Vec<T>,
    pub thickness_est_init: T,
    pub obs: SeaIceObserverParams<T>,
    pub mode: SeaIceObserverMode,
    pub perturbation: Perturbation<T>,
    pub horizon: T,
    pub options: SeaIceOptions,
}

/// Quadratic initial estimate through `(0, T0)` and `(H0, Tm2)`, bending
/// below the line for `0 < d < 1/2`.
pub fn quadratic_estimate<T: Real>(t0: T, tm2: T, d: T, nodes: usize) -> Vec<T> {
    (0..nodes)
        .map(|i| {
            if i + 1 == nodes {
                return tm2;
            }
            let xi = T::from_usize_lossy(i) / T::from_usize_lossy(nodes - 1);
            (tm2 - t0) / (T::one() - T::lit(2.0) * d) * (xi * xi - T::lit(2.0) * d * xi) + t0
        })
        .collect()
}

/// Normalised depths of the four reported probes.
pub const PROBE_FRACTIONS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceObserverSample<T> {
    pub time: T,
    pub snow_depth: T,
    pub thickness: T,
    pub thickness_est: T,
    pub surface_temp: T,
    /// L2 norm of the profile error over the ice, C m^(1/2).
    pub l2_error: T,
    /// Largest `T_hat - T` over the ice, C.
    pub overshoot: T,
    pub probe_true: [T; 4],
    pub probe_est: [T; 4],
    pub ice: Vec<T>,
    pub estimate: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceObserverTrajectory<T> {
    pub samples: Vec<SeaIceObserverSample<T>>,
    pub halt: Option<Halt>,
}

impl<T: Real> SeaIceObserverTrajectory<T> {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time.as_f64()).collect()
    }

    pub fn l2_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.l2_error.as_f64()).collect()
    }

    /// `H - H_hat` at every sample.
    pub fn thickness_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| (s.thickness - s.thickness_est).as_f64()).collect()
    }
}

fn sample_of<T: Real>(state: &SeaIceState<T>, h_hat: T, estimate: &[T]) -> Result<SeaIceObserverSample<T>> {
    let n = state.ice.len();
    let dx = state.thickness / T::from_usize_lossy(n - 1);
    let sq: Vec<T> = state.ice.iter().zip(estimate).map(|(a, b)| (*b - *a) * (*b - *a)).collect();
    let l2 = integrate_trapezoid_uniform(dx, &sq)?.sqrt();
    let overshoot = state.ice.iter().zip(estimate).map(|(a, b)| *b - *a).fold(T::neg_infinity(), T::max);
    let probe = |v: &[T], f: f64| crate::numerics::interp_uniform(v, T::one(), T::lit(f));
    Ok(SeaIceObserverSample {
        time: state.time,
        snow_depth: state.snow_depth,
        thickness: state.thickness,
        thickness_est: h_hat,
        surface_temp: state.surface_temp(),
        l2_error: l2,
        overshoot,
        probe_true: PROBE_FRACTIONS.map(|f| probe(&state.ice, f)),
        probe_est: PROBE_FRACTIONS.map(|f| probe(estimate, f)),
        ice: state.ice.clone(),
        estimate: estimate.to_vec(),
    })
}

/// Runs the plant (with its salinity setting) and the salinity-free
/// observer side by side. The observer domain follows the measured thickness.
pub fn run_observer<T: Real>(sc: &SeaIceObserverScenario<T>) -> Result<SeaIceObserverTrajectory<T>> {
    let params = &sc.params;
    params.validate()?;
    sc.forcing.validate()?;
    sc.snowfall.validate()?;
    sc.options.validate()?;
    sc.plant_init.validate(params)?;
    if sc.mode == SeaIceObserverMode::Backstepping {
        sc.obs.validate()?;
    }
    let n = sc.plant_init.ice.len();
    if sc.estimate_init.len() != n || n != sc.options.ice_nodes {
        return Err(Error::InvalidState("estimate, plant and options must share the ice grid".into()));
    }
    let model = ObserverModel::perturbed(params, &sc.perturbation);
    let sal = sc.options.salinity.then(|| salinity_profile(params, n));
    let gains_at = |y1: T| -> Result<GainBundle<T>> {
        match sc.mode {
            SeaIceObserverMode::Backstepping => observer_gains(y1, n, &sc.obs, &model),
            SeaIceObserverMode::OpenLoop => Ok(GainBundle::zero(n)),
        }
    };
    let dxi = T::one() / T::from_usize_lossy(n - 1);

    let mut plant = sc.plant_init.clone();
    let mut h_hat = sc.thickness_est_init;
    let mut est = sc.estimate_init.clone();
    {
        // Put the estimate's boundary nodes on the observer conditions.
        let col = column(params, sal.as_deref(), &sc.forcing, &sc.snowfall, &plant);
        let y = pack(&plant);
        unpack(&col, &y, &mut plant)?;
        let (_, info) = col.rhs(&y)?;
        let g = gains_at(plant.thickness)?;
        let meas = Measurements { y1: plant.thickness, y1_dot: info.thickness_dot, y2: info.interface_temp };
        let (top, bottom) = observer_boundaries(&model, &g, &meas, h_hat);
        est[0] = top;
        est[n - 1] = bottom;
    }
    let end = plant.time + sc.horizon;
    let interval = T::lit(sc.options.sample_interval);
    let min_h = T::lit(sc.options.min_thickness);
    let mut samples = vec![sample_of(&plant, h_hat, &est)?];
    let mut next_sample = plant.time + interval;

    while plant.time < end {
        let col = column(params, sal.as_deref(), &sc.forcing, &sc.snowfall, &plant);
        let stop = next_month_start(plant.time).min(next_sample).min(end);
        let yp = pack(&plant);
        let np = yp.len();
        let mut y = yp.clone();
        y.push(h_hat);
        y.extend_from_slice(&est[1..n - 1]);

        let eval = |y: &[T]| -> Result<Vec<T>> {
            let (mut dy, info) = col.rhs(&y[..np])?;
            let y1 = y[1];
            let g = gains_at(y1)?;
            let meas = Measurements { y1, y1_dot: info.thickness_dot, y2: info.interface_temp };
            let mut profile = Vec::with_capacity(n);
            profile.push(T::zero());
            profile.extend_from_slice(&y[np + 1..]);
            profile.push(T::zero());
            let obs_state = SeaIceObserverState { thickness_est: y[np], profile };
            let (dh, dprof) = observer_rhs(&model, &g, &meas, &obs_state)?;
            dy.push(dh);
            dy.extend_from_slice(&dprof[1..n - 1]);
            Ok(dy)
        };

        let (_, info) = col.rhs(&yp)?;
        let g = gains_at(plant.thickness)?;
        let mut limit = col.step_limit(&yp, &info);
        limit = limit.min(diffusion_step_limit(dxi, model.diffusivity / (plant.thickness * plant.thickness)));
        // Stiffness of the thickness-error loop through the bottom node.
        let loop_rate = g.p4.abs() + T::lit(1.5) * model.beta * g.p3.abs() / (dxi * plant.thickness);
        if loop_rate > T::zero() {
            limit = limit.min(T::lit(0.4) / loop_rate);
        }
        let (dt, t_new) = if plant.time + limit >= stop { (stop - plant.time, stop) } else { (limit, plant.time + limit) };
        if plant.snow.is_empty() && !info.surface.melting {
            plant.pending_snow += col.snowfall * dt;
        }
        let y1 = rk4_step::<T, Error, _>(|_, y| eval(y), plant.time, &y, dt)?;
        unpack(&col, &y1[..np], &mut plant)?;
        plant.time = t_new;
        h_hat = y1[np];
        est[1..n - 1].copy_from_slice(&y1[np + 1..]);
        {
            let (_, info) = col.rhs(&y1[..np])?;
            let g = gains_at(plant.thickness)?;
            let meas = Measurements { y1: plant.thickness, y1_dot: info.thickness_dot, y2: info.interface_temp };
            let (top, bottom) = observer_boundaries(&model, &g, &meas, h_hat);
            est[0] = top;
            est[n - 1] = bottom;
        }
        regrid_snow(&mut plant, &sc.options);
        if plant.thickness < min_h || !(h_hat > T::zero()) {
            samples.push(sample_of(&plant, h_hat, &est)?);
            let reason = format!("thickness {:.4e} m (estimate {:.4e} m) below the floor", plant.thickness.as_f64(), h_hat.as_f64());
            return Ok(SeaIceObserverTrajectory { samples, halt: Some(Halt { time: plant.time.as_f64(), reason }) });
        }
        if plant.time >= next_sample || plant.time >= end {
            samples.push(sample_of(&plant, h_hat, &est)?);
            next_sample += interval;
        }
    }
    Ok(SeaIceObserverTrajectory { samples, halt: None })
}

/// Thickness-error summary of a perturbed-observer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessMetrics {
    /// Largest `|H - H_hat|` before `settle_after`, m.
    pub peak: f64,
    /// Largest `|H - H_hat|` from `settle_after` on, m.
    pub band: f64,
    /// Time after which `H - H_hat` stays within 10 % of `peak` of its
    /// final value, s.
    pub settling_time: Option<f64>,
    /// Profile L2 error at the end of the run.
    pub final_l2: f64,
    pub settle_after: f64,
}

/// Runs `sc` with the observer's `D_i`, `beta` and `F_w` scaled by
/// `1 + delta` and summarises the thickness error after `settle_days`.
pub fn robustness_run<T: Real>(
    sc: &SeaIceObserverScenario<T>,
    deltas: Perturbation<T>,
    settle_days: f64,
) -> Result<(SeaIceObserverTrajectory<T>, RobustnessMetrics)> {
    let mut run = sc.clone();
    run.perturbation = deltas;
    let traj = run_observer(&run)?;
    let metrics = robustness_metrics(&traj, settle_days)?;
    Ok((traj, metrics))
}

pub fn robustness_metrics<T: Real>(traj: &SeaIceObserverTrajectory<T>, settle_days: f64) -> Result<RobustnessMetrics> {
    let t = traj.times();
    let t0 = t.first().copied().unwrap_or(0.0);
    let settle_after = t0 + settle_days * DAY_SECONDS;
    let e = traj.thickness_errors();
    let peak = peak_before(&t, &e, settle_after).ok_or_else(|| Error::Input("run ends before it starts".into()))?;
    let band = band_after(&t, &e, settle_after).ok_or_else(|| Error::Input("run ends before the settling time".into()))?;
    let last = e.last().copied().unwrap_or(0.0);
    let dev: Vec<f64> = e.iter().map(|v| (v - last).abs()).collect();
    Ok(RobustnessMetrics {
        peak,
        band,
        settling_time: settling_time(&t, &dev, 0.1 * peak),
        final_l2: traj.samples.last().map_or(f64::NAN, |s| s.l2_error.as_f64()),
        settle_after,
    })
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bessel_ratio_i_sq, integrate_trapezoid_uniform, rk4_step};
use crate::real::Real;
use crate::stefan::Halt;

use super::model::{
    cell_rates, cell_step_limit, cell_volumes, interface_rate, neg_balance, pack_cell, pos_average, shell_balance,
    shell_nodes, total_lithium, unpack_cell, BatteryOptions, CellState, NegParticleState, ShellState,
};
use super::ocp::OcpPair;
use super::params::{molar_flux, soc, CellParams, Electrode};

/// Guard band for the estimated interface, as a fraction of `R_p+`.
pub const INTERFACE_GUARD: f64 = 1e-3;

/// Extended Kalman filter tuning. Concentrations are normalised by
/// `c_max+` and the interface radius by `R_p+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EkfParams {
    /// Nodes on the filter's shell grid, interface node included.
    pub nodes: usize,
    /// Process noise intensity on each normalised concentration, 1/s.
    pub process_conc: f64,
    /// Process noise intensity on the normalised interface radius, 1/s.
    pub process_radius: f64,
    /// Measurement standard deviation used by the filter, mol/m^3.
    pub measurement_std: f64,
    /// Initial standard deviation of each normalised concentration.
    pub init_conc_std: f64,
    /// Initial standard deviation of the normalised interface radius.
    pub init_radius_std: f64,
}

impl Default for EkfParams {
    fn default() -> Self {
        Self {
            nodes: 6,
            process_conc: 1e-8,
            process_radius: 1e-8,
            measurement_std: 50.0,
            init_conc_std: 0.02,
            init_radius_std: 0.2,
        }
    }
}

impl EkfParams {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 {
            return Err(Error::InvalidParams("ekf.nodes must be at least 4".into()));
        }
        let vals = [self.process_conc, self.process_radius, self.measurement_std, self.init_conc_std, self.init_radius_std];
        if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParams("EKF covariances must be positive".into()));
        }
        Ok(())
    }
}

/// Backstepping gains and the filter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryObserverParams<T> {
    /// Target decay rate, 1/s.
    pub lambda: T,
    /// Interface injection gain, m/s.
    pub kappa: T,
    #[serde(default)]
    pub ekf: EkfParams,
}

impl<T: Real> BatteryObserverParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) || !(self.kappa > T::zero()) {
            return Err(Error::InvalidParams("lambda and kappa must be positive".into()));
        }
        self.ekf.validate()
    }

    /// `lambda / D_s+`, 1/m^2.
    pub fn lambda_bar(&self, params: &CellParams<T>) -> T {
        self.lambda / params.pos.diffusivity
    }
}

/// Interior gain `P(r_hat, r) = D lb^2 (R/r) l s I2(z)/z^2` with
/// `s = R - r_hat`, `l = r - r_hat` and `z^2 = lb (s^2 - l^2)`.
pub fn gain_p<T: Real>(r: T, r_hat: T, lambda: T, params: &CellParams<T>) -> Result<T> {
    let big_r = params.pos.radius;
    let d = params.pos.diffusivity;
    if !(r >= r_hat && r <= big_r) {
        return Err(Error::InvalidState(format!("radius {r} outside the estimated shell")));
    }
    let lb = lambda / d;
    let s = big_r - r_hat;
    let l = r - r_hat;
    Ok(d * lb * lb * big_r / r * l * s * bessel_ratio_i_sq(2, lb * (s * s - l * l))?)
}

/// Boundary gain `Q(r_hat) = D/R + lambda s / 2`.
pub fn gain_q<T: Real>(r_hat: T, lambda: T, params: &CellParams<T>) -> T {
    params.pos.diffusivity / params.pos.radius + lambda * (params.pos.radius - r_hat) / T::lit(2.0)
}

/// `P` at the nodes of an `nodes`-point shell over `[r_hat, R]`, and `Q`.
pub fn observer_gains_pos<T: Real>(r_hat: T, nodes: usize, obs: &BatteryObserverParams<T>, params: &CellParams<T>) -> Result<(Vec<T>, T)> {
    let big_r = params.pos.radius;
    if !(r_hat > T::zero() && r_hat < big_r) {
        return Err(Error::InvalidState("estimated interface outside (0, R_p+)".into()));
    }
    let p = shell_nodes(r_hat, big_r, nodes).into_iter().map(|r| gain_p(r, r_hat, obs.lambda, params)).collect::<Result<Vec<_>>>()?;
    Ok((p, gain_q(r_hat, obs.lambda, params)))
}

/// Negative-electrode gains that keep the estimated lithium total constant:
/// `Q- = -(a+ L+)/(a- L-) (Q + kappa r_hat^2 / R^2)` and
/// `P- = -(eps+ L+)/(eps- L-) (3/R^3) int P r^2 dr`, the integral taken with
/// the shell's control volumes.
pub fn observer_gains_neg<T: Real>(r_hat: T, p: &[T], q: T, obs: &BatteryObserverParams<T>, params: &CellParams<T>) -> (T, T) {
    let (pos, neg) = (&params.pos, &params.neg);
    let big_r = pos.radius;
    let q_neg = -(pos.area() * pos.thickness) / (neg.area() * neg.thickness) * (q + obs.kappa * r_hat * r_hat / (big_r * big_r));
    let vol = cell_volumes(r_hat, big_r, p.len());
    let integral: T = p.iter().zip(&vol).skip(1).map(|(a, b)| *a * *b).sum();
    let p_neg = -(pos.eps * pos.thickness) / (neg.eps * neg.thickness) * T::lit(3.0) / (big_r * big_r * big_r) * integral;
    (p_neg, q_neg)
}

/// How the observer moves its interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceMode<T> {
    /// Interface estimator driven by the surface error.
    Estimated,
    /// Interface speed supplied from outside (the known-interface case).
    Pinned(T),
}

/// Positive observer rates `(dc, dr_hat)` on the estimated shell.
pub fn observer_rhs_pos<T: Real>(
    shell: &ShellState<T>,
    c_ss_meas: T,
    j_pos: T,
    obs: &BatteryObserverParams<T>,
    params: &CellParams<T>,
    mode: InterfaceMode<T>,
) -> Result<(Vec<T>, T)> {
    let (p, q) = observer_gains_pos(shell.r_p, shell.c.len(), obs, params)?;
    let err = c_ss_meas - shell.surface();
    let r_dot = match mode {
        InterfaceMode::Estimated => interface_rate(shell.r_p, &shell.c, params, -obs.kappa * err)?,
        InterfaceMode::Pinned(v) => v,
    };
    let dc = shell_balance(shell.r_p, r_dot, &shell.c, params, -j_pos + q * err, Some((&p, err)));
    Ok((dc, r_dot))
}

/// Negative observer rates for the positive surface error `c_tilde`.
pub fn observer_rhs_neg<T: Real>(neg: &NegParticleState<T>, c_tilde: T, j_neg: T, gains: (T, T), params: &CellParams<T>) -> Vec<T> {
    let (p_neg, q_neg) = gains;
    neg_balance(&neg.c, params.neg.radius, params.neg.diffusivity, -j_neg + q_neg * c_tilde, p_neg * c_tilde)
}

/// Gaussian noise on the sampled surface concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation, mol/m^3.
    pub std: f64,
    pub seed: u64,
}

/// Noise held constant over each measurement interval.
#[derive(Debug, Clone)]
pub(crate) struct NoiseTrace {
    interval: f64,
    values: Vec<f64>,
}

impl NoiseTrace {
    pub(crate) fn new(spec: Option<NoiseSpec>, interval: f64, horizon: f64) -> Result<Self> {
        let n = (horizon / interval).ceil() as usize + 2;
        let values = match spec {
            Some(s) if s.std > 0.0 => {
                let normal = Normal::new(0.0, s.std).map_err(|e| Error::InvalidParams(format!("noise: {e}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
                (0..n).map(|_| normal.sample(&mut rng)).collect()
            }
            _ => vec![0.0; n],
        };
        Ok(Self { interval, values })
    }

    /// Index of the measurement interval containing `t`.
    pub(crate) fn index(&self, t: f64) -> usize {
        ((t / self.interval + 1e-9).floor().max(0.0) as usize).min(self.values.len() - 1)
    }

    pub(crate) fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub(crate) fn boundary(&self, k: usize) -> f64 {
        k as f64 * self.interval
    }
}

/// Constant-current estimation experiment.
#[derive(Debug, Clone)]
pub struct EstimationScenario<T> {
    pub params: CellParams<T>,
    pub ocp: OcpPair<T>,
    /// Current density, A/m^2 (positive on discharge).
    pub current: T,
    pub truth: CellState<T>,
    pub estimate: CellState<T>,
    pub obs: BatteryObserverParams<T>,
    pub noise: Option<NoiseSpec>,
    /// Sampling period of the surface measurement, s.
    pub measurement_interval: f64,
    pub horizon: T,
    pub options: BatteryOptions,
    /// Run the observer on the true interface instead of its estimator.
    pub pin_interface: bool,
}

impl<T: Real> EstimationScenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.options.validate()?;
        self.obs.validate()?;
        self.truth.validate(&self.params)?;
        self.estimate.validate(&self.params)?;
        if !(self.measurement_interval > 0.0) {
            return Err(Error::InvalidParams("measurement_interval must be positive".into()));
        }
        if self.pin_interface && (self.truth.shell.r_p != self.estimate.shell.r_p || self.truth.shell.c.len() != self.estimate.shell.c.len()) {
            return Err(Error::InvalidParams("a pinned interface needs the estimate on the true shell grid".into()));
        }
        Ok(())
    }
}

/// One recorded estimation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSample<T> {
    pub time: T,
    pub r_p: T,
    pub r_p_est: T,
    pub soc_true: T,
    pub soc_est: T,
    pub c_ss: T,
    pub c_ss_meas: T,
    pub lithium: T,
    /// Estimated lithium total; NaN for estimators that omit the negative particle.
    pub lithium_est: T,
    /// `int r^2 (c - c_hat)^2 dr` over the union of both shells, mol^2/m^3.
    pub error_norm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTrajectory<T> {
    pub samples: Vec<EstimationSample<T>>,
    pub halt: Option<Halt>,
}

impl<T: Real> EstimationTrajectory<T> {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time.as_f64()).collect()
    }

    /// `|SoC - SoC_hat|` in SoC points (percent).
    pub fn soc_errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| 100.0 * (s.soc_true - s.soc_est).as_f64().abs()).collect()
    }

    /// `|r_p - r_hat|` as a fraction of `R_p+`.
    pub fn interface_errors(&self, big_r: f64) -> Vec<f64> {
        self.samples.iter().map(|s| (s.r_p - s.r_p_est).as_f64().abs() / big_r).collect()
    }

    pub fn error_norms(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.error_norm.as_f64()).collect()
    }
}

/// Weighted squared error between two shell states on a fine radial grid.
pub fn weighted_error<T: Real>(truth: &ShellState<T>, est: &ShellState<T>, params: &CellParams<T>) -> Result<T> {
    const POINTS: usize = 401;
    let lo = truth.r_p.min(est.r_p);
    let big_r = params.pos.radius;
    let dr = (big_r - lo) / T::from_usize_lossy(POINTS - 1);
    let vals: Vec<T> = (0..POINTS)
        .map(|i| {
            let r = if i + 1 == POINTS { big_r } else { lo + T::from_usize_lossy(i) * dr };
            let e = truth.value_at(r, params) - est.value_at(r, params);
            r * r * e * e
        })
        .collect();
    Ok(integrate_trapezoid_uniform(dr, &vals)?)
}

pub(crate) fn clamp_interface<T: Real>(r: T, params: &CellParams<T>) -> T {
    let big_r = params.pos.radius;
    let g = T::lit(INTERFACE_GUARD);
    r.max(g * big_r).min((T::one() - g) * big_r)
}

pub(crate) fn halted<T>(samples: Vec<EstimationSample<T>>, time: f64, e: &Error) -> EstimationTrajectory<T> {
    EstimationTrajectory { samples, halt: Some(Halt { time, reason: e.to_string() }) }
}

/// Plant and backstepping observer side by side. The observer sees the
/// true surface concentration plus held measurement noise.
pub fn run_estimation<T: Real>(sc: &EstimationScenario<T>) -> Result<EstimationTrajectory<T>> {
    sc.validate()?;
    let params = &sc.params;
    let (nn, ns) = (sc.truth.neg.c.len(), sc.truth.shell.c.len());
    let (mn, ms) = (sc.estimate.neg.c.len(), sc.estimate.shell.c.len());
    let np = nn + ns;
    let noise = NoiseTrace::new(sc.noise, sc.measurement_interval, sc.horizon.as_f64())?;
    let j_pos = molar_flux(sc.current, Electrode::Pos, params);
    let j_neg = molar_flux(sc.current, Electrode::Neg, params);

    let eval = |y: &[T], k: usize| -> Result<Vec<T>> {
        let mut dy = cell_rates(&y[..np], nn, sc.current, params)?;
        let (_, truth_shell) = unpack_cell(&y[..np], nn, params.c_beta);
        let (neg_hat, shell_hat) = unpack_cell(&y[np..], mn, params.c_beta);
        let meas = truth_shell.surface() + T::lit(noise.at(k));
        let mode = if sc.pin_interface { InterfaceMode::Pinned(dy[np - 1]) } else { InterfaceMode::Estimated };
        let (dc, r_dot) = observer_rhs_pos(&shell_hat, meas, j_pos, &sc.obs, params, mode)?;
        let err = meas - shell_hat.surface();
        let (p, q) = observer_gains_pos(shell_hat.r_p, ms, &sc.obs, params)?;
        let gains = observer_gains_neg(shell_hat.r_p, &p, q, &sc.obs, params);
        dy.extend(observer_rhs_neg(&neg_hat, err, j_neg, gains, params));
        dy.extend_from_slice(&dc[1..]);
        dy.push(r_dot);
        Ok(dy)
    };

    let record = |y: &[T], t: T, k: usize| -> Result<EstimationSample<T>> {
        let (neg, shell) = unpack_cell(&y[..np], nn, params.c_beta);
        let (neg_hat, shell_hat) = unpack_cell(&y[np..], mn, params.c_beta);
        Ok(EstimationSample {
            time: t,
            r_p: shell.r_p,
            r_p_est: shell_hat.r_p,
            soc_true: soc(pos_average(&shell, params), params.pos.c_max),
            soc_est: soc(pos_average(&shell_hat, params), params.pos.c_max),
            c_ss: shell.surface(),
            c_ss_meas: shell.surface() + T::lit(noise.at(k)),
            lithium: total_lithium(&neg, &shell, params),
            lithium_est: total_lithium(&neg_hat, &shell_hat, params),
            error_norm: weighted_error(&shell, &shell_hat, params)?,
        })
    };

    let mut y = pack_cell(&sc.truth);
    y.extend(pack_cell(&sc.estimate));
    let mut t = sc.truth.time;
    let end = t + sc.horizon;
    let interval = T::lit(sc.options.sample_interval);
    let mut next_sample = t + interval;
    let mut samples = vec![record(&y, t, 0)?];
    while t < end {
        let k = noise.index(t.as_f64());
        let stop = next_sample.min(end).min(T::lit(noise.boundary(k + 1)));
        let (_, truth_shell) = unpack_cell(&y[..np], nn, params.c_beta);
        let (_, shell_hat) = unpack_cell(&y[np..], mn, params.c_beta);
        let mut limit = cell_step_limit(truth_shell.r_p, params, ns, nn).min(cell_step_limit(shell_hat.r_p, params, ms, mn));
        let (p, q) = observer_gains_pos(shell_hat.r_p, ms, &sc.obs, params)?;
        let ds = (params.pos.radius - shell_hat.r_p) / T::from_usize_lossy(ms - 1);
        let inj_rate = T::lit(2.0) * q / ds + p.iter().copied().fold(T::zero(), T::max);
        limit = limit.min(T::lit(0.5) / inj_rate);
        let (dt, t_new) = if t + limit >= stop { (stop - t, stop) } else { (limit, t + limit) };
        let y1 = match rk4_step::<T, Error, _>(|_, y| eval(y, k), t, &y, dt) {
            Ok(v) => v,
            Err(e) if e.is_validity_halt() => return Ok(halted(samples, t.as_f64(), &e)),
            Err(e) => return Err(e),
        };
        y = y1;
        let last = y.len() - 1;
        y[last] = clamp_interface(y[last], params);
        t = t_new;
        if y[np - 1] <= T::lit(sc.options.r_min_fraction) * params.pos.radius {
            let e = Error::Validity { time: t.as_f64(), reason: "interface reached the guard radius".into() };
            return Ok(halted(samples, t.as_f64(), &e));
        }
        if t >= next_sample || t >= end {
            samples.push(record(&y, t, noise.index(t.as_f64()))?);
            next_sample += interval;
        }
    }
    Ok(EstimationTrajectory { samples, halt: None })
}

/// Average of the positive particle for a packed estimate, exposed for the filter.
pub(crate) fn shell_soc<T: Real>(shell: &ShellState<T>, params: &CellParams<T>) -> T {
    soc(pos_average(shell, params), params.pos.c_max)
}

/// Negative estimate that matches the lithium total of `truth` given the
/// positive estimate `shell_hat`.
pub fn matched_negative<T: Real>(truth: &CellState<T>, shell_hat: &ShellState<T>, params: &CellParams<T>, nodes: usize) -> NegParticleState<T> {
    let total = total_lithium(&truth.neg, &truth.shell, params);
    let pos = params.pos.eps * params.pos.thickness * pos_average(shell_hat, params);
    NegParticleState::uniform((total - pos) / (params.neg.eps * params.neg.thickness), nodes)
}

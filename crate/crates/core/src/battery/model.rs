use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{diffusion_step_limit, rk4_step};
use crate::real::Real;
use crate::stefan::Halt;

use super::ocp::OcpPair;
use super::params::{butler_volmer, molar_flux, soc, CellParams, Electrode};

/// Grid sizes, sampling and guards for the cell solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryOptions {
    /// Nodes on the positive shell, interface node included.
    pub shell_nodes: usize,
    /// Nodes on the negative particle radius, centre included.
    pub neg_nodes: usize,
    /// Spacing of recorded samples, s.
    pub sample_interval: f64,
    /// The positive interface may not come closer to the centre than this fraction of `R_p+`.
    pub r_min_fraction: f64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self { shell_nodes: 50, neg_nodes: 50, sample_interval: 1.0, r_min_fraction: 1e-3 }
    }
}

impl BatteryOptions {
    pub fn validate(&self) -> Result<()> {
        if self.shell_nodes < 4 || self.neg_nodes < 4 {
            return Err(Error::InvalidParams("battery grids need at least 4 nodes".into()));
        }
        if !(self.sample_interval > 0.0) {
            return Err(Error::InvalidParams("sample_interval must be positive".into()));
        }
        if !(self.r_min_fraction > 0.0 && self.r_min_fraction < 0.5) {
            return Err(Error::InvalidParams("r_min_fraction must lie in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Concentration on a uniform radial grid over `[0, R_p-]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegParticleState<T> {
    pub c: Vec<T>,
}

/// Interface radius and shell concentration on a uniform grid in
/// `eta = (r - r_p) / (R_p+ - r_p)`. `c[0]` is the interface value `c_beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellState<T> {
    pub r_p: T,
    pub c: Vec<T>,
}

impl<T: Real> NegParticleState<T> {
    pub fn uniform(c: T, nodes: usize) -> Self {
        Self { c: vec![c; nodes] }
    }

    pub fn surface(&self) -> T {
        self.c[self.c.len() - 1]
    }
}

impl<T: Real> ShellState<T> {
    pub fn uniform(r_p: T, c_beta: T, nodes: usize) -> Self {
        Self { r_p, c: vec![c_beta; nodes] }
    }

    /// Steady spherical profile carrying the surface flux `j_pos` to the
    /// interface: `c = c_beta + A (1/r_p - 1/r)` with `D A / R^2 = -j_pos`.
    pub fn quasi_steady(r_p: T, j_pos: T, params: &CellParams<T>, nodes: usize) -> Self {
        let big_r = params.pos.radius;
        let a = -j_pos * big_r * big_r / params.pos.diffusivity;
        let c = shell_nodes(r_p, big_r, nodes).into_iter().map(|r| params.c_beta + a * (T::one() / r_p - T::one() / r)).collect();
        Self { r_p, c }
    }

    pub fn surface(&self) -> T {
        self.c[self.c.len() - 1]
    }

    /// Concentration at radius `r`: `c_alpha` in the core, linear between shell nodes.
    pub fn value_at(&self, r: T, params: &CellParams<T>) -> T {
        if r < self.r_p {
            return params.c_alpha;
        }
        let n = self.c.len();
        let x = (r - self.r_p) / (params.pos.radius - self.r_p) * T::from_usize_lossy(n - 1);
        let i = x.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = x - T::from_usize_lossy(i);
        self.c[i] + w * (self.c[i + 1] - self.c[i])
    }
}

/// Node radii of an `n`-node shell over `[r_p, R]`.
pub(crate) fn shell_nodes<T: Real>(r_p: T, big_r: T, n: usize) -> Vec<T> {
    let step = (big_r - r_p) / T::from_usize_lossy(n - 1);
    (0..n).map(|i| if i + 1 == n { big_r } else { r_p + T::from_usize_lossy(i) * step }).collect()
}

/// Control volumes `(r_hi^3 - r_lo^3) / 3` around the nodes of a uniform
/// radial grid from `lo` to `hi`; the end cells are half cells.
pub(crate) fn cell_volumes<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    (0..n)
        .map(|i| {
            let a = if i == 0 { lo } else { lo + (T::from_usize_lossy(i) - half) * step };
            let b = if i + 1 == n { hi } else { lo + (T::from_usize_lossy(i) + half) * step };
            third * (b * b * b - a * a * a)
        })
        .collect()
}

/// Finite-volume spherical diffusion on `[0, R]` with a symmetric centre
/// cell, surface flux `D dc/dr(R) = surface_flux` and a uniform source.
pub(crate) fn neg_balance<T: Real>(c: &[T], big_r: T, d: T, surface_flux: T, source: T) -> Vec<T> {
    let n = c.len();
    let step = big_r / T::from_usize_lossy(n - 1);
    let vol = cell_volumes(T::zero(), big_r, n);
    let half = T::lit(0.5);
    let face = |i: usize| {
        let rf = (T::from_usize_lossy(i) + half) * step;
        rf * rf * d * (c[i + 1] - c[i]) / step
    };
    let mut out = Vec::with_capacity(n);
    let mut left = T::zero();
    for i in 0..n {
        let right = if i + 1 == n { big_r * big_r * surface_flux } else { face(i) };
        out.push((right - left) / vol[i] + source);
        left = right;
    }
    out
}

/// Concentration rates of the negative particle for molar flux `j_neg`.
pub fn neg_rhs<T: Real>(state: &NegParticleState<T>, j_neg: T, params: &CellParams<T>) -> Vec<T> {
    neg_balance(&state.c, params.neg.radius, params.neg.diffusivity, -j_neg, T::zero())
}

/// Interface speed from the balance of the first shell cell, which holds
/// `c_beta` while its faces move. With `extra` the additional interface
/// flux (mol/(m^2 s)) this solves
/// `(c_beta - c_alpha) dr_p/dt = -D dc/dr(r_p) + extra`
/// with `D dc/dr(r_p)` the discrete flux the first cell passes to the core,
/// so that lithium is conserved exactly on the grid.
pub(crate) fn interface_rate<T: Real>(r_p: T, c: &[T], params: &CellParams<T>, extra: T) -> Result<T> {
    let n = c.len();
    let big_r = params.pos.radius;
    let d = params.pos.diffusivity;
    let step = (big_r - r_p) / T::from_usize_lossy(n - 1);
    let half = T::lit(0.5);
    let eta_half = half / T::from_usize_lossy(n - 1);
    let r_half = r_p + half * step;
    let grad = (c[1] - c[0]) / step;
    let c_half = half * (c[0] + c[1]);
    let jump = params.c_beta - params.c_alpha;
    let denom = jump * r_p * r_p - r_half * r_half * (T::one() - eta_half) * (params.c_beta - c_half);
    if !(denom > T::zero()) {
        return Err(Error::Validity { time: f64::NAN, reason: "interface balance lost its sign".into() });
    }
    Ok((-r_half * r_half * d * grad + r_p * r_p * extra) / denom)
}

/// Shell concentration rates on the moving grid for a given interface speed.
/// `surface_flux` is `D dc/dr(R)`; `injection` adds `gain[i] * scale` per
/// unit volume to the nodes past the interface.
pub(crate) fn shell_balance<T: Real>(
    r_p: T,
    r_p_dot: T,
    c: &[T],
    params: &CellParams<T>,
    surface_flux: T,
    injection: Option<(&[T], T)>,
) -> Vec<T> {
    let n = c.len();
    let big_r = params.pos.radius;
    let d = params.pos.diffusivity;
    let nm1 = T::from_usize_lossy(n - 1);
    let step = (big_r - r_p) / nm1;
    let half = T::lit(0.5);
    let vol = cell_volumes(r_p, big_r, n);
    // Face i sits between nodes i and i + 1 and moves with the grid.
    let face = |i: usize| -> (T, T) {
        let eta = (T::from_usize_lossy(i) + half) / nm1;
        let r = r_p + eta * (big_r - r_p);
        let w = (T::one() - eta) * r_p_dot;
        let flux = r * r * (d * (c[i + 1] - c[i]) / step + w * half * (c[i] + c[i + 1]));
        (flux, r * r * w)
    };
    let mut out = vec![T::zero(); n];
    let (mut left, mut left_sweep) = face(0);
    for i in 1..n {
        let (right, right_sweep) = if i + 1 == n { (big_r * big_r * surface_flux, T::zero()) } else { face(i) };
        let dvol = right_sweep - left_sweep;
        let mut rate = (right - left - c[i] * dvol) / vol[i];
        if let Some((gain, scale)) = injection {
            rate += gain[i] * scale;
        }
        out[i] = rate;
        left = right;
        left_sweep = right_sweep;
    }
    out
}

/// Shell concentration rates and interface speed for molar flux `j_pos`.
pub fn shell_rhs<T: Real>(state: &ShellState<T>, j_pos: T, params: &CellParams<T>) -> Result<(Vec<T>, T)> {
    if !(state.r_p > T::zero() && state.r_p < params.pos.radius) {
        return Err(Error::Validity { time: f64::NAN, reason: format!("interface radius {} outside (0, R_p+)", state.r_p) });
    }
    let r_dot = interface_rate(state.r_p, &state.c, params, T::zero())?;
    Ok((shell_balance(state.r_p, r_dot, &state.c, params, -j_pos, None), r_dot))
}

/// Volume average over the negative particle, mol/m^3.
pub fn neg_average<T: Real>(state: &NegParticleState<T>, params: &CellParams<T>) -> T {
    let big_r = params.neg.radius;
    let vol = cell_volumes(T::zero(), big_r, state.c.len());
    T::lit(3.0) / (big_r * big_r * big_r) * vol.iter().zip(&state.c).map(|(v, c)| *v * *c).sum::<T>()
}

/// Volume average over the positive particle, core included, mol/m^3.
pub fn pos_average<T: Real>(state: &ShellState<T>, params: &CellParams<T>) -> T {
    let big_r = params.pos.radius;
    let vol = cell_volumes(state.r_p, big_r, state.c.len());
    let core = params.c_alpha * state.r_p.powi(3) / T::lit(3.0);
    let shell: T = vol.iter().zip(&state.c).map(|(v, c)| *v * *c).sum();
    T::lit(3.0) / (big_r * big_r * big_r) * (core + shell)
}

/// Lithium in the solid phase per unit area, mol/m^2.
pub fn total_lithium<T: Real>(neg: &NegParticleState<T>, shell: &ShellState<T>, params: &CellParams<T>) -> T {
    params.neg.eps * params.neg.thickness * neg_average(neg, params) + params.pos.eps * params.pos.thickness * pos_average(shell, params)
}

/// `V = phi_+ - phi_-` with `phi = eta + U(c_ss / c_max) + R_f F j`, less
/// `I (R_c- + R_c+)` when contact resistance is switched on.
pub fn terminal_voltage<T: Real>(
    neg: &NegParticleState<T>,
    shell: &ShellState<T>,
    current: T,
    ocp: &OcpPair<T>,
    params: &CellParams<T>,
) -> Result<T> {
    let phi = |e: Electrode, c_ss: T| -> Result<T> {
        let ep = params.electrode(e);
        let j = molar_flux(current, e, params);
        let curve = match e {
            Electrode::Neg => &ocp.neg,
            Electrode::Pos => &ocp.pos,
        };
        Ok(butler_volmer(j, c_ss, e, params)? + curve.eval(c_ss / ep.c_max) + ep.r_film * params.faraday * j)
    };
    let mut v = phi(Electrode::Pos, shell.surface())? - phi(Electrode::Neg, neg.surface())?;
    if params.contact_resistance {
        v -= current * (params.neg.r_contact + params.pos.r_contact);
    }
    Ok(v)
}

/// Both particles at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState<T> {
    pub time: T,
    pub neg: NegParticleState<T>,
    pub shell: ShellState<T>,
}

impl<T: Real> CellState<T> {
    /// Negative particle uniform at `neg_fraction * c_max-`; positive shell on
    /// the quasi-steady profile for `current` with the interface at `r_p`.
    pub fn initial(params: &CellParams<T>, current: T, r_p: T, neg_fraction: T, opts: &BatteryOptions) -> Self {
        let j_pos = molar_flux(current, Electrode::Pos, params);
        Self {
            time: T::zero(),
            neg: NegParticleState::uniform(neg_fraction * params.neg.c_max, opts.neg_nodes),
            shell: ShellState::quasi_steady(r_p, j_pos, params, opts.shell_nodes),
        }
    }

    pub fn validate(&self, params: &CellParams<T>) -> Result<()> {
        if self.neg.c.len() < 4 || self.shell.c.len() < 4 {
            return Err(Error::InvalidState("battery grids need at least 4 nodes".into()));
        }
        if !(self.shell.r_p > T::zero() && self.shell.r_p < params.pos.radius) {
            return Err(Error::InvalidState("interface radius outside (0, R_p+)".into()));
        }
        if self.shell.c[0] != params.c_beta {
            return Err(Error::InvalidState("shell must hold c_beta at the interface".into()));
        }
        let bad = |c: &[T], max: T| c.iter().any(|v| !(*v >= T::zero() && *v <= max));
        if bad(&self.neg.c, params.neg.c_max) || bad(&self.shell.c, params.pos.c_max) {
            return Err(Error::InvalidState("concentration outside [0, c_max]".into()));
        }
        Ok(())
    }
}

/// Packed `[neg.., shell[1..], r_p]`.
pub(crate) fn pack_cell<T: Real>(s: &CellState<T>) -> Vec<T> {
    let mut y = s.neg.c.clone();
    y.extend_from_slice(&s.shell.c[1..]);
    y.push(s.shell.r_p);
    y
}

pub(crate) fn unpack_cell<T: Real>(y: &[T], nn: usize, c_beta: T) -> (NegParticleState<T>, ShellState<T>) {
    let neg = NegParticleState { c: y[..nn].to_vec() };
    let mut c = vec![c_beta];
    c.extend_from_slice(&y[nn..y.len() - 1]);
    (neg, ShellState { r_p: y[y.len() - 1], c })
}

/// Packed rates of the cell for a constant current.
pub(crate) fn cell_rates<T: Real>(y: &[T], nn: usize, current: T, params: &CellParams<T>) -> Result<Vec<T>> {
    let (neg, shell) = unpack_cell(y, nn, params.c_beta);
    let mut dy = neg_rhs(&neg, molar_flux(current, Electrode::Neg, params), params);
    let (dc, r_dot) = shell_rhs(&shell, molar_flux(current, Electrode::Pos, params), params)?;
    dy.extend_from_slice(&dc[1..]);
    dy.push(r_dot);
    Ok(dy)
}

/// Explicit RK4 step limit for both particles.
pub(crate) fn cell_step_limit<T: Real>(r_p: T, params: &CellParams<T>, shell_nodes: usize, neg_nodes: usize) -> T {
    let ds = T::one() / T::from_usize_lossy(shell_nodes - 1);
    let dn = T::one() / T::from_usize_lossy(neg_nodes - 1);
    let s = params.pos.radius - r_p;
    // Half cells at the surface and the centre cell are stiffer than the interior.
    let shell = diffusion_step_limit(ds, T::lit(2.0) * params.pos.diffusivity / (s * s));
    let neg = diffusion_step_limit(dn, T::lit(3.0) * params.neg.diffusivity / (params.neg.radius * params.neg.radius));
    shell.min(neg)
}

/// One recorded discharge state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeSample<T> {
    pub time: T,
    pub r_p: T,
    pub c_ss_pos: T,
    pub c_ss_neg: T,
    pub soc_pos: T,
    pub soc_neg: T,
    pub voltage: T,
    pub lithium: T,
    /// Interface speed over the step that ended at this sample, m/s.
    pub r_p_dot: T,
    /// Shell concentration over `c_max+`.
    pub shell: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeTrajectory<T> {
    pub samples: Vec<DischargeSample<T>>,
    pub halt: Option<Halt>,
    /// Largest interface speed seen at any RK4 stage, m/s. Negative means the
    /// core shrank at every step.
    pub max_r_p_dot: T,
}

fn discharge_sample<T: Real>(
    s: &CellState<T>,
    current: T,
    r_p_dot: T,
    ocp: &OcpPair<T>,
    params: &CellParams<T>,
) -> Result<DischargeSample<T>> {
    Ok(DischargeSample {
        time: s.time,
        r_p: s.shell.r_p,
        c_ss_pos: s.shell.surface(),
        c_ss_neg: s.neg.surface(),
        soc_pos: soc(pos_average(&s.shell, params), params.pos.c_max),
        soc_neg: soc(neg_average(&s.neg, params), params.neg.c_max),
        voltage: terminal_voltage(&s.neg, &s.shell, current, ocp, params)?,
        lithium: total_lithium(&s.neg, &s.shell, params),
        r_p_dot,
        shell: s.shell.c.iter().map(|c| *c / params.pos.c_max).collect(),
    })
}

fn stamp(e: Error, time: f64) -> Error {
    match e {
        Error::Validity { reason, .. } => Error::Validity { time, reason },
        other => other,
    }
}

/// Constant-current run of the cell. Stops early, with a halt record, when
/// the interface reaches the guard radius or a surface concentration
/// saturates.
pub fn simulate_discharge<T: Real>(
    params: &CellParams<T>,
    ocp: &OcpPair<T>,
    current: T,
    init: &CellState<T>,
    horizon: T,
    opts: &BatteryOptions,
) -> Result<DischargeTrajectory<T>> {
    params.validate()?;
    opts.validate()?;
    init.validate(params)?;
    let nn = init.neg.c.len();
    let ns = init.shell.c.len();
    let r_min = T::lit(opts.r_min_fraction) * params.pos.radius;
    let mut state = init.clone();
    let mut max_r_dot = T::neg_infinity();
    let r_dot0 = cell_rates(&pack_cell(&state), nn, current, params)?[nn + ns - 1];
    let mut samples = vec![discharge_sample(&state, current, r_dot0, ocp, params).map_err(|e| stamp(e, 0.0))?];
    let interval = T::lit(opts.sample_interval);
    let end = state.time + horizon;
    let mut next_sample = state.time + interval;
    while state.time < end {
        let stop = next_sample.min(end);
        let limit = cell_step_limit(state.shell.r_p, params, ns, nn);
        let (dt, t_new) = if state.time + limit >= stop { (stop - state.time, stop) } else { (limit, state.time + limit) };
        let y = pack_cell(&state);
        let mut stage_max = T::neg_infinity();
        let step = rk4_step::<T, Error, _>(
            |_, y| {
                let dy = cell_rates(y, nn, current, params)?;
                stage_max = stage_max.max(dy[dy.len() - 1]);
                Ok(dy)
            },
            state.time,
            &y,
            dt,
        );
        let t_f = state.time.as_f64();
        let y1 = match step {
            Ok(v) => v,
            Err(e) if e.is_validity_halt() => {
                return Ok(DischargeTrajectory { samples, halt: Some(Halt { time: t_f, reason: e.to_string() }), max_r_p_dot: max_r_dot });
            }
            Err(e) => return Err(e),
        };
        max_r_dot = max_r_dot.max(stage_max);
        let (neg, shell) = unpack_cell(&y1, nn, params.c_beta);
        state = CellState { time: t_new, neg, shell };
        if state.shell.r_p <= r_min {
            let reason = format!("interface reached the guard radius {:.3e} m", r_min.as_f64());
            return Ok(DischargeTrajectory { samples, halt: Some(Halt { time: t_new.as_f64(), reason }), max_r_p_dot: max_r_dot });
        }
        if state.time >= next_sample || state.time >= end {
            match discharge_sample(&state, current, stage_max, ocp, params) {
                Ok(s) => samples.push(s),
                Err(e) if e.is_validity_halt() => {
                    let reason = stamp(e, t_new.as_f64()).to_string();
                    return Ok(DischargeTrajectory { samples, halt: Some(Halt { time: t_new.as_f64(), reason }), max_r_p_dot: max_r_dot });
                }
                Err(e) => return Err(e),
            }
            next_sample += interval;
        }
    }
    Ok(DischargeTrajectory { samples, halt: None, max_r_p_dot: max_r_dot })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{diff_right, diffusion_step_limit, rk4_step};
use crate::real::Real;
use crate::stefan::Halt;

use super::forcing::{next_month_start, MonthlyForcing, SnowSchedule, YEAR_SECONDS};
use super::params::{effective_coeffs, salinity_at_fraction, SeaIceParams};
use super::surface::{initial_interface_temperature, solve_surface, SurfaceStep};

/// Grid and bookkeeping settings of a column run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaIceOptions {
    /// Nodes across the snow layer, both ends included.
    pub snow_nodes: usize,
    /// Nodes across the ice, both ends included.
    pub ice_nodes: usize,
    /// Time between recorded samples, s.
    pub sample_interval: f64,
    /// Snow thinner than this is merged into the surface melt, m.
    pub min_snow_depth: f64,
    /// The run stops if the ice gets thinner than this, m.
    pub min_thickness: f64,
    /// Use the salinity-dependent heat capacity and conductivity.
    pub salinity: bool,
}

impl Default for SeaIceOptions {
    fn default() -> Self {
        Self {
            snow_nodes: 11,
            ice_nodes: 100,
            sample_interval: 86_400.0,
            min_snow_depth: 0.02,
            min_thickness: 0.1,
            salinity: true,
        }
    }
}

impl SeaIceOptions {
    pub fn validate(&self) -> Result<()> {
        if self.snow_nodes < 4 || self.ice_nodes < 4 {
            return Err(Error::InvalidParams("snow and ice grids need at least 4 nodes".into()));
        }
        if !(self.sample_interval > 0.0) || !(self.min_snow_depth > 0.0) || !(self.min_thickness > 0.0) {
            return Err(Error::InvalidParams("sample interval and thickness floors must be positive".into()));
        }
        Ok(())
    }
}

/// Snow and ice column on normalised grids. `snow[0]` is the snow surface,
/// `snow[last] == ice[0]` the snow/ice interface and `ice[last]` the bottom.
/// Bare ice has an empty `snow` and zero `snow_depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceState<T> {
    pub time: T,
    /// Snow depth `h`, m.
    pub snow_depth: T,
    /// Ice thickness `H`, m.
    pub thickness: T,
    /// Ice lost at the top since the start, m. The ice top sits this far
    /// below its initial level.
    pub ice_top: T,
    /// Snowfall on bare ice that has not yet formed a layer, m.
    pub pending_snow: T,
    pub snow: Vec<T>,
    pub ice: Vec<T>,
}

impl<T: Real> SeaIceState<T> {
    /// Linear snow and ice profiles carrying the same conductive flux, the
    /// interface temperature fixed by the surface balance under `f_a`, and a
    /// sinusoid of amplitude `amplitude` (C) on the ice profile.
    #[allow(clippy::too_many_arguments)]
    pub fn initial(
        params: &SeaIceParams<T>,
        f_a: T,
        snow_depth: T,
        thickness: T,
        amplitude: T,
        opts: &SeaIceOptions,
        time: T,
    ) -> Result<Self> {
        let t0 = initial_interface_temperature(params, f_a, snow_depth, thickness, params.tm2)?;
        let ni = opts.ice_nodes;
        let ice = (0..ni)
            .map(|i| {
                let xi = T::from_usize_lossy(i) / T::from_usize_lossy(ni - 1);
                if i + 1 == ni {
                    return params.tm2;
                }
                t0 + (params.tm2 - t0) * xi + amplitude * (T::lit(4.0) * T::PI() * xi).sin()
            })
            .collect();
        let snow = if snow_depth > T::zero() {
            let ns = opts.snow_nodes;
            let grad = params.k0 * (params.tm2 - t0) / (params.k_s * thickness);
            (0..ns)
                .map(|i| {
                    let eta = T::from_usize_lossy(i) / T::from_usize_lossy(ns - 1);
                    t0 - grad * snow_depth * (T::one() - eta)
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { time, snow_depth, thickness, ice_top: T::zero(), pending_snow: T::zero(), snow, ice })
    }

    pub fn surface_temp(&self) -> T {
        self.snow.first().copied().unwrap_or(self.ice[0])
    }

    /// Ice temperature at normalised depth `xi`, linear between nodes.
    pub fn ice_temp_at(&self, xi: T) -> T {
        crate::numerics::interp_uniform(&self.ice, T::one(), xi)
    }

    pub fn validate(&self, params: &SeaIceParams<T>) -> Result<()> {
        if self.ice.len() < 4 {
            return Err(Error::InvalidState("ice grid needs at least 4 nodes".into()));
        }
        if !(self.thickness > T::zero()) || !(self.snow_depth >= T::zero()) {
            return Err(Error::InvalidState("thicknesses must be positive".into()));
        }
        if self.snow.is_empty() != (self.snow_depth == T::zero()) {
            return Err(Error::InvalidState("snow profile and snow depth disagree".into()));
        }
        if !self.snow.is_empty() && self.snow.len() < 4 {
            return Err(Error::InvalidState("snow grid needs at least 4 nodes".into()));
        }
        if self.snow.iter().chain(&self.ice).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite temperature".into()));
        }
        if self.ice.last().copied() != Some(params.tm2) {
            return Err(Error::InvalidState("ice bottom must sit at Tm2".into()));
        }
        Ok(())
    }
}

/// Everything the column derivative needs besides the packed state.
pub(crate) struct Column<'a, T> {
    pub params: &'a SeaIceParams<T>,
    pub salinity: Option<&'a [T]>,
    pub f_a: T,
    pub snowfall: T,
    pub snow_nodes: usize,
    pub ice_nodes: usize,
}

/// Boundary values and rates found while evaluating the column derivative.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ColumnInfo<T> {
    pub surface: SurfaceStep<T>,
    pub interface_temp: T,
    pub thickness_dot: T,
    /// Largest `k_i / (rho c_i)` over the ice nodes.
    pub max_diffusivity: T,
}

/// Packed layout: `[h, H, ice_top, snow interior.., ice interior..]`.
pub(crate) fn pack<T: Real>(state: &SeaIceState<T>) -> Vec<T> {
    let mut y = Vec::with_capacity(3 + state.snow.len() + state.ice.len());
    y.extend([state.snow_depth, state.thickness, state.ice_top]);
    if !state.snow.is_empty() {
        y.extend_from_slice(&state.snow[1..state.snow.len() - 1]);
    }
    y.extend_from_slice(&state.ice[1..state.ice.len() - 1]);
    y
}

impl<T: Real> Column<'_, T> {
    fn interiors<'y>(&self, y: &'y [T]) -> (&'y [T], &'y [T]) {
        let ns_in = self.snow_nodes.saturating_sub(2);
        (&y[3..3 + ns_in], &y[3 + ns_in..])
    }

    /// Rebuilds full profiles from the packed interior values.
    pub fn profiles(&self, y: &[T]) -> Result<(Vec<T>, Vec<T>, SurfaceStep<T>)> {
        let p = self.params;
        let (h, big_h) = (y[0], y[1]);
        if !(big_h > T::zero()) {
            return Err(Error::InvalidState(format!("ice thickness {big_h} m")));
        }
        let (snow_in, ice_in) = self.interiors(y);
        let ni = self.ice_nodes;
        let d_ice = big_h / T::from_usize_lossy(ni - 1);
        let mut ice = Vec::with_capacity(ni);
        ice.push(T::zero());
        ice.extend_from_slice(ice_in);
        ice.push(p.tm2);
        if self.snow_nodes == 0 {
            let surface = solve_surface(p, self.f_a, p.k0, ice[1], ice[2], d_ice)?;
            ice[0] = surface.temperature;
            return Ok((Vec::new(), ice, surface));
        }
        if !(h > T::zero()) {
            return Err(Error::InvalidState(format!("snow depth {h} m")));
        }
        let ns = self.snow_nodes;
        let d_snow = h / T::from_usize_lossy(ns - 1);
        let mut snow = Vec::with_capacity(ns);
        snow.push(T::zero());
        snow.extend_from_slice(snow_in);
        snow.push(T::zero());
        let surface = solve_surface(p, self.f_a, p.k_s, snow[1], snow[2], d_snow)?;
        snow[0] = surface.temperature;
        // Flux continuity with one-sided differences on both sides.
        let two = T::lit(2.0);
        let (a_s, a_i) = (p.k_s / (two * d_snow), p.k0 / (two * d_ice));
        let four = T::lit(4.0);
        let t_int = (a_s * (four * snow[ns - 2] - snow[ns - 3]) + a_i * (four * ice[1] - ice[2]))
            / (T::lit(3.0) * (a_s + a_i));
        snow[ns - 1] = t_int;
        ice[0] = t_int;
        Ok((snow, ice, surface))
    }

    /// Derivative of the packed state.
    pub fn rhs(&self, y: &[T]) -> Result<(Vec<T>, ColumnInfo<T>)> {
        let p = self.params;
        let (snow, ice, surface) = self.profiles(y)?;
        let (h, big_h) = (y[0], y[1]);
        let ni = self.ice_nodes;
        let dxi = T::one() / T::from_usize_lossy(ni - 1);
        let two = T::lit(2.0);

        let bare = snow.is_empty();
        let (h_dot, top_dot) = if bare {
            (T::zero(), -surface.h_dot)
        } else {
            (self.snowfall + surface.h_dot, T::zero())
        };

        let k_floor = T::lit(K_FLOOR) * p.k0;
        let mut coeffs = Vec::with_capacity(ni);
        for (i, &t) in ice.iter().enumerate() {
            let s = self.salinity.map_or(T::zero(), |s| s[i]);
            let (c, k) = effective_coeffs(t, s, p)?;
            coeffs.push((c, k.max(k_floor)));
        }
        let k_bottom = coeffs[ni - 1].1;
        let grad_bottom = diff_right(&ice, dxi) / big_h;
        let bottom_dot = (k_bottom * grad_bottom - p.f_w) / p.q_latent;
        let thickness_dot = bottom_dot - top_dot;

        let mut dy = Vec::with_capacity(y.len());
        dy.extend([h_dot, thickness_dot, top_dot]);

        if !bare {
            let ns = snow.len();
            let deta = T::one() / T::from_usize_lossy(ns - 1);
            let diff = p.snow_diffusivity() / (h * h * deta * deta);
            for j in 1..ns - 1 {
                let eta = T::from_usize_lossy(j) * deta;
                let lap = snow[j + 1] - two * snow[j] + snow[j - 1];
                let adv = (snow[j + 1] - snow[j - 1]) / (two * deta);
                dy.push(diff * lap - h_dot * (T::one() - eta) / h * adv);
            }
        }

        let inv_h2 = T::one() / (big_h * big_h * dxi * dxi);
        let mut max_diffusivity = T::zero();
        for i in 1..ni - 1 {
            let xi = T::from_usize_lossy(i) * dxi;
            let (c, k) = coeffs[i];
            let rc = p.rho * c;
            let d = k / rc;
            max_diffusivity = max_diffusivity.max(d);
            let lap = ice[i + 1] - two * ice[i] + ice[i - 1];
            let adv = (ice[i + 1] - ice[i - 1]) / (two * dxi);
            let src = p.i0_pen * p.kappa_i * (-p.kappa_i * xi * big_h).exp() / rc;
            dy.push(d * lap * inv_h2 + src + (top_dot + xi * thickness_dot) / big_h * adv);
        }

        let info = ColumnInfo { surface, interface_temp: ice[0], thickness_dot, max_diffusivity };
        Ok((dy, info))
    }

    /// Explicit RK4 step limit for the current geometry.
    pub fn step_limit(&self, y: &[T], info: &ColumnInfo<T>) -> T {
        let dxi = T::one() / T::from_usize_lossy(self.ice_nodes - 1);
        let big_h = y[1];
        let mut lim = diffusion_step_limit(dxi, info.max_diffusivity.max(self.params.diffusivity()) / (big_h * big_h));
        if self.snow_nodes > 0 {
            let deta = T::one() / T::from_usize_lossy(self.snow_nodes - 1);
            lim = lim.min(diffusion_step_limit(deta, self.params.snow_diffusivity() / (y[0] * y[0])));
        }
        lim
    }
}

/// Lower bound on the saline conductivity as a fraction of `k0`.
pub const K_FLOOR: f64 = 0.1;

/// Salinity at each node of an `n`-node ice grid.
pub(crate) fn salinity_profile<T: Real>(params: &SeaIceParams<T>, n: usize) -> Vec<T> {
    (0..n).map(|i| salinity_at_fraction(T::from_usize_lossy(i) / T::from_usize_lossy(n - 1), &params.salinity)).collect()
}

pub(crate) fn column<'a, T: Real>(
    params: &'a SeaIceParams<T>,
    salinity: Option<&'a [T]>,
    forcing: &MonthlyForcing<T>,
    snowfall: &SnowSchedule<T>,
    state: &SeaIceState<T>,
) -> Column<'a, T> {
    Column {
        params,
        salinity,
        f_a: forcing.at(state.time).total(),
        snowfall: snowfall.rate(state.time),
        snow_nodes: state.snow.len(),
        ice_nodes: state.ice.len(),
    }
}

/// Surface temperature and top-layer ablation for `state` under the forcing
/// of its month.
pub fn surface_step<T: Real>(
    state: &SeaIceState<T>,
    forcing: &MonthlyForcing<T>,
    params: &SeaIceParams<T>,
) -> Result<SurfaceStep<T>> {
    let f_a = forcing.at(state.time).total();
    if state.snow.is_empty() {
        let dx = state.thickness / T::from_usize_lossy(state.ice.len() - 1);
        solve_surface(params, f_a, params.k0, state.ice[1], state.ice[2], dx)
    } else {
        let dx = state.snow_depth / T::from_usize_lossy(state.snow.len() - 1);
        solve_surface(params, f_a, params.k_s, state.snow[1], state.snow[2], dx)
    }
}

/// Time derivatives of a column state: `(h_dot, H_dot, d snow, d ice)`.
/// Boundary nodes carry zero rates; they follow the algebraic conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeaIceRates<T> {
    pub h_dot: T,
    pub thickness_dot: T,
    pub top_dot: T,
    pub snow: Vec<T>,
    pub ice: Vec<T>,
    /// Surface temperature from the balance solve, C.
    pub surface_temp: T,
    pub interface_temp: T,
}

/// Column derivative under constant atmospheric flux `f_a` and snowfall
/// rate `snowfall` (m/s). With `salinity_on` false the ice obeys the
/// constant-coefficient heat equation.
pub fn seaice_rhs<T: Real>(
    state: &SeaIceState<T>,
    f_a: T,
    snowfall: T,
    params: &SeaIceParams<T>,
    salinity_on: bool,
) -> Result<SeaIceRates<T>> {
    state.validate(params)?;
    let sal = salinity_on.then(|| salinity_profile(params, state.ice.len()));
    let col = Column {
        params,
        salinity: sal.as_deref(),
        f_a,
        snowfall,
        snow_nodes: state.snow.len(),
        ice_nodes: state.ice.len(),
    };
    let y = pack(state);
    let (dy, info) = col.rhs(&y)?;
    let ns_in = state.snow.len().saturating_sub(2);
    let mut snow = vec![T::zero(); state.snow.len()];
    if ns_in > 0 {
        snow[1..=ns_in].copy_from_slice(&dy[3..3 + ns_in]);
    }
    let mut ice = vec![T::zero(); state.ice.len()];
    let ni = ice.len();
    ice[1..ni - 1].copy_from_slice(&dy[3 + ns_in..]);
    Ok(SeaIceRates {
        h_dot: dy[0],
        thickness_dot: dy[1],
        top_dot: dy[2],
        snow,
        ice,
        surface_temp: info.surface.temperature,
        interface_temp: info.interface_temp,
    })
}

/// Writes packed values and the algebraic boundary nodes back into `state`.
pub(crate) fn unpack<T: Real>(col: &Column<'_, T>, y: &[T], state: &mut SeaIceState<T>) -> Result<SurfaceStep<T>> {
    let (snow, ice, surface) = col.profiles(y)?;
    state.snow_depth = if snow.is_empty() { T::zero() } else { y[0] };
    state.thickness = y[1];
    state.ice_top = y[2];
    state.snow = snow;
    state.ice = ice;
    Ok(surface)
}

/// Drops a snow layer thinner than the floor and turns accumulated snowfall
/// on bare ice into a new isothermal layer.
pub(crate) fn regrid_snow<T: Real>(state: &mut SeaIceState<T>, opts: &SeaIceOptions) {
    let floor = T::lit(opts.min_snow_depth);
    if !state.snow.is_empty() && state.snow_depth < floor {
        state.snow.clear();
        state.snow_depth = T::zero();
    } else if state.snow.is_empty() && state.pending_snow >= floor {
        state.snow = vec![state.ice[0]; opts.snow_nodes];
        state.snow_depth = state.pending_snow;
        state.pending_snow = T::zero();
    }
}

/// One recorded column state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceSample<T> {
    pub time: T,
    pub snow_depth: T,
    pub thickness: T,
    pub ice_top: T,
    pub surface_temp: T,
    pub interface_temp: T,
    pub melting: bool,
    /// Ice profile on the normalised grid, top to bottom.
    pub ice: Vec<T>,
}

impl<T: Real> SeaIceSample<T> {
    fn of(state: &SeaIceState<T>, melting: bool) -> Self {
        Self {
            time: state.time,
            snow_depth: state.snow_depth,
            thickness: state.thickness,
            ice_top: state.ice_top,
            surface_temp: state.surface_temp(),
            interface_temp: state.ice[0],
            melting,
            ice: state.ice.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaIceTrajectory<T> {
    pub samples: Vec<SeaIceSample<T>>,
    pub halt: Option<Halt>,
}

/// Advances `state` by one RK4 step, landing exactly on `stop` when it is
/// within reach. Returns the step taken and the surface solve at the new state.
pub(crate) fn column_step<T: Real>(
    col: &Column<'_, T>,
    state: &mut SeaIceState<T>,
    stop: T,
) -> Result<(T, SurfaceStep<T>)> {
    let y = pack(state);
    let (_, info) = col.rhs(&y)?;
    let limit = col.step_limit(&y, &info);
    let (dt, t_new) = if state.time + limit >= stop { (stop - state.time, stop) } else { (limit, state.time + limit) };
    if state.snow.is_empty() && !info.surface.melting {
        state.pending_snow += col.snowfall * dt;
    }
    let y1 = rk4_step::<T, Error, _>(|_, y| col.rhs(y).map(|r| r.0), state.time, &y, dt)?;
    let surface = unpack(col, &y1, state)?;
    state.time = t_new;
    Ok((dt, surface))
}

/// Integrates the column from `init` for `horizon` seconds under monthly
/// forcing held constant within each month, sampling every
/// `opts.sample_interval` seconds.
pub fn simulate<T: Real>(
    params: &SeaIceParams<T>,
    forcing: &MonthlyForcing<T>,
    snowfall: &SnowSchedule<T>,
    init: &SeaIceState<T>,
    horizon: T,
    opts: &SeaIceOptions,
) -> Result<SeaIceTrajectory<T>> {
    params.validate()?;
    forcing.validate()?;
    snowfall.validate()?;
    opts.validate()?;
    init.validate(params)?;
    if init.ice.len() != opts.ice_nodes {
        return Err(Error::InvalidState("initial ice grid does not match the options".into()));
    }
    let sal = opts.salinity.then(|| salinity_profile(params, opts.ice_nodes));
    let end = init.time + horizon;
    let interval = T::lit(opts.sample_interval);
    let min_h = T::lit(opts.min_thickness);

    let mut state = init.clone();
    // Surface and interface nodes are algebraic; put them on their balances.
    let first = {
        let col = column(params, sal.as_deref(), forcing, snowfall, &state);
        unpack(&col, &pack(&state), &mut state)?
    };
    let mut samples = vec![SeaIceSample::of(&state, first.melting)];
    let mut next_sample = state.time + interval;
    while state.time < end {
        let col = column(params, sal.as_deref(), forcing, snowfall, &state);
        let stop = next_month_start(state.time).min(next_sample).min(end);
        let (_, surface) = column_step(&col, &mut state, stop)?;
        regrid_snow(&mut state, opts);
        if state.thickness < min_h {
            samples.push(SeaIceSample::of(&state, surface.melting));
            let reason = format!("ice thickness {:.4e} m below the floor", state.thickness.as_f64());
            return Ok(SeaIceTrajectory { samples, halt: Some(Halt { time: state.time.as_f64(), reason }) });
        }
        if state.time >= next_sample || state.time >= end {
            samples.push(SeaIceSample::of(&state, surface.melting));
            next_sample += interval;
        }
    }
    Ok(SeaIceTrajectory { samples, halt: None })
}

/// Runs `years` full years from `init`.
pub fn simulate_annual<T: Real>(
    params: &SeaIceParams<T>,
    forcing: &MonthlyForcing<T>,
    snowfall: &SnowSchedule<T>,
    init: &SeaIceState<T>,
    years: usize,
    opts: &SeaIceOptions,
) -> Result<SeaIceTrajectory<T>> {
    simulate(params, forcing, snowfall, init, T::lit(years as f64 * YEAR_SECONDS), opts)
}

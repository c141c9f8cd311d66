use crate::error::{Error, Result};
use crate::real::Real;

use super::params::SeaIceParams;

/// Newton iteration budget for the surface balance.
pub const MAX_NEWTON: usize = 50;

/// Surface temperature and ablation from one balance solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceStep<T> {
    /// Surface temperature, C.
    pub temperature: T,
    /// Thickness change of the top layer from melting, m/s (zero or negative).
    pub h_dot: T,
    /// Balance residual at `temperature`, W/m^2. Positive only when melting.
    pub residual: T,
    pub melting: bool,
}

/// Root of a decreasing function on `(-inf, hi]` by Newton steps kept inside
/// a bisection bracket. `g` returns the value and derivative.
pub(crate) fn decreasing_root<T: Real>(g: impl Fn(T) -> (T, T), hi: T) -> Result<T> {
    let tol = T::lit(1e-10);
    let mut hi = hi;
    let mut lo = T::lit(-60.0);
    while g(lo).0 <= T::zero() {
        lo -= T::lit(60.0);
        if lo < T::lit(-240.0) {
            return Err(Error::SurfaceSolve("no sign change above -240 C".into()));
        }
    }
    let mut t = hi;
    for _ in 0..MAX_NEWTON {
        let (v, dv) = g(t);
        if !v.is_finite() || !dv.is_finite() {
            return Err(Error::SurfaceSolve(format!("non-finite balance at {t} C")));
        }
        if v.abs() <= tol {
            return Ok(t);
        }
        if v > T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - v / dv;
        if !(next > lo && next < hi) {
            next = T::lit(0.5) * (lo + hi);
        }
        if (next - t).abs() <= T::epsilon() * (T::one() + t.abs()) {
            return Ok(next);
        }
        t = next;
    }
    Err(Error::SurfaceSolve(format!("no convergence in {MAX_NEWTON} iterations")))
}

/// Radiative-conductive balance at the top of the column:
/// `F_a - I0 - sigma (T + 273)^4 + k dT/dx = 0`, with the gradient from the
/// one-sided stencil on the surface node and the next two nodes `t1`, `t2`
/// spaced `dx` apart. If the root would exceed `Tm1` the surface is held at
/// `Tm1` and the surplus melts the top layer at `-residual / q`.
pub fn solve_surface<T: Real>(params: &SeaIceParams<T>, f_a: T, k: T, t1: T, t2: T, dx: T) -> Result<SurfaceStep<T>> {
    if !(dx > T::zero()) {
        return Err(Error::InvalidState("surface layer has no thickness".into()));
    }
    let three = T::lit(3.0);
    let net = f_a - params.i0_pen;
    let g = |t: T| {
        let tk = t + params.kelvin_offset;
        let cond = k * (-three * t + T::lit(4.0) * t1 - t2) / (T::lit(2.0) * dx);
        let v = net - params.sigma_sb * tk.powi(4) + cond;
        let dv = -T::lit(4.0) * params.sigma_sb * tk.powi(3) - three * k / (T::lit(2.0) * dx);
        (v, dv)
    };
    let at_melt = g(params.tm1).0;
    if at_melt >= T::zero() {
        return Ok(SurfaceStep {
            temperature: params.tm1,
            h_dot: -at_melt / params.q_latent,
            residual: at_melt,
            melting: true,
        });
    }
    let t = decreasing_root(g, params.tm1)?;
    Ok(SurfaceStep { temperature: t, h_dot: T::zero(), residual: g(t).0, melting: false })
}

/// Temperature `T0` at the snow/ice interface for linear initial profiles:
/// ice from `T0` to `t_bottom` over `h_ice`, snow above it carrying the same
/// heat flux, and the surface in radiative balance (a quartic in `T0`).
pub fn initial_interface_temperature<T: Real>(
    params: &SeaIceParams<T>,
    f_a: T,
    h_snow: T,
    h_ice: T,
    t_bottom: T,
) -> Result<T> {
    let flux = params.k0 / h_ice;
    let lift = h_snow * flux / params.k_s;
    let net = f_a - params.i0_pen;
    let g = |t0: T| {
        // Surface temperature and conductive flux, both affine in T0.
        let ts = t0 - lift * (t_bottom - t0);
        let tk = ts + params.kelvin_offset;
        let v = net - params.sigma_sb * tk.powi(4) + flux * (t_bottom - t0);
        let dv = -T::lit(4.0) * params.sigma_sb * tk.powi(3) * (T::one() + lift) - flux;
        (v, dv)
    };
    // The surface must stay below Tm1, which bounds T0 from above.
    let hi = (params.tm1 + lift * t_bottom) / (T::one() + lift);
    if g(hi).0 >= T::zero() {
        return Ok(hi);
    }
    decreasing_root(g, hi)
}

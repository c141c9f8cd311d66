use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Shape of the bulk salinity profile `S(x) = A [1 - cos(pi (x/H)^(n / (m + x/H)))]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalinitySpec<T> {
    /// Amplitude, ppt.
    pub amplitude: T,
    pub n_exp: T,
    pub m_exp: T,
}

impl<T: Real> Default for SalinitySpec<T> {
    fn default() -> Self {
        Self { amplitude: T::lit(1.6), n_exp: T::lit(0.407), m_exp: T::lit(0.573) }
    }
}

impl<T: Real> SalinitySpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= T::zero()) || !(self.n_exp > T::zero()) || !(self.m_exp > T::zero()) {
            return Err(Error::InvalidParams("salinity needs A >= 0, n > 0, m > 0".into()));
        }
        Ok(())
    }
}

/// Salinity at depth `x` below the ice top in ice of thickness `h_ice`, ppt.
pub fn salinity<T: Real>(x: T, h_ice: T, spec: &SalinitySpec<T>) -> Result<T> {
    if !(h_ice > T::zero()) || !(x >= T::zero()) || x > h_ice {
        return Err(Error::InvalidState(format!("salinity depth {} outside [0, {}]", x, h_ice)));
    }
    Ok(salinity_at_fraction(x / h_ice, spec))
}

/// Salinity at the normalised depth `xi = x / H` in `[0, 1]`.
pub(crate) fn salinity_at_fraction<T: Real>(xi: T, spec: &SalinitySpec<T>) -> T {
    let p = spec.n_exp / (spec.m_exp + xi);
    spec.amplitude * (T::one() - (T::PI() * xi.powf(p)).cos())
}

/// Physical constants of the snow and ice column.
///
/// `gamma1` is stored in J C/kg; [`SeaIceParams::table`] converts the
/// tabulated kJ value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaIceParams<T> {
    /// Snow density, kg/m^3.
    pub rho_s: T,
    /// Snow conductivity, W/(m C).
    pub k_s: T,
    /// Ice density, kg/m^3.
    pub rho: T,
    /// Heat capacity of pure ice, J/(kg C). Also used for snow.
    pub c0: T,
    /// Conductivity of pure ice, W/(m C).
    pub k0: T,
    /// Salinity weight of the heat capacity, J C/kg.
    pub gamma1: T,
    /// Salinity weight of the conductivity, W/m.
    pub gamma2: T,
    /// Shortwave radiation penetrating the ice, W/m^2.
    pub i0_pen: T,
    /// Extinction rate of penetrating radiation, 1/m.
    pub kappa_i: T,
    /// Stefan-Boltzmann constant, W/(m^2 K^4).
    pub sigma_sb: T,
    /// Offset from Celsius to the radiating temperature.
    pub kelvin_offset: T,
    /// Volumetric latent heat of fusion, J/m^3.
    pub q_latent: T,
    /// Melting temperature at the surface, C.
    pub tm1: T,
    /// Melting temperature at the ice bottom, C.
    pub tm2: T,
    /// Ocean heat flux into the ice bottom, W/m^2.
    pub f_w: T,
    pub salinity: SalinitySpec<T>,
}

impl<T: Real> Default for SeaIceParams<T> {
    fn default() -> Self {
        Self::table()
    }
}

impl<T: Real> SeaIceParams<T> {
    /// Tabulated snow and ice constants. The latent heat is `917 * 3.34e5`
    /// J/m^3 and the ocean flux 2 W/m^2.
    pub fn table() -> Self {
        Self {
            rho_s: T::lit(330.0),
            k_s: T::lit(0.31),
            rho: T::lit(917.0),
            c0: T::lit(2110.0),
            k0: T::lit(2.034),
            gamma1: T::lit(KJ_TO_J * 18.0),
            gamma2: T::lit(0.117),
            i0_pen: T::lit(1.59),
            kappa_i: T::lit(1.5),
            sigma_sb: T::lit(5.67e-8),
            kelvin_offset: T::lit(273.0),
            q_latent: T::lit(917.0 * 3.34e5),
            tm1: T::lit(-0.1),
            tm2: T::lit(-1.8),
            f_w: T::lit(2.0),
            salinity: SalinitySpec::default(),
        }
    }

    /// Diffusivity of pure ice `D_i = k0 / (rho c0)`, m^2/s.
    pub fn diffusivity(&self) -> T {
        self.k0 / (self.rho * self.c0)
    }

    /// Diffusivity of snow `k_s / (rho_s c0)`, m^2/s.
    pub fn snow_diffusivity(&self) -> T {
        self.k_s / (self.rho_s * self.c0)
    }

    /// `beta = k0 / q`, m^2/(s C).
    pub fn beta(&self) -> T {
        self.k0 / self.q_latent
    }

    /// Penetrating radiation scaled to a temperature rate, `I0 / (rho c0)`.
    pub fn i0_bar(&self) -> T {
        self.i0_pen / (self.rho * self.c0)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_s", self.rho_s),
            ("k_s", self.k_s),
            ("rho", self.rho),
            ("c0", self.c0),
            ("k0", self.k0),
            ("kappa_i", self.kappa_i),
            ("sigma_sb", self.sigma_sb),
            ("q_latent", self.q_latent),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite")));
            }
        }
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2), ("i0_pen", self.i0_pen), ("f_w", self.f_w)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be non-negative and finite")));
            }
        }
        if !(self.tm2 < self.tm1 && self.tm1 < T::zero()) {
            return Err(Error::InvalidParams("need Tm2 < Tm1 < 0 C".into()));
        }
        self.salinity.validate()
    }
}

/// kJ to J.
pub const KJ_TO_J: f64 = 1e3;

/// Smallest `|T|` (C) at which the salinity corrections are evaluated.
pub const SALINITY_GUARD: f64 = 1e-3;

/// Effective heat capacity and conductivity of saline ice at temperature
/// `t_i` (C) and salinity `s` (ppt): `(c0 + gamma1 S / T^2, k0 + gamma2 S / T)`.
pub fn effective_coeffs<T: Real>(t_i: T, s: T, params: &SeaIceParams<T>) -> Result<(T, T)> {
    if !(s >= T::zero()) {
        return Err(Error::InvalidState(format!("negative salinity {s}")));
    }
    if s == T::zero() {
        return Ok((params.c0, params.k0));
    }
    if !(t_i.abs() >= T::lit(SALINITY_GUARD)) {
        return Err(Error::InvalidState(format!("ice temperature {t_i} C too close to 0 for the salinity correction")));
    }
    Ok((params.c0 + params.gamma1 * s / (t_i * t_i), params.k0 + params.gamma2 * s / t_i))
}

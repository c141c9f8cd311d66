use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Which electrode a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Electrode {
    Neg,
    Pos,
}

/// Per-electrode material and geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeParams<T> {
    /// Electrode thickness `L`, m.
    pub thickness: T,
    /// Saturation concentration, mol/m^3.
    pub c_max: T,
    /// Particle radius, m.
    pub radius: T,
    /// Solid diffusivity, m^2/s.
    pub diffusivity: T,
    /// Active-material volume fraction.
    pub eps: T,
    /// Film resistance, Ohm m^2.
    pub r_film: T,
    /// Contact resistance, Ohm m^2.
    pub r_contact: T,
    /// Reaction rate constant, m^2.5/(mol^0.5 s).
    pub k_rate: T,
}

impl<T: Real> ElectrodeParams<T> {
    /// Interfacial area per unit volume, `3 eps / R_p`.
    pub fn area(&self) -> T {
        T::lit(3.0) * self.eps / self.radius
    }

    fn validate(&self, name: &str) -> Result<()> {
        let positive = [
            ("thickness", self.thickness),
            ("c_max", self.c_max),
            ("radius", self.radius),
            ("diffusivity", self.diffusivity),
            ("eps", self.eps),
            ("k_rate", self.k_rate),
        ];
        for (field, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name}.{field} must be positive, got {v}")));
            }
        }
        if !(self.eps < T::one()) {
            return Err(Error::InvalidParams(format!("{name}.eps must be below 1")));
        }
        for (field, v) in [("r_film", self.r_film), ("r_contact", self.r_contact)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name}.{field} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Single-particle cell with a two-phase positive electrode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellParams<T> {
    pub neg: ElectrodeParams<T>,
    pub pos: ElectrodeParams<T>,
    /// Equilibrium concentration of the lithium-poor core phase, mol/m^3.
    pub c_alpha: T,
    /// Equilibrium concentration of the lithium-rich shell phase, mol/m^3.
    pub c_beta: T,
    /// Electrolyte concentration, mol/m^3.
    pub c_e0: T,
    pub alpha_a: T,
    pub alpha_c: T,
    /// Faraday constant, A s/mol.
    pub faraday: T,
    /// Gas constant, J/(K mol).
    pub r_gas: T,
    /// Temperature, K.
    pub temperature: T,
    /// Subtract `I (R_c- + R_c+)` from the terminal voltage.
    pub contact_resistance: bool,
}

impl<T: Real> CellParams<T> {
    /// LFP/graphite table values.
    pub fn table() -> Self {
        let c_max_pos = T::lit(20_950.0);
        Self {
            neg: ElectrodeParams {
                thickness: T::lit(50e-6),
                c_max: T::lit(27_760.0),
                radius: T::lit(11e-6),
                diffusivity: T::lit(9e-14),
                eps: T::lit(0.33),
                r_film: T::lit(1e-5),
                r_contact: T::zero(),
                k_rate: T::lit(3e-5),
            },
            pos: ElectrodeParams {
                thickness: T::lit(74e-6),
                c_max: c_max_pos,
                radius: T::lit(52e-9),
                diffusivity: T::lit(8e-18),
                eps: T::lit(0.27),
                r_film: T::zero(),
                r_contact: T::lit(6.5e-3),
                k_rate: T::lit(3e-17),
            },
            c_alpha: T::lit(0.0480) * c_max_pos,
            c_beta: T::lit(0.8920) * c_max_pos,
            c_e0: T::lit(1e3),
            alpha_a: T::lit(0.5),
            alpha_c: T::lit(0.5),
            faraday: T::lit(96_487.0),
            r_gas: T::lit(8.314472),
            temperature: T::lit(298.0),
            contact_resistance: false,
        }
    }

    pub fn electrode(&self, e: Electrode) -> &ElectrodeParams<T> {
        match e {
            Electrode::Neg => &self.neg,
            Electrode::Pos => &self.pos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.neg.validate("neg")?;
        self.pos.validate("pos")?;
        if !(T::zero() < self.c_alpha && self.c_alpha < self.c_beta && self.c_beta <= self.pos.c_max) {
            return Err(Error::InvalidParams("need 0 < c_alpha < c_beta <= pos.c_max".into()));
        }
        for (field, v) in [
            ("c_e0", self.c_e0),
            ("alpha_a", self.alpha_a),
            ("alpha_c", self.alpha_c),
            ("faraday", self.faraday),
            ("r_gas", self.r_gas),
            ("temperature", self.temperature),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{field} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `F / (R T)`, 1/V.
    pub fn f_over_rt(&self) -> T {
        self.faraday / (self.r_gas * self.temperature)
    }
}

/// Ionic molar flux at the particle surface, mol/(m^2 s):
/// `j_- = I / (a_- F L_-)` and `j_+ = -I / (a_+ F L_+)`. The surface condition
/// `D dc/dr = -j` then inserts lithium into the positive particle and removes
/// it from the negative one when `I > 0` (discharge).
pub fn molar_flux<T: Real>(current: T, electrode: Electrode, params: &CellParams<T>) -> T {
    let e = params.electrode(electrode);
    let mag = current / (e.area() * params.faraday * e.thickness);
    match electrode {
        Electrode::Neg => mag,
        Electrode::Pos => -mag,
    }
}

/// Exchange current density `F k c^ac (c_e (c_max - c))^aa`, A/m^2.
pub fn exchange_current<T: Real>(c_ss: T, electrode: Electrode, params: &CellParams<T>) -> Result<T> {
    let e = params.electrode(electrode);
    if !(c_ss > T::zero() && c_ss < e.c_max) {
        return Err(Error::Validity {
            time: f64::NAN,
            reason: format!("{electrode:?} surface concentration {c_ss} outside (0, c_max)"),
        });
    }
    Ok(params.faraday * e.k_rate * c_ss.powf(params.alpha_c) * (params.c_e0 * (e.c_max - c_ss)).powf(params.alpha_a))
}

/// Overpotential solving `j = (i0/F) (exp(aa f eta) - exp(-ac f eta))`, V.
/// Closed form through `asinh` when the transfer coefficients are equal.
pub fn butler_volmer<T: Real>(j: T, c_ss: T, electrode: Electrode, params: &CellParams<T>) -> Result<T> {
    let i0 = exchange_current(c_ss, electrode, params)?;
    let f = params.f_over_rt();
    let (aa, ac) = (params.alpha_a, params.alpha_c);
    let rhs = params.faraday * j / i0;
    if aa == ac {
        return Ok((rhs / T::lit(2.0)).asinh() / (aa * f));
    }
    // Monotone increasing in eta; Newton from the symmetric estimate.
    let g = |eta: T| ((aa * f * eta).exp() - (-ac * f * eta).exp() - rhs, aa * f * (aa * f * eta).exp() + ac * f * (-ac * f * eta).exp());
    let mut eta = (rhs / T::lit(2.0)).asinh() / (T::lit(0.5) * (aa + ac) * f);
    for _ in 0..100 {
        let (v, dv) = g(eta);
        let step = v / dv;
        eta -= step;
        if step.abs() <= T::lit(1e-14) * (T::one() + eta.abs()) {
            return Ok(eta);
        }
    }
    Err(Error::Numerics(crate::error::NumericsError::NonFinite("Butler-Volmer Newton iteration")))
}

/// State of charge as the averaged concentration over `c_max`.
pub fn soc<T: Real>(average: T, c_max: T) -> T {
    average / c_max
}

/// State of charge over a stoichiometry window `[c_min, c_max]`.
pub fn soc_window<T: Real>(average: T, c_min: T, c_max: T) -> T {
    (average - c_min) / (c_max - c_min)
}

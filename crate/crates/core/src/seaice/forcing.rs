use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Length of the model year, s.
pub const YEAR_SECONDS: f64 = 365.0 * 86_400.0;
/// Length of one forcing month, s.
pub const MONTH_SECONDS: f64 = YEAR_SECONDS / 12.0;
/// One day, s.
pub const DAY_SECONDS: f64 = 86_400.0;

const DEFAULT_TABLE: &str = include_str!("../../assets/monthly_forcing.csv");

/// Mean atmospheric fluxes of one month, W/m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthFlux<T> {
    /// Incoming shortwave radiation.
    pub fr: T,
    /// Incoming longwave radiation.
    pub fl_long: T,
    /// Sensible heat flux.
    pub fs: T,
    /// Latent heat flux.
    pub fl_latent: T,
    /// Surface albedo; `None` in the dark months.
    pub albedo: Option<T>,
}

impl<T: Real> MonthFlux<T> {
    /// `F_a = (1 - albedo) F_r + F_L + F_s + F_l`.
    pub fn total(&self) -> T {
        let absorbed = match self.albedo {
            Some(a) => (T::one() - a) * self.fr,
            None => self.fr,
        };
        absorbed + self.fl_long + self.fs + self.fl_latent
    }
}

/// Twelve months of forcing, January first, held constant within a month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyForcing<T> {
    pub months: Vec<MonthFlux<T>>,
}

#[derive(Debug, Deserialize)]
struct Row {
    month: usize,
    #[serde(rename = "Fr")]
    fr: f64,
    #[serde(rename = "FL")]
    fl_long: f64,
    #[serde(rename = "Fs")]
    fs: f64,
    #[serde(rename = "Fl")]
    fl_latent: f64,
    albedo: Option<f64>,
}

impl<T: Real> MonthlyForcing<T> {
    /// The tabulated Arctic monthly means shipped in `assets/monthly_forcing.csv`.
    pub fn table() -> Self {
        Self::from_csv(DEFAULT_TABLE.as_bytes()).expect("bundled forcing table parses")
    }

    /// Reads a table with columns `month,Fr,FL,Fs,Fl,albedo`. An empty albedo
    /// marks a dark month.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut months = Vec::with_capacity(12);
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Input(format!("forcing table: {e}")))?;
            if row.month != i + 1 {
                return Err(Error::Input(format!("forcing table: expected month {}, found {}", i + 1, row.month)));
            }
            months.push(MonthFlux {
                fr: T::lit(row.fr),
                fl_long: T::lit(row.fl_long),
                fs: T::lit(row.fs),
                fl_latent: T::lit(row.fl_latent),
                albedo: row.albedo.map(T::lit),
            });
        }
        let forcing = Self { months };
        forcing.validate()?;
        Ok(forcing)
    }

    /// The same flux in every month.
    pub fn constant(flux: MonthFlux<T>) -> Self {
        Self { months: vec![flux; 12] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.months.len() != 12 {
            return Err(Error::Input(format!("forcing needs 12 months, got {}", self.months.len())));
        }
        for (i, m) in self.months.iter().enumerate() {
            if let Some(a) = m.albedo {
                if !(a >= T::zero() && a <= T::one()) {
                    return Err(Error::Input(format!("month {}: albedo {} outside [0, 1]", i + 1, a)));
                }
            } else if m.fr != T::zero() {
                return Err(Error::Input(format!("month {}: shortwave without an albedo", i + 1)));
            }
            if !m.total().is_finite() {
                return Err(Error::Input(format!("month {}: non-finite flux", i + 1)));
            }
        }
        Ok(())
    }

    /// Forcing in effect at time `t` (s after 1 January).
    pub fn at(&self, t: T) -> &MonthFlux<T> {
        &self.months[month_index(t)]
    }
}

/// Month (0 = January) containing time `t`.
pub fn month_index<T: Real>(t: T) -> usize {
    let m = (t.as_f64().rem_euclid(YEAR_SECONDS) / MONTH_SECONDS).floor() as usize;
    m.min(11)
}

/// Start of the month following the one containing `t`.
pub fn next_month_start<T: Real>(t: T) -> T {
    let k = (t.as_f64() / MONTH_SECONDS).floor() + 1.0;
    T::lit(k * MONTH_SECONDS)
}

/// Snowfall as a depth rate per month, m of snow per month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowSchedule<T> {
    pub per_month: Vec<T>,
}

impl<T: Real> Default for SnowSchedule<T> {
    fn default() -> Self {
        Self { per_month: vec![T::zero(); 12] }
    }
}

impl<T: Real> SnowSchedule<T> {
    pub fn validate(&self) -> Result<()> {
        if self.per_month.len() != 12 || self.per_month.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Input("snowfall needs 12 non-negative monthly depths".into()));
        }
        Ok(())
    }

    /// Accumulation rate at time `t`, m/s.
    pub fn rate(&self, t: T) -> T {
        self.per_month[month_index(t)] / T::lit(MONTH_SECONDS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_january() {
        let f = MonthlyForcing::<f64>::table();
        let jan = f.at(0.0);
        assert_eq!((jan.fr, jan.fl_long, jan.fs, jan.fl_latent, jan.albedo), (0.0, 168.0, 19.0, 0.0, None));
        assert_eq!(f.months[5].albedo, Some(0.78));
        assert_eq!(month_index(YEAR_SECONDS + 0.5 * MONTH_SECONDS), 0);
        assert_eq!(month_index(11.9 * MONTH_SECONDS), 11);
    }
}

use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::Pchip;
use crate::real::Real;

const POS_TABLE: &str = include_str!("../../assets/ocp_pos.csv");
const NEG_TABLE: &str = include_str!("../../assets/ocp_neg.csv");

/// Open-circuit potential against stoichiometry, monotone cubic between
/// tabulated points.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpCurve<T> {
    spline: Pchip<T>,
}

#[derive(Debug, Deserialize)]
struct Row {
    stoichiometry: f64,
    potential: f64,
}

impl<T: Real> OcpCurve<T> {
    pub fn new(stoichiometry: Vec<T>, potential: Vec<T>) -> Result<Self> {
        if stoichiometry.iter().any(|x| !(*x >= T::zero() && *x <= T::one())) {
            return Err(Error::Input("OCP stoichiometry must lie in [0, 1]".into()));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("OCP values must be finite".into()));
        }
        Ok(Self { spline: Pchip::new(stoichiometry, potential)? })
    }

    /// Reads `stoichiometry,potential` rows.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Input(format!("OCP table: {e}")))?;
            x.push(T::lit(row.stoichiometry));
            y.push(T::lit(row.potential));
        }
        Self::new(x, y)
    }

    /// Potential at stoichiometry `x`, V. Outside the table the end slopes extend linearly.
    pub fn eval(&self, x: T) -> T {
        self.spline.eval(x)
    }
}

/// Positive and negative electrode curves.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpPair<T> {
    pub pos: OcpCurve<T>,
    pub neg: OcpCurve<T>,
}

impl<T: Real> OcpPair<T> {
    /// Synthetic curves shipped in `assets/`: a flat LFP-like plateau for the
    /// positive electrode and a smooth graphite-like decay for the negative.
    /// They are placeholders, not fitted data.
    pub fn synthetic() -> Self {
        Self {
            pos: OcpCurve::from_csv(POS_TABLE.as_bytes()).expect("bundled positive OCP parses"),
            neg: OcpCurve::from_csv(NEG_TABLE.as_bytes()).expect("bundled negative OCP parses"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_curves_decrease() {
        let ocp = OcpPair::<f64>::synthetic();
        for curve in [&ocp.pos, &ocp.neg] {
            let v: Vec<f64> = (0..=200).map(|i| curve.eval(i as f64 / 200.0)).collect();
            assert!(v.windows(2).all(|w| w[1] <= w[0]));
        }
        assert_eq!(ocp.pos.eval(0.5), 3.42);
    }

    #[test]
    fn rejects_out_of_range_stoichiometry() {
        let bad = "stoichiometry,potential\n0.0,1.0\n1.5,0.5\n";
        assert!(OcpCurve::<f64>::from_csv(bad.as_bytes()).is_err());
    }
}

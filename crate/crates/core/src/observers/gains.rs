use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::bessel_ratio_i_sq;
use crate::real::Real;

/// Observer tuning: `lambda` sets the target decay rate of the temperature
/// error (1/s); `l` is the output-injection gain of the interface ODE
/// (m/(s K)), used by the joint estimator and its baseline only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverGains<T> {
    pub lambda: T,
    pub l: T,
}

impl<T: Real> ObserverGains<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidParams("lambda must be non-negative".into()));
        }
        if !self.l.is_finite() {
            return Err(Error::InvalidParams("l must be finite".into()));
        }
        Ok(())
    }
}

/// Interior injection gain on the domain `[0, s]`:
///
/// ```text
/// p1(x, s) = lambda s (s - x) I2(z) / (s^2 - (x - s)^2),   z = sqrt((lambda/alpha)(s^2 - (x - s)^2))
///          = (lambda^2 / alpha) s (s - x) I2(z) / z^2
/// ```
///
/// which is `-alpha P_y(x, 0)` for the kernel in [`super::kernel_p`].
pub fn gain_p1<T: Real>(x: T, s: T, lambda: T, alpha: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(Error::InvalidState("domain length must be positive".into()));
    }
    if lambda < T::zero() || !(alpha > T::zero()) {
        return Err(Error::InvalidParams("need lambda >= 0 and alpha > 0".into()));
    }
    if x < T::zero() || x > s {
        return Err(Error::InvalidState(format!("x = {} outside [0, s]", x)));
    }
    let lp = lambda / alpha;
    let w = lp * (s * s - (x - s) * (x - s));
    Ok(lambda * lp * s * (s - x) * bessel_ratio_i_sq(2, w)?)
}

/// Boundary injection gain `p2(s) = -lambda s / (2 alpha)`.
pub fn gain_p2<T: Real>(s: T, lambda: T, alpha: T) -> T {
    -lambda * s / (T::lit(2.0) * alpha)
}

/// `p1` sampled on the normalised grid of `[0, s]`.
pub(crate) fn gain_p1_profile<T: Real>(nodes: usize, s: T, lambda: T, alpha: T) -> Result<Vec<T>> {
    let h = T::one() / T::from_usize_lossy(nodes - 1);
    (0..nodes)
        .map(|i| {
            let x = (T::from_usize_lossy(i) * h * s).min(s);
            gain_p1(x, s, lambda, alpha)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_interface_and_for_zero_lambda() {
        assert_eq!(gain_p1(0.2f64, 0.2, 0.3, 1e-4).unwrap(), 0.0);
        assert_eq!(gain_p1(0.05f64, 0.2, 0.0, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn boundary_value() {
        // At x = 0, z^2 = lambda s^2 / alpha ... use the small-z limit I2/z^2 -> 1/8.
        let (s, lam, a) = (1e-3f64, 1e-6, 1.0);
        let p = gain_p1(0.0, s, lam, a).unwrap();
        assert!((p - lam * lam * s * s / (8.0 * a)).abs() < 1e-12 * p);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(gain_p1(0.3f64, 0.2, 0.1, 1.0).is_err());
        assert!(gain_p1(0.1f64, 0.2, -0.1, 1.0).is_err());
    }

    #[test]
    fn p2_sign() {
        assert!(gain_p2(0.1f64, 0.05, 1e-4) < 0.0);
    }
}

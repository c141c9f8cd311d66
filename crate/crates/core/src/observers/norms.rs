use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{integrate_trapezoid_uniform, interp_uniform};
use crate::real::Real;

/// Error norms between two profiles living on different domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms<T> {
    /// `(int e^2)^{1/2}`.
    pub l2: T,
    /// `(int e_x^2)^{1/2}`.
    pub h1_semi: T,
    /// `(l2^2 + h1_semi^2)^{1/2}`.
    pub h1: T,
}

/// Resamples both profiles onto `samples` points over `[0, max(s, s_hat)]`,
/// extending each by `fill` beyond its own end, and returns the error norms.
pub fn h1_error_norm<T: Real>(
    s: T,
    theta: &[T],
    s_hat: T,
    theta_hat: &[T],
    fill: T,
    samples: usize,
) -> Result<ErrorNorms<T>> {
    let len = s.max(s_hat);
    let dx = len / T::from_usize_lossy(samples - 1);
    let sample = |x: T, end: T, v: &[T]| if x > end { fill } else { interp_uniform(v, end, x) };
    let e: Vec<T> = (0..samples)
        .map(|i| {
            let x = T::from_usize_lossy(i) * dx;
            sample(x, s, theta) - sample(x, s_hat, theta_hat)
        })
        .collect();
    let e2: Vec<T> = e.iter().map(|v| *v * *v).collect();
    let de2: Vec<T> = crate::numerics::gradient(&e, dx).into_iter().map(|v| v * v).collect();
    let l2 = integrate_trapezoid_uniform(dx, &e2)?.sqrt();
    let h1_semi = integrate_trapezoid_uniform(dx, &de2)?.sqrt();
    Ok(ErrorNorms { l2, h1_semi, h1: (l2 * l2 + h1_semi * h1_semi).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_for_identical_profiles() {
        let th = vec![3.0, 2.0, 1.5, 1.0];
        let n = h1_error_norm(0.5f64, &th, 0.5, &th, 1.0, 50).unwrap();
        assert_eq!(n.h1, 0.0);
    }
}

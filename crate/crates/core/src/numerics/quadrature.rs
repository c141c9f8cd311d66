use crate::error::NumericsError;
use crate::real::Real;

/// Composite trapezoid rule on possibly non-uniform abscissae.
pub fn integrate_trapezoid<T: Real>(x: &[T], y: &[T]) -> Result<T, NumericsError> {
    if x.len() != y.len() {
        return Err(NumericsError::LengthMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(NumericsError::TooFewSamples { needed: 2, got: x.len() });
    }
    let half = T::lit(0.5);
    Ok(x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| (xw[1] - xw[0]) * (yw[0] + yw[1]) * half)
        .sum())
}

/// Trapezoid rule with constant spacing `dx`.
pub fn integrate_trapezoid_uniform<T: Real>(dx: T, y: &[T]) -> Result<T, NumericsError> {
    if y.len() < 2 {
        return Err(NumericsError::TooFewSamples { needed: 2, got: y.len() });
    }
    let inner: T = y[1..y.len() - 1].iter().copied().sum();
    Ok(dx * (inner + T::lit(0.5) * (y[0] + y[y.len() - 1])))
}

/// Running trapezoid integral, `out[i] = int_{x0}^{x_i} y`.
pub fn cumulative_trapezoid<T: Real>(x: &[T], y: &[T]) -> Result<Vec<T>, NumericsError> {
    if x.len() != y.len() {
        return Err(NumericsError::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let mut out = Vec::with_capacity(x.len());
    let mut acc = T::zero();
    for i in 0..x.len() {
        if i > 0 {
            acc += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) * T::lit(0.5);
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_linear() {
        let x = [0.0, 0.3, 1.0, 2.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let got = integrate_trapezoid(&x, &y).unwrap();
        assert!((got - (2.5f64 * 2.5 + 2.5)).abs() < 1e-14);
    }

    #[test]
    fn uniform_matches_general() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let a = integrate_trapezoid(&x, &y).unwrap();
        let b = integrate_trapezoid_uniform(0.1, &y).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn too_short() {
        assert!(integrate_trapezoid(&[1.0f64], &[1.0]).is_err());
    }
}

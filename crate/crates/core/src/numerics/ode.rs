use crate::error::NumericsError;
use crate::real::Real;

/// Safety factor in the explicit step rule `h <= 0.4 * dxi^2 / (2 * D_max)`.
pub const CFL_SAFETY: f64 = 0.4;

/// Largest explicit step for a normalised grid spacing `dxi` and the largest
/// normalised diffusivity on the grid (units 1/s).
pub fn diffusion_step_limit<T: Real>(dxi: T, max_diffusivity: T) -> T {
    T::lit(CFL_SAFETY) * dxi * dxi / (T::lit(2.0) * max_diffusivity)
}

/// One classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<T, E, F>(mut rhs: F, t: T, y: &[T], h: T) -> Result<Vec<T>, E>
where
    T: Real,
    E: From<NumericsError>,
    F: FnMut(T, &[T]) -> Result<Vec<T>, E>,
{
    let half = T::lit(0.5);
    let n = y.len();
    let stage = |k: &[T], scale: T| -> Vec<T> { y.iter().zip(k).map(|(a, b)| *a + scale * *b).collect() };

    let k1 = checked(rhs(t, y)?, n)?;
    let k2 = checked(rhs(t + half * h, &stage(&k1, half * h))?, n)?;
    let k3 = checked(rhs(t + half * h, &stage(&k2, half * h))?, n)?;
    let k4 = checked(rhs(t + h, &stage(&k3, h))?, n)?;

    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let out: Vec<T> = (0..n)
        .map(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite("rk4_step state").into());
    }
    Ok(out)
}

fn checked<T: Real>(k: Vec<T>, n: usize) -> Result<Vec<T>, NumericsError> {
    if k.len() != n {
        return Err(NumericsError::LengthMismatch { expected: n, got: k.len() });
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite("rk4_step derivative"));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_one_step() {
        let y = rk4_step::<f64, NumericsError, _>(|_, y| Ok(vec![-y[0]]), 0.0, &[1.0], 0.1).unwrap();
        // Taylor polynomial of e^{-h} through h^4.
        let h: f64 = 0.1;
        let expect = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((y[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn non_finite_derivative_is_error() {
        let r = rk4_step::<f64, NumericsError, _>(|_, _| Ok(vec![f64::NAN]), 0.0, &[1.0], 0.1);
        assert!(matches!(r, Err(NumericsError::NonFinite(_))));
    }

    #[test]
    fn step_limit() {
        let h = diffusion_step_limit(0.1f64, 2.0);
        assert!((h - 0.4 * 0.01 / 4.0).abs() < 1e-16);
    }
}

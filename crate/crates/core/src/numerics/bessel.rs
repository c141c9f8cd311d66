//! Bessel functions of integer order 0..=3.
//!
//! `I_n` uses the ascending series up to `z = 30` and the large-argument
//! expansion beyond. `J_n` uses the ascending series for small arguments and
//! Miller's backward recurrence otherwise. The `ratio` variants return
//! `I_n(z)/z^n` and `J_n(z)/z^n`, which stay finite at `z = 0`.

use crate::error::NumericsError;
use crate::real::Real;

/// Largest order supported by the kernels and gains.
pub const MAX_ORDER: u32 = 3;
/// Switch point between the ascending series and the asymptotic expansion for `I_n`.
pub const SERIES_LIMIT: f64 = 30.0;
/// Overflow guard for `I_n` (e^600 is still representable in f64).
pub const I_ARG_LIMIT: f64 = 600.0;
const J_SERIES_LIMIT: f64 = 8.0;

fn check_order(n: u32) -> Result<(), NumericsError> {
    if n > MAX_ORDER {
        Err(NumericsError::OrderOutOfRange(n))
    } else {
        Ok(())
    }
}

fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_u32(k).unwrap())
}

/// Sum of `(z/2)^{2k} / (k! (k+n)!)`, i.e. `I_n(z) / (z/2)^n` for `sign = +1`
/// and `J_n(z) / (z/2)^n` for `sign = -1`.
fn ascending_series<T: Real>(n: u32, z: T, sign: T) -> T {
    let q = z * z / T::lit(4.0);
    let mut term = T::one() / factorial::<T>(n);
    let mut sum = term;
    let n_t = T::from_u32(n).unwrap();
    let mut k = T::zero();
    for _ in 0..500 {
        k += T::one();
        term = term * sign * q / (k * (k + n_t));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.1) {
            break;
        }
    }
    sum
}

/// `e^{-z} I_n(z)` from the large-argument expansion, for `z > 0`.
fn scaled_asymptotic_i<T: Real>(n: u32, z: T) -> T {
    let mu = T::lit(4.0 * (n * n) as f64);
    let eight_z = T::lit(8.0) * z;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200u32 {
        let odd = T::lit((2 * k - 1) as f64);
        let next = -term * (mu - odd * odd) / (T::lit(k as f64) * eight_z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.1) {
            break;
        }
    }
    sum / (T::TAU() * z).sqrt()
}

/// Modified Bessel function of the first kind `I_n(z)`, `n <= 3`, `|z| <= 600`.
pub fn bessel_i<T: Real>(n: u32, z: T) -> Result<T, NumericsError> {
    check_order(n)?;
    if !z.is_finite() {
        return Err(NumericsError::NonFinite("bessel_i argument"));
    }
    let a = z.abs();
    if a > T::lit(I_ARG_LIMIT) {
        return Err(NumericsError::ArgumentOutOfRange(z.as_f64()));
    }
    let value = if a <= T::lit(SERIES_LIMIT) {
        (a / T::lit(2.0)).powi(n as i32) * ascending_series(n, a, T::one())
    } else {
        a.exp() * scaled_asymptotic_i(n, a)
    };
    if !value.is_finite() {
        return Err(NumericsError::NonFinite("bessel_i"));
    }
    Ok(if z < T::zero() && n % 2 == 1 { -value } else { value })
}

/// `I_n(z) / z^n`, with the limit `1 / (2^n n!)` at `z = 0`. Even in `z`.
pub fn bessel_ratio_i<T: Real>(n: u32, z: T) -> Result<T, NumericsError> {
    check_order(n)?;
    if !z.is_finite() {
        return Err(NumericsError::NonFinite("bessel_ratio_i argument"));
    }
    let a = z.abs();
    if a > T::lit(I_ARG_LIMIT) {
        return Err(NumericsError::ArgumentOutOfRange(z.as_f64()));
    }
    if a <= T::lit(SERIES_LIMIT) {
        Ok(ascending_series(n, a, T::one()) / T::lit(2.0).powi(n as i32))
    } else {
        Ok(bessel_i(n, a)? / a.powi(n as i32))
    }
}

/// Bessel function of the first kind `J_n(z)`, `n <= 3`.
pub fn bessel_j<T: Real>(n: u32, z: T) -> Result<T, NumericsError> {
    check_order(n)?;
    if !z.is_finite() {
        return Err(NumericsError::NonFinite("bessel_j argument"));
    }
    let a = z.abs();
    let value = if a <= T::lit(J_SERIES_LIMIT) {
        (a / T::lit(2.0)).powi(n as i32) * ascending_series(n, a, -T::one())
    } else {
        miller_j(n, a)
    };
    Ok(if z < T::zero() && n % 2 == 1 { -value } else { value })
}

/// `J_n(z) / z^n`, with the limit `1 / (2^n n!)` at `z = 0`. Even in `z`.
pub fn bessel_ratio_j<T: Real>(n: u32, z: T) -> Result<T, NumericsError> {
    check_order(n)?;
    let a = z.abs();
    if a <= T::lit(J_SERIES_LIMIT) {
        Ok(ascending_series(n, a, -T::one()) / T::lit(2.0).powi(n as i32))
    } else {
        Ok(bessel_j(n, a)? / a.powi(n as i32))
    }
}

/// `I_n(sqrt(w)) / sqrt(w)^n` for any real `w`. For `w < 0` this continues
/// analytically to `J_n(sqrt(-w)) / sqrt(-w)^n`.
pub fn bessel_ratio_i_sq<T: Real>(n: u32, w: T) -> Result<T, NumericsError> {
    if w >= T::zero() {
        bessel_ratio_i(n, w.sqrt())
    } else {
        bessel_ratio_j(n, (-w).sqrt())
    }
}

/// Miller's backward recurrence normalised by `J_0 + 2 sum J_{2k} = 1`. `z > 0`.
fn miller_j<T: Real>(n: u32, z: T) -> T {
    let zf = z.as_f64();
    let mut m = (1.5 * zf + 40.0).ceil() as u32;
    if m % 2 == 1 {
        m += 1;
    }
    let two_over_z = T::lit(2.0) / z;
    let mut next = T::zero();
    let mut cur = T::lit(1e-30);
    let mut norm = T::zero();
    let mut wanted = T::zero();
    let big = T::lit(1e200);
    let tiny = T::lit(1e-200);
    for k in (1..=m).rev() {
        // cur = J_k, next = J_{k+1}; produce J_{k-1}.
        if k == n {
            wanted = cur;
        }
        if k % 2 == 0 {
            norm += T::lit(2.0) * cur;
        }
        let prev = T::lit(k as f64) * two_over_z * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > big {
            cur = cur * tiny;
            next = next * tiny;
            norm = norm * tiny;
            wanted = wanted * tiny;
        }
    }
    norm += cur;
    if n == 0 {
        wanted = cur;
    }
    wanted / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_values() {
        assert!((bessel_i(0, 1.0f64).unwrap() - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_i(1, 1.0f64).unwrap() - 0.565_159_103_992_485_1).abs() < 1e-14);
        assert!((bessel_j(0, 1.0f64).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-14);
    }

    #[test]
    fn ratio_limits_at_zero() {
        for (n, lim) in [(0, 1.0), (1, 0.5), (2, 0.125), (3, 1.0 / 48.0)] {
            assert_eq!(bessel_ratio_i(n, 0.0f64).unwrap(), lim);
            assert_eq!(bessel_ratio_j(n, 0.0f64).unwrap(), lim);
        }
    }

    #[test]
    fn parity() {
        assert_eq!(bessel_i(1, -2.0f64).unwrap(), -bessel_i(1, 2.0f64).unwrap());
        assert_eq!(bessel_i(2, -2.0f64).unwrap(), bessel_i(2, 2.0f64).unwrap());
        assert_eq!(bessel_j(3, -12.0f64).unwrap(), -bessel_j(3, 12.0f64).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(bessel_i(4, 1.0f64), Err(NumericsError::OrderOutOfRange(4)));
        assert!(matches!(bessel_i(0, 601.0f64), Err(NumericsError::ArgumentOutOfRange(_))));
        assert!(bessel_j(0, f64::NAN).is_err());
    }

    #[test]
    fn continuation_to_negative_square() {
        let w = -9.0f64;
        let direct = bessel_j(1, 3.0f64).unwrap() / 3.0;
        assert!((bessel_ratio_i_sq(1, w).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let v: f32 = bessel_i(0, 1.0f32).unwrap();
        assert!((v - 1.266_065_9).abs() < 1e-5);
    }
}

use crate::error::NumericsError;
use crate::real::Real;

/// Linear interpolation of samples on a uniform grid over `[0, len]`.
/// Arguments outside the interval are clamped to the end values.
pub fn interp_uniform<T: Real>(values: &[T], len: T, x: T) -> T {
    let n = values.len();
    if x <= T::zero() {
        return values[0];
    }
    if x >= len {
        return values[n - 1];
    }
    let pos = x / len * T::from_usize_lossy(n - 1);
    let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
    let w = pos - T::from_usize_lossy(i);
    values[i] * (T::one() - w) + values[i + 1] * w
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Pchip<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self, NumericsError> {
        let n = x.len();
        if y.len() != n {
            return Err(NumericsError::LengthMismatch { expected: n, got: y.len() });
        }
        if n < 2 {
            return Err(NumericsError::TooFewSamples { needed: 2, got: n });
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NumericsError::InvalidGrid("abscissae must increase strictly".into()));
        }
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > T::zero() {
                    let w1 = T::lit(2.0) * h[i] + h[i - 1];
                    let w2 = h[i] + T::lit(2.0) * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    /// Value at `t`; linear extrapolation with the end slopes outside the table.
    pub fn eval(&self, t: T) -> T {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.d[0] * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.d[n - 1] * (t - self.x[n - 1]);
        }
        let i = match self.x.iter().position(|&xi| xi > t) {
            Some(j) => j - 1,
            None => n - 2,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

fn end_slope<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    let s = ((T::lit(2.0) * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= T::zero() {
        T::zero()
    } else if d0 * d1 <= T::zero() && s.abs() > (T::lit(3.0) * d0).abs() {
        T::lit(3.0) * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_interp_midpoint() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(interp_uniform(&v, 2.0f64, 1.5), 2.5);
        assert_eq!(interp_uniform(&v, 2.0f64, 3.0), 4.0);
    }

    #[test]
    fn pchip_reproduces_nodes_and_monotone() {
        let x: Vec<f64> = vec![0.0, 0.1, 0.5, 0.9, 1.0];
        let y = vec![4.2, 3.5, 3.42, 3.3, 2.5];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-14);
        }
        let mut prev = p.eval(0.0f64);
        for k in 1..=1000 {
            let v = p.eval(k as f64 / 1000.0);
            assert!(v <= prev + 1e-14);
            prev = v;
        }
    }
}

use crate::error::NumericsError;
use crate::real::Real;

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// ```text
/// | d0 u0             | |x0|   |r0|
/// | l0 d1 u1          | |x1|   |r1|
/// |    l1 d2 u2       | |x2| = |r2|
/// |       ..  ..  ..  | |..|   |..|
/// |          l_{n-2} d_{n-1}| |x_{n-1}| |r_{n-1}|
/// ```
///
/// `lower` and `upper` have length `n - 1`. Rows must satisfy weak diagonal
/// dominance; anything else is rejected before elimination starts.
pub fn solve_tridiagonal<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &[T],
) -> Result<Vec<T>, NumericsError> {
    let n = diag.len();
    if n == 0 {
        return Err(NumericsError::TooFewSamples { needed: 1, got: 0 });
    }
    for (len, expected) in [(lower.len(), n - 1), (upper.len(), n - 1), (rhs.len(), n)] {
        if len != expected {
            return Err(NumericsError::LengthMismatch { expected, got: len });
        }
    }
    for i in 0..n {
        let off_l = if i > 0 { lower[i - 1].abs() } else { T::zero() };
        let off_u = if i + 1 < n { upper[i].abs() } else { T::zero() };
        if diag[i].abs() < off_l + off_u {
            return Err(NumericsError::NotDiagonallyDominant(i));
        }
    }

    let mut c_prime = vec![T::zero(); n];
    let mut d_prime = vec![T::zero(); n];
    let pivot_floor = T::min_positive_value();
    if diag[0].abs() <= pivot_floor {
        return Err(NumericsError::ZeroPivot(0));
    }
    if n > 1 {
        c_prime[0] = upper[0] / diag[0];
    }
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c_prime[i - 1];
        if denom.abs() <= pivot_floor {
            return Err(NumericsError::ZeroPivot(i));
        }
        if i + 1 < n {
            c_prime[i] = upper[i] / denom;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / denom;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite("solve_tridiagonal"));
    }
    Ok(x)
}

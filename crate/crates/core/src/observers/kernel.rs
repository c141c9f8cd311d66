//! Backstepping kernels on a frozen domain `[0, D]` and the associated
//! Volterra transformations.
//!
//! ```text
//! P(x, y) =  lambda' (D - x) I1(z) / z,   Q(x, y) = -lambda' (D - x) J1(z) / z
//! z = sqrt(lambda' ((D - y)^2 - (D - x)^2)),   lambda' = lambda / alpha
//! ```
//!
//! `P` solves `P_xx - P_yy = -lambda' P` with `P(x, x) = -(lambda'/2)(x - D)` and
//! `P(D, y) = 0`; `Q` solves the same problem with the sign of `lambda'` flipped.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{bessel_ratio_i, bessel_ratio_i_sq, bessel_ratio_j};
use crate::real::Real;

fn ratio_j_sq<T: Real>(w: T) -> Result<T> {
    if w >= T::zero() {
        Ok(bessel_ratio_j(1, w.sqrt())?)
    } else {
        Ok(bessel_ratio_i(1, (-w).sqrt())?)
    }
}

/// Forward kernel `P(x, y)`.
pub fn kernel_p<T: Real>(x: T, y: T, d: T, lambda: T, alpha: T) -> Result<T> {
    let lp = lambda / alpha;
    let w = lp * ((d - y) * (d - y) - (d - x) * (d - x));
    Ok(lp * (d - x) * bessel_ratio_i_sq(1, w)?)
}

/// Inverse kernel `Q(x, y)`.
pub fn kernel_q<T: Real>(x: T, y: T, d: T, lambda: T, alpha: T) -> Result<T> {
    let lp = lambda / alpha;
    let w = lp * ((d - y) * (d - y) - (d - x) * (d - x));
    Ok(-lp * (d - x) * ratio_j_sq(w)?)
}

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Forward,
    Inverse,
}

/// Kernel values on the lower triangle of an `(n+1) x (n+1)` grid over `[0, D]^2`;
/// row `i` holds `y_0..=y_i`.
pub fn kernel_solution<T: Real>(kind: KernelKind, n: usize, d: T, lambda: T, alpha: T) -> Result<Vec<Vec<T>>> {
    let h = d / T::from_usize_lossy(n);
    (0..=n)
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let (x, y) = (T::from_usize_lossy(i) * h, T::from_usize_lossy(j) * h);
                    match kind {
                        KernelKind::Forward => kernel_p(x, y, d, lambda, alpha),
                        KernelKind::Inverse => kernel_q(x, y, d, lambda, alpha),
                    }
                })
                .collect()
        })
        .collect()
}

/// Largest five-point residual of `K_xx - K_yy + sign * lambda' K` over interior
/// triangle nodes, with `sign = +1` for `P` and `-1` for `Q`.
pub fn kernel_residual<T: Real>(kind: KernelKind, n: usize, d: T, lambda: T, alpha: T) -> Result<T> {
    let k = kernel_solution(kind, n, d, lambda, alpha)?;
    let h = d / T::from_usize_lossy(n);
    let lp = lambda / alpha;
    let sign = match kind {
        KernelKind::Forward => T::one(),
        KernelKind::Inverse => -T::one(),
    };
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for i in 2..n {
        for j in 1..i - 1 {
            let kxx = (k[i + 1][j] - two * k[i][j] + k[i - 1][j]) / (h * h);
            let kyy = (k[i][j + 1] - two * k[i][j] + k[i][j - 1]) / (h * h);
            let r = (kxx - kyy + sign * lp * k[i][j]).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// `int_0^{x_i} f_j dy` for every node, fourth order (Simpson, with a 3/8 panel
/// when the interval count is odd).
fn cumulative_weights<T: Real>(i: usize, h: T) -> Vec<T> {
    let mut w = vec![T::zero(); i + 1];
    match i {
        0 => {}
        1 => {
            w[0] = h / T::lit(2.0);
            w[1] = h / T::lit(2.0);
        }
        _ => {
            let simpson_end = if i % 2 == 0 { i } else { i - 3 };
            let third = h / T::lit(3.0);
            let mut j = 0;
            while j + 2 <= simpson_end {
                w[j] += third;
                w[j + 1] += T::lit(4.0) * third;
                w[j + 2] += third;
                j += 2;
            }
            if i % 2 == 1 {
                let e = T::lit(3.0) * h / T::lit(8.0);
                let s = simpson_end;
                w[s] += e;
                w[s + 1] += T::lit(3.0) * e;
                w[s + 2] += T::lit(3.0) * e;
                w[s + 3] += e;
            }
        }
    }
    w
}

fn volterra<T: Real>(kind: KernelKind, w: &[T], d: T, lambda: T, alpha: T) -> Result<Vec<T>> {
    let n = w.len() - 1;
    let h = d / T::from_usize_lossy(n);
    let mut out = w.to_vec();
    for i in 1..=n {
        let x = T::from_usize_lossy(i) * h;
        let weights = cumulative_weights(i, h);
        let mut acc = T::zero();
        for j in 0..=i {
            let y = T::from_usize_lossy(j) * h;
            let kv = match kind {
                KernelKind::Forward => kernel_p(x, y, d, lambda, alpha)?,
                KernelKind::Inverse => kernel_q(x, y, d, lambda, alpha)?,
            };
            acc += weights[j] * kv * w[j];
        }
        out[i] += acc;
    }
    Ok(out)
}

/// `u(x) = w(x) + int_0^x P(x, y) w(y) dy` on a uniform grid over `[0, D]`.
pub fn forward_transform<T: Real>(w: &[T], d: T, lambda: T, alpha: T) -> Result<Vec<T>> {
    volterra(KernelKind::Forward, w, d, lambda, alpha)
}

/// `w(x) = u(x) + int_0^x Q(x, y) u(y) dy`, the inverse of [`forward_transform`].
pub fn inverse_transform<T: Real>(u: &[T], d: T, lambda: T, alpha: T) -> Result<Vec<T>> {
    volterra(KernelKind::Inverse, u, d, lambda, alpha)
}

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;
use crate::real::Real;

/// Uniform grid on the normalised interval `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of nodes including both ends.
    pub nodes: usize,
}

impl GridSpec {
    pub fn new(nodes: usize) -> Result<Self, NumericsError> {
        if nodes < 4 {
            return Err(NumericsError::InvalidGrid(format!("need at least 4 nodes, got {nodes}")));
        }
        Ok(Self { nodes })
    }

    pub fn spacing<T: Real>(&self) -> T {
        T::one() / T::from_usize_lossy(self.nodes - 1)
    }

    pub fn coords<T: Real>(&self) -> Vec<T> {
        let h = self.spacing::<T>();
        (0..self.nodes).map(|i| T::from_usize_lossy(i) * h).collect()
    }
}

/// Second-order one-sided derivative at the right end of a uniform sample.
#[inline]
pub fn diff_right<T: Real>(v: &[T], h: T) -> T {
    let n = v.len();
    (T::lit(3.0) * v[n - 1] - T::lit(4.0) * v[n - 2] + v[n - 3]) / (T::lit(2.0) * h)
}

/// Second-order one-sided derivative at the left end of a uniform sample.
#[inline]
pub fn diff_left<T: Real>(v: &[T], h: T) -> T {
    (-T::lit(3.0) * v[0] + T::lit(4.0) * v[1] - v[2]) / (T::lit(2.0) * h)
}

/// Derivative at every node: central inside, second-order one-sided at the ends.
pub fn gradient<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let mut out = vec![T::zero(); n];
    out[0] = diff_left(v, h);
    out[n - 1] = diff_right(v, h);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (T::lit(2.0) * h);
    }
    out
}

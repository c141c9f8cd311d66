use nalgebra::{DMatrix, DVector};
use phasefront::numerics::*;
use proptest::prelude::*;

/// `(1/pi) int_0^pi e^{z (cos t - 1)} cos(n t) dt`, i.e. `e^{-z} I_n(z)`, by the
/// periodic trapezoid rule (spectrally accurate for this integrand).
fn scaled_i_by_quadrature(n: u32, z: f64) -> f64 {
    let m = 8192;
    (0..m)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            (z * (t.cos() - 1.0)).exp() * (n as f64 * t).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// `J_n(z) = (1/pi) int_0^pi cos(n t - z sin t) dt`, periodic trapezoid rule.
fn j_by_quadrature(n: u32, z: f64) -> f64 {
    let m = 8192;
    (0..m)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            (n as f64 * t - z * t.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

#[test]
fn bessel_i_matches_integral_representation() {
    for n in 0..=3 {
        for z in [0.05f64, 0.5, 1.0, 4.0, 10.0, 20.0, 29.9, 30.1, 45.0, 80.0, 200.0, 550.0] {
            let got = bessel_i(n, z).unwrap() * (-z).exp();
            let want = scaled_i_by_quadrature(n, z);
            // The quadrature sums O(1) terms, so tiny values carry ~1e-16 absolute noise.
            let err = (got - want).abs();
            assert!(err < 1e-12 * want + 1e-15, "I_{n}({z}): err {err:e}");
        }
    }
}

#[test]
fn bessel_ratio_i_is_continuous_at_zero() {
    for n in 0..=3 {
        let limit = bessel_ratio_i(n, 0.0f64).unwrap();
        let near = bessel_ratio_i(n, 1e-6f64).unwrap();
        assert!((near - limit).abs() < 1e-12 * limit);
        let direct = bessel_i(n, 2.5f64).unwrap() / 2.5f64.powi(n as i32);
        assert!((bessel_ratio_i(n, 2.5f64).unwrap() - direct).abs() < 1e-14 * direct);
    }
}

#[test]
fn bessel_j_matches_integral_representation() {
    for n in 0..=2 {
        for z in [0.0f64, 0.3, 2.0, 7.9, 8.1, 12.0, 21.5, 33.3, 50.0] {
            let got = bessel_j(n, z).unwrap();
            let want = j_by_quadrature(n, z);
            assert!((got - want).abs() < 1e-10, "J_{n}({z}): {got} vs {want}");
        }
    }
}

#[test]
fn first_zero_of_j0() {
    assert!(bessel_j(0, 2.404_825_557_695_773f64).unwrap().abs() < 1e-12);
}

#[test]
fn bessel_guards() {
    assert!(bessel_i(0, 600.0f64).is_ok());
    assert!(bessel_i(0, 600.5f64).is_err());
    assert!(bessel_j(5, 1.0f64).is_err());
}

fn dense_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = diag[i];
        if i + 1 < n {
            a[(i, i + 1)] = upper[i];
            a[(i + 1, i)] = lower[i];
        }
    }
    a.lu().solve(&DVector::from_row_slice(rhs)).unwrap().iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thomas_matches_dense_lu(
        (lower, upper, slack, rhs) in (2usize..40).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(0.01f64..2.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        ))
    ) {
        let n = slack.len();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l = if i > 0 { lower[i - 1].abs() } else { 0.0 };
                let u = if i + 1 < n { upper[i].abs() } else { 0.0 };
                l + u + slack[i]
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let y = dense_solve(&lower, &diag, &upper, &rhs);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn trapezoid_exact_for_affine(a in -5.0f64..5.0, b in -5.0f64..5.0, pts in prop::collection::vec(0.0f64..1.0, 2..30)) {
        let mut x = pts.clone();
        x.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let (x0, x1) = (x[0], *x.last().unwrap());
        let exact = 0.5 * a * (x1 * x1 - x0 * x0) + b * (x1 - x0);
        prop_assert!((integrate_trapezoid(&x, &y).unwrap() - exact).abs() < 1e-12);
    }
}

#[test]
fn trapezoid_is_second_order() {
    let err = |n: usize| {
        let h = std::f64::consts::PI / n as f64;
        let y: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin()).collect();
        (integrate_trapezoid_uniform(h, &y).unwrap() - 2.0).abs()
    };
    let ratio = err(50) / err(100);
    assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn rk4_is_fourth_order() {
    let solve = |steps: usize| {
        let h = 1.0 / steps as f64;
        let mut y = vec![1.0, 0.0];
        let mut t = 0.0;
        for _ in 0..steps {
            y = rk4_step::<f64, phasefront::NumericsError, _>(|_, y| Ok(vec![y[1], -y[0]]), t, &y, h).unwrap();
            t += h;
        }
        (y[0] - 1.0f64.cos()).abs()
    };
    let ratio = solve(20) / solve(40);
    assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
}

use phasefront::metrics::{tail_decay_rate, time_to_fraction};
use phasefront::observers::*;

const ALPHA: f64 = 116.0 / (6570.0 * 389.5);

/// `I2(z)/z^2` from its ascending series, written out independently.
fn i2_over_z2(z: f64) -> f64 {
    let mut term = 1.0 / 8.0;
    let mut sum = term;
    for k in 1..60 {
        let k = k as f64;
        term *= (z * z / 4.0) / (k * (k + 2.0));
        sum += term;
    }
    sum
}

#[test]
fn p1_matches_series_transcription() {
    let (s, lam) = (0.12, 0.05);
    for x in [0.0, 0.03, 0.06, 0.11] {
        let z2 = lam / ALPHA * (s * s - (x - s) * (x - s));
        let want = lam * lam / ALPHA * s * (s - x) * i2_over_z2(z2.sqrt());
        let got = gain_p1(x, s, lam, ALPHA).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "x = {x}: {got} vs {want}");
    }
}

#[test]
fn gains_match_kernel_derivatives() {
    let (d, lam) = (0.1, 0.05);
    let dy = 1e-6 * d;
    for x in [0.0, 0.02, 0.05, 0.09] {
        // p1 = -alpha P_y(x, 0), central difference across y = 0.
        let py = (kernel_p(x, dy, d, lam, ALPHA).unwrap() - kernel_p(x, -dy, d, lam, ALPHA).unwrap()) / (2.0 * dy);
        let p1 = gain_p1(x, d, lam, ALPHA).unwrap();
        assert!((p1 + ALPHA * py).abs() <= 1e-6 * p1.abs(), "x = {x}");
    }
    let p2 = gain_p2(d, lam, ALPHA);
    assert!((p2 + kernel_p(0.0, 0.0, d, lam, ALPHA).unwrap()).abs() <= 1e-14 * p2.abs());
}

#[test]
fn kernel_residual_is_second_order() {
    let (d, lam) = (0.1, 0.05);
    for kind in [KernelKind::Forward, KernelKind::Inverse] {
        let r: Vec<f64> = [32, 64, 128].iter().map(|&n| kernel_residual(kind, n, d, lam, ALPHA).unwrap()).collect();
        assert!(r[0] / r[1] >= 3.0 && r[1] / r[2] >= 3.0, "{kind:?}: {r:?}");
    }
}

#[test]
fn transformations_are_mutual_inverses() {
    let (d, lam) = (0.1, 0.05);
    let n = 400;
    let w: Vec<f64> = (0..=n).map(|i| {
        let x = i as f64 / n as f64;
        (3.0 * x).sin() + 0.5 * x * x - 1.0
    }).collect();
    let u = forward_transform(&w, d, lam, ALPHA).unwrap();
    let back = inverse_transform(&u, d, lam, ALPHA).unwrap();
    let scale = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let err = w.iter().zip(&back).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    assert!(err <= 1e-6 * scale, "round-trip error {err:e}");
    // The transformation is not the identity for this lambda.
    let moved = w.iter().zip(&u).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    assert!(moved > 1e-2 * scale);
}

#[test]
fn h1_norm_of_a_sine() {
    let s = 0.3;
    let n = 801;
    let zero = vec![0.0; n];
    let sine: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin()).collect();
    let norms = h1_error_norm(s, &sine, s, &zero, 0.0, 2001).unwrap();
    let want = std::f64::consts::PI / s * (s / 2.0).sqrt();
    assert!((norms.h1_semi - want).abs() <= 0.01 * want);
    assert!((norms.l2 - (s / 2.0).sqrt()).abs() <= 0.01 * (s / 2.0).sqrt());
}

#[test]
fn exact_initial_estimate_stays_exact() {
    let mut sc = presets::full_observer::<f64>(0.05);
    sc.estimate_init = sc.plant_init.clone();
    sc.horizon = 20.0;
    let traj = run_observer(&sc).unwrap();
    assert!(traj.samples.iter().all(|s| s.norms.h1 == 0.0));
}

#[test]
fn full_observer_beats_open_loop_copy() {
    let run = |lam: f64| {
        let traj = run_observer(&presets::full_observer::<f64>(lam)).unwrap();
        (traj.times(), traj.h1_errors())
    };
    let (t, e) = run(presets::REFERENCE_LAMBDA);
    let (t0, e0) = run(0.0);
    let fast = time_to_fraction(&t, &e, 0.1).unwrap();
    let slow = time_to_fraction(&t0, &e0, 0.1).unwrap();
    assert!(fast < slow);
    assert!(tail_decay_rate(&t, &e).unwrap() >= 0.5 * presets::REFERENCE_LAMBDA);
}

#[test]
fn full_observer_with_zero_gain_on_f32() {
    let mut sc = presets::full_observer::<f32>(0.0);
    sc.horizon = 5.0;
    let traj = run_observer(&sc).unwrap();
    assert!(traj.samples.last().unwrap().norms.h1 < traj.samples[0].norms.h1);
}

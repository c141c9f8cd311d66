use phasefront::battery::*;
use phasefront::metrics::settling_time;
use phasefront::numerics::bessel_ratio_i_sq;
use proptest::prelude::*;

fn table() -> CellParams<f64> {
    CellParams::table()
}

fn reference_obs() -> BatteryObserverParams<f64> {
    presets::reference_observer()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn molar_flux_is_zero_linear_and_signed() {
    let p = table();
    for e in [Electrode::Neg, Electrode::Pos] {
        assert_eq!(molar_flux(0.0, e, &p), 0.0);
        assert!(rel(molar_flux(30.0, e, &p), 2.0 * molar_flux(15.0, e, &p)) < 1e-15);
    }
    let i = 15.0;
    let pos = &p.pos;
    assert!(rel(molar_flux(i, Electrode::Pos, &p), -i / (pos.area() * p.faraday * pos.thickness)) < 1e-15);
    assert!(molar_flux(i, Electrode::Neg, &p) > 0.0);
}

#[test]
fn discharge_flux_inserts_lithium_into_the_positive_particle() {
    let p = table();
    let i = presets::reference_current::<f64>();
    let shell = ShellState::uniform(0.6 * p.pos.radius, p.c_beta, 30);
    let (dc, _) = shell_rhs(&shell, molar_flux(i, Electrode::Pos, &p), &p).unwrap();
    assert!(*dc.last().unwrap() > 0.0);
    let neg = NegParticleState::uniform(0.8 * p.neg.c_max, 30);
    let dn = neg_rhs(&neg, molar_flux(i, Electrode::Neg, &p), &p);
    assert!(*dn.last().unwrap() < 0.0);
}

#[test]
fn shell_at_equilibrium_is_stationary() {
    let p = table();
    let shell = ShellState::uniform(0.5 * p.pos.radius, p.c_beta, 40);
    let (dc, r_dot) = shell_rhs(&shell, 0.0, &p).unwrap();
    assert!(dc.iter().all(|v| *v == 0.0));
    assert_eq!(r_dot, 0.0);
}

/// `c = c_beta + b l + a l^2` with `l = r - r_p`; on the moving grid the
/// nodal rate is `D (c'' + 2 c'/r) + (1 - eta) r_dot c'`.
fn manufactured_shell_error(n: usize) -> f64 {
    let p = table();
    let big_r = p.pos.radius;
    let r_p = 0.5 * big_r;
    let s = big_r - r_p;
    let (b, a) = (1500.0 / s, -500.0 / (s * s));
    let d = p.pos.diffusivity;
    let c = |r: f64| p.c_beta + b * (r - r_p) + a * (r - r_p).powi(2);
    let dc = |r: f64| b + 2.0 * a * (r - r_p);
    let nodes: Vec<f64> = (0..n).map(|i| r_p + s * i as f64 / (n - 1) as f64).collect();
    let shell = ShellState { r_p, c: nodes.iter().map(|r| c(*r)).collect() };
    let j = -d * dc(big_r);
    let (rates, r_dot) = shell_rhs(&shell, j, &p).unwrap();
    let scale = d * 2.0 * a.abs();
    (1..n - 1)
        .map(|i| {
            let r = nodes[i];
            let eta = i as f64 / (n - 1) as f64;
            let want = d * (2.0 * a + 2.0 * dc(r) / r) + (1.0 - eta) * r_dot * dc(r);
            (rates[i] - want).abs() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn shell_diffusion_is_second_order_on_a_manufactured_profile() {
    let e: Vec<f64> = [21, 41, 81].iter().map(|n| manufactured_shell_error(*n)).collect();
    assert!(e[0] / e[1] >= 3.0 && e[1] / e[2] >= 3.0, "errors {e:?}");
}

#[test]
fn negative_particle_uniform_state_is_stationary() {
    let p = table();
    let neg = NegParticleState::uniform(0.5 * p.neg.c_max, 30);
    assert!(neg_rhs(&neg, 0.0, &p).iter().all(|v| *v == 0.0));
}

#[test]
fn negative_average_rate_matches_the_surface_flux() {
    let p = table();
    let j = molar_flux(15.0, Electrode::Neg, &p);
    let n = 25;
    let big_r = p.neg.radius;
    let c: Vec<f64> = (0..n).map(|i| 20_000.0 - 3000.0 * (i as f64 / (n - 1) as f64).powi(3)).collect();
    let state = NegParticleState { c };
    let rates = neg_rhs(&state, j, &p);
    // The volume average is linear in the nodal values.
    let avg_rate = neg_average(&NegParticleState { c: rates }, &p);
    assert!(rel(avg_rate, -3.0 * j / big_r) < 1e-12);
}

#[test]
fn negative_stencil_is_exact_on_quadratics() {
    let p = table();
    let n = 20;
    let big_r = p.neg.radius;
    let d = p.neg.diffusivity;
    let a = 1e13;
    let c: Vec<f64> = (0..n).map(|i| 10_000.0 + a * (big_r * i as f64 / (n - 1) as f64).powi(2)).collect();
    // D dc/dr(R) = -j sets the surface cell to the same curvature.
    let j = -d * 2.0 * a * big_r;
    let rates = neg_rhs(&NegParticleState { c }, j, &p);
    for (i, r) in rates.iter().enumerate() {
        assert!(rel(*r, 6.0 * d * a) < 1e-9, "node {i}: {r}");
    }
}

#[test]
fn butler_volmer_zero_sign_and_exchange_current() {
    let p = table();
    let c = 0.5 * p.pos.c_max;
    assert_eq!(butler_volmer(0.0, c, Electrode::Pos, &p).unwrap(), 0.0);
    assert!(butler_volmer(1e-6, c, Electrode::Pos, &p).unwrap() > 0.0);
    assert!(butler_volmer(-1e-6, c, Electrode::Pos, &p).unwrap() < 0.0);
    let i0 = 96_487.0 * 3e-17 * 10_475.0f64.sqrt() * (1e3 * 10_475.0f64).sqrt();
    assert!(rel(exchange_current(c, Electrode::Pos, &p).unwrap(), i0) < 1e-12);
    let eta = butler_volmer(1e-6, c, Electrode::Pos, &p).unwrap();
    let rt_f = 8.314472 * 298.0 / 96_487.0;
    assert!(rel(eta, 2.0 * rt_f * (96_487.0 * 1e-6 / (2.0 * i0)).asinh()) < 1e-12);
    assert!(exchange_current(p.pos.c_max, Electrode::Pos, &p).is_err());
    assert!(butler_volmer(1e-6, 0.0, Electrode::Neg, &p).is_err());
}

#[test]
fn open_circuit_voltage_and_monotone_current_dependence() {
    let p = table();
    let ocp = OcpPair::<f64>::synthetic();
    let shell = ShellState::uniform(0.6 * p.pos.radius, p.c_beta, 20);
    let neg = NegParticleState::uniform(0.8 * p.neg.c_max, 20);
    let v0 = terminal_voltage(&neg, &shell, 0.0, &ocp, &p).unwrap();
    let want = ocp.pos.eval(p.c_beta / p.pos.c_max) - ocp.neg.eval(0.8);
    assert!((v0 - want).abs() < 1e-12);
    let vs: Vec<f64> = [0.0, 1.0, 3.0, 15.0, 30.0].iter().map(|i| terminal_voltage(&neg, &shell, *i, &ocp, &p).unwrap()).collect();
    assert!(vs.windows(2).all(|w| w[1] < w[0]), "{vs:?}");
    let mut pc = p.clone();
    pc.contact_resistance = true;
    let vc = terminal_voltage(&neg, &shell, 15.0, &ocp, &pc).unwrap();
    assert!((vs[3] - vc - 15.0 * 6.5e-3).abs() < 1e-12);
}

#[test]
fn lithium_total_endpoints() {
    let p = table();
    let neg = NegParticleState::uniform(0.0, 10);
    let pos = &p.pos;
    let all_core = ShellState::uniform(pos.radius, p.c_beta, 10);
    assert!(rel(total_lithium(&neg, &all_core, &p), pos.eps * pos.thickness * p.c_alpha) < 1e-12);
    let all_shell = ShellState::uniform(0.0, p.c_beta, 10);
    assert!(rel(total_lithium(&neg, &all_shell, &p), pos.eps * pos.thickness * p.c_beta) < 1e-12);
    assert_eq!(soc(0.0, p.pos.c_max), 0.0);
    assert_eq!(soc(p.pos.c_max, p.pos.c_max), 1.0);
    assert!(rel(soc_window(0.5, 0.2, 0.8), 0.5) < 1e-15);
}

#[test]
fn five_c_discharge_shrinks_the_core_and_conserves_lithium() {
    let p = table();
    let opts = BatteryOptions::default();
    let init = presets::truth_initial(&p, &opts);
    let tr = simulate_discharge(&p, &OcpPair::synthetic(), presets::reference_current(), &init, 120.0, &opts).unwrap();
    assert!(tr.halt.is_none());
    assert!(tr.max_r_p_dot < 0.0);
    let n0 = tr.samples[0].lithium;
    assert!(tr.samples.iter().all(|s| rel(s.lithium, n0) < 1e-10));
    let v: Vec<f64> = tr.samples.iter().map(|s| s.voltage).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]), "voltage not monotone");
    assert!(v.last().unwrap() < &v[0]);
    assert!(tr.samples.windows(2).all(|w| w[1].r_p < w[0].r_p));
}

#[test]
fn zero_current_freezes_an_equilibrium_cell() {
    let p = table();
    let opts = BatteryOptions { shell_nodes: 12, neg_nodes: 12, ..BatteryOptions::default() };
    let init = CellState {
        time: 0.0,
        neg: NegParticleState::uniform(0.7 * p.neg.c_max, 12),
        shell: ShellState::uniform(0.6 * p.pos.radius, p.c_beta, 12),
    };
    let tr = simulate_discharge(&p, &OcpPair::synthetic(), 0.0, &init, 20.0, &opts).unwrap();
    let last = tr.samples.last().unwrap();
    assert_eq!(last.r_p, init.shell.r_p);
    assert_eq!(last.c_ss_neg, init.neg.surface());
    assert_eq!(last.voltage, tr.samples[0].voltage);
}

#[test]
fn reference_initial_states_of_charge() {
    let sc = presets::estimation::<f64>(None, 1.0).unwrap();
    let tr = run_estimation(&EstimationScenario { horizon: 0.0, ..sc }).unwrap();
    let s = &tr.samples[0];
    assert!((s.soc_true - 0.66).abs() < 0.02, "{}", s.soc_true);
    assert!((s.soc_est - 0.46).abs() < 0.02, "{}", s.soc_est);
    assert!(rel(s.lithium_est, s.lithium) < 1e-12);
}

#[test]
fn gain_endpoints() {
    let p = table();
    let lam = 0.3;
    let r_hat = 0.6 * p.pos.radius;
    assert_eq!(gain_p(r_hat, r_hat, lam, &p).unwrap(), 0.0);
    assert_eq!(gain_q(p.pos.radius, lam, &p), p.pos.diffusivity / p.pos.radius);
    assert!(gain_p(0.5 * p.pos.radius, r_hat, lam, &p).is_err());
}

/// `I2(z)/z^2 = (1/4) sum (z^2/4)^k / (k! (k+2)!)`.
fn i2_over_z2_series(z2: f64) -> f64 {
    let mut term = 1.0 / 2.0;
    let mut sum = term;
    for k in 1..80 {
        term *= z2 / 4.0 / (k as f64 * (k + 2) as f64);
        sum += term;
    }
    sum / 4.0
}

#[test]
fn mid_shell_gain_matches_series() {
    let p = table();
    let lam = presets::REFERENCE_LAMBDA;
    let big_r = p.pos.radius;
    let d = p.pos.diffusivity;
    let lb = lam / d;
    let r_hat = 0.5 * big_r;
    let s = big_r - r_hat;
    let r = r_hat + 0.5 * s;
    let l = r - r_hat;
    let want = d * lb * lb * (big_r / r) * l * s * i2_over_z2_series(lb * (s * s - l * l));
    assert!(rel(gain_p(r, r_hat, lam, &p).unwrap(), want) < 1e-12);
}

/// Observer kernel `p(x, y) = -lb x I1(z)/z`, `z^2 = lb (y^2 - x^2)`, in
/// the distance from the interface.
fn kernel(x: f64, y: f64, lb: f64) -> f64 {
    -lb * x * bessel_ratio_i_sq(1, lb * (y * y - x * x)).unwrap()
}

#[test]
fn gains_satisfy_the_kernel_conditions() {
    let p = table();
    let lam = presets::REFERENCE_LAMBDA;
    let big_r = p.pos.radius;
    let d = p.pos.diffusivity;
    let lb = lam / d;
    let r_hat = 0.45 * big_r;
    let s = big_r - r_hat;
    let h = 1e-3 * s;
    // p_yy - p_xx = lb p inside the triangle, p(0, y) = 0, p(x, x) = -lb x / 2.
    for (fx, fy) in [(0.2, 0.5), (0.4, 0.9), (0.7, 0.8), (0.3, 0.95)] {
        let (x, y) = (fx * s, fy * s);
        let pxx = (kernel(x + h, y, lb) - 2.0 * kernel(x, y, lb) + kernel(x - h, y, lb)) / (h * h);
        let pyy = (kernel(x, y + h, lb) - 2.0 * kernel(x, y, lb) + kernel(x, y - h, lb)) / (h * h);
        let res = (pyy - pxx - lb * kernel(x, y, lb)).abs() / (lb * kernel(x, y, lb).abs());
        assert!(res < 1e-4, "residual {res} at ({fx}, {fy})");
    }
    assert_eq!(kernel(0.0, 0.7 * s, lb), 0.0);
    assert!(rel(kernel(0.6 * s, 0.6 * s, lb), -lb * 0.6 * s / 2.0) < 1e-14);
    // In u = r c the interior gain is r P / R = -D p_y(l, s).
    for f in [0.1, 0.4, 0.75, 0.95] {
        let l = f * s;
        let r = r_hat + l;
        let py = (kernel(l, s + h, lb) - kernel(l, s - h, lb)) / (2.0 * h);
        let got = r / big_r * gain_p(r, r_hat, lam, &p).unwrap();
        assert!(rel(got, -d * py) < 1e-5, "at {f}: {got} vs {}", -d * py);
    }
    // The flux condition u_r(R) = (1/R - Q/D) u(R) gives Q = D/R - D p(s, s).
    assert!(rel(gain_q(r_hat, lam, &p), d / big_r - d * kernel(s, s, lb)) < 1e-12);
}

#[test]
fn observer_reduces_to_the_plant_without_error() {
    let p = table();
    let obs = reference_obs();
    let j = molar_flux(15.0, Electrode::Pos, &p);
    let shell = ShellState::quasi_steady(0.6 * p.pos.radius, j, &p, 30);
    let (dc, r_dot) = shell_rhs(&shell, j, &p).unwrap();
    let (dh, rh) = observer_rhs_pos(&shell, shell.surface(), j, &obs, &p, InterfaceMode::Estimated).unwrap();
    assert_eq!(r_dot, rh);
    for (a, b) in dc.iter().zip(&dh).skip(1) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-6));
    }
}

#[test]
fn surface_error_above_estimate_grows_the_estimated_shell() {
    let p = table();
    let obs = reference_obs();
    let j = molar_flux(15.0, Electrode::Pos, &p);
    let shell = ShellState::quasi_steady(0.6 * p.pos.radius, j, &p, 30);
    let (_, base) = observer_rhs_pos(&shell, shell.surface(), j, &obs, &p, InterfaceMode::Estimated).unwrap();
    let (_, pushed) = observer_rhs_pos(&shell, shell.surface() + 100.0, j, &obs, &p, InterfaceMode::Estimated).unwrap();
    assert!(pushed < base);
}

#[test]
fn negative_gains_are_negative() {
    let p = table();
    let obs = reference_obs();
    let (pp, q) = observer_gains_pos(0.6 * p.pos.radius, 30, &obs, &p).unwrap();
    assert!(pp.iter().skip(1).all(|v| *v > 0.0) && q > 0.0);
    let (p_neg, q_neg) = observer_gains_neg(0.6 * p.pos.radius, &pp, q, &obs, &p);
    assert!(p_neg < 0.0 && q_neg < 0.0);
}

fn shell_from(seed: &[f64], r_p: f64, p: &CellParams<f64>) -> ShellState<f64> {
    let mut c = vec![p.c_beta];
    c.extend(seed.iter().map(|v| p.c_beta + v));
    ShellState { r_p, c }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plant_minus_observer_is_the_error_system(
        truth in prop::collection::vec(0.0f64..1500.0, 15),
        est in prop::collection::vec(0.0f64..1500.0, 15),
        frac in 0.3f64..0.8,
        current in 0.0f64..30.0,
    ) {
        let p = table();
        let obs = reference_obs();
        let r_p = frac * p.pos.radius;
        let j = molar_flux(current, Electrode::Pos, &p);
        let x = shell_from(&truth, r_p, &p);
        let xh = shell_from(&est, r_p, &p);
        let (dc, r_dot) = shell_rhs(&x, j, &p).unwrap();
        let (dh, _) = observer_rhs_pos(&xh, x.surface(), j, &obs, &p, InterfaceMode::Pinned(r_dot)).unwrap();
        // Error dynamics: plant transport on c - c_hat, flux -Q e(R), injection -P e(R).
        let e = ShellState { r_p, c: x.c.iter().zip(&xh.c).map(|(a, b)| a - b).collect() };
        let (de, _) = observer_rhs_pos(&e, 0.0, 0.0, &obs, &p, InterfaceMode::Pinned(r_dot)).unwrap();
        let scale = dc.iter().chain(&dh).fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 1..dc.len() {
            prop_assert!((dc[i] - dh[i] - de[i]).abs() <= 1e-10 * scale, "node {}", i);
        }
    }

    #[test]
    fn estimated_lithium_is_stationary(
        est in prop::collection::vec(0.0f64..1500.0, 15),
        frac in 0.3f64..0.8,
        err in -800.0f64..800.0,
        neg_fill in 0.2f64..0.9,
    ) {
        let p = table();
        let obs = reference_obs();
        let current = 15.0;
        let (jp, jn) = (molar_flux(current, Electrode::Pos, &p), molar_flux(current, Electrode::Neg, &p));
        let shell = shell_from(&est, frac * p.pos.radius, &p);
        let neg = NegParticleState { c: (0..15).map(|i| neg_fill * p.neg.c_max * (1.0 - 0.01 * i as f64)).collect() };
        let meas = shell.surface() + err;
        let (dc, r_dot) = observer_rhs_pos(&shell, meas, jp, &obs, &p, InterfaceMode::Estimated).unwrap();
        let (pp, q) = observer_gains_pos(shell.r_p, shell.c.len(), &obs, &p).unwrap();
        let gains = observer_gains_neg(shell.r_p, &pp, q, &obs, &p);
        let dn = observer_rhs_neg(&neg, err, jn, gains, &p);
        let dt = 1e-6;
        let total = |sign: f64| {
            let sh = ShellState {
                r_p: shell.r_p + sign * dt * r_dot,
                c: shell.c.iter().zip(&dc).enumerate().map(|(i, (c, d))| if i == 0 { *c } else { c + sign * dt * d }).collect(),
            };
            let ng = NegParticleState { c: neg.c.iter().zip(&dn).map(|(c, d)| c + sign * dt * d).collect() };
            total_lithium(&ng, &sh, &p)
        };
        let n0 = total_lithium(&neg, &shell, &p);
        let rate = (total(1.0) - total(-1.0)) / (2.0 * dt);
        prop_assert!(rate.abs() / n0 <= 1e-6, "relative rate {}", rate / n0);
    }
}

#[test]
fn estimation_conserves_both_totals() {
    let sc = presets::estimation::<f64>(None, 60.0).unwrap();
    let tr = run_estimation(&sc).unwrap();
    assert!(tr.halt.is_none());
    let s0 = &tr.samples[0];
    for s in &tr.samples {
        assert!(rel(s.lithium, s0.lithium) < 1e-9);
        assert!(rel(s.lithium_est, s0.lithium_est) < 1e-9);
    }
}

#[test]
fn pinned_interface_error_decays() {
    let sc = presets::pinned_interface::<f64>(20.0).unwrap();
    let tr = run_estimation(&sc).unwrap();
    let e = tr.error_norms();
    assert!(e[0] > 0.0);
    assert!(e.last().unwrap() < &(1e-3 * e[0]));
    assert!(tr.samples.iter().all(|s| s.r_p == s.r_p_est));
}

#[test]
fn noise_is_reproducible_from_the_seed() {
    let sc = presets::estimation::<f64>(Some(presets::reference_noise()), 5.0).unwrap();
    let a = run_estimation(&sc).unwrap();
    let b = run_estimation(&sc).unwrap();
    assert_eq!(a, b);
    let mut other = sc.clone();
    other.noise = Some(NoiseSpec { seed: presets::REFERENCE_SEED + 1, ..presets::reference_noise() });
    let c = run_estimation(&other).unwrap();
    assert_ne!(a.samples[2].c_ss_meas, c.samples[2].c_ss_meas);
    // The truth shares step sizes with the observer, so it moves only by round-off.
    assert!(rel(a.samples[2].c_ss, c.samples[2].c_ss) < 1e-12);
}

#[test]
fn ekf_on_the_exact_model_tracks_without_noise() {
    let opts = BatteryOptions { shell_nodes: 8, neg_nodes: 8, ..BatteryOptions::default() };
    let p = table();
    let truth = presets::truth_initial(&p, &opts);
    let mut obs = reference_obs();
    obs.ekf.nodes = 8;
    let sc = EstimationScenario {
        params: p,
        ocp: OcpPair::synthetic(),
        current: presets::reference_current(),
        estimate: truth.clone(),
        truth,
        obs,
        noise: None,
        measurement_interval: 1.0,
        horizon: 30.0,
        options: opts,
        pin_interface: false,
    };
    let tr = run_ekf(&sc).unwrap();
    let big_r = sc.params.pos.radius;
    for s in &tr.samples {
        assert!((s.soc_true - s.soc_est).abs() < 1e-8, "t {}: {} vs {}", s.time, s.soc_true, s.soc_est);
        assert!((s.r_p - s.r_p_est).abs() < 1e-8 * big_r);
    }
    assert!(tr.samples.iter().all(|s| s.lithium_est.is_nan()));
}

#[test]
fn ekf_converges_from_the_reference_error() {
    let sc = presets::estimation::<f64>(None, 120.0).unwrap();
    let tr = run_ekf(&sc).unwrap();
    let t = tr.times();
    assert!(settling_time(&t, &tr.soc_errors(), 1.0).is_some());
}

#[test]
fn invalid_observer_parameters_are_rejected() {
    let mut sc = presets::estimation::<f64>(None, 1.0).unwrap();
    sc.obs.kappa = 0.0;
    assert!(run_estimation(&sc).is_err());
    let mut sc = presets::estimation::<f64>(None, 1.0).unwrap();
    sc.obs.ekf.measurement_std = -1.0;
    assert!(run_ekf(&sc).is_err());
}

use phasefront::numerics::GridSpec;
use phasefront::stefan::*;
use proptest::prelude::*;

fn unit_params() -> StefanParams<f64> {
    StefanParams { conductivity: 1.0, density: 1.0, heat_capacity: 1.0, latent_heat: 1.0, melt_temp: 0.0, domain_len: 1.0 }
}

fn opts(nodes: usize) -> SimOptions {
    SimOptions { nodes, stride: 50, ..SimOptions::default() }
}

#[test]
fn zero_flux_at_melting_is_steady() {
    let p = StefanParams::<f64>::zinc();
    let g = GridSpec::new(21).unwrap();
    let init = StefanState::from_fn(&p, g, 0.2, |_| p.melt_temp);
    let traj = simulate(&p, &init, &HeatInput::constant(0.0), 50.0, &opts(21)).unwrap();
    let last = traj.samples.last().unwrap();
    assert_eq!(last.state.s, 0.2);
    assert!(last.state.theta.iter().all(|v| *v == p.melt_temp));
}

#[test]
fn energy_identity_holds_and_converges() {
    let p = StefanParams::<f64>::zinc();
    let q = HeatInput::constant(1e5);
    let residual = |n: usize| {
        let g = GridSpec::new(n).unwrap();
        let init = StefanState::from_fn(&p, g, 0.1, |x| {
            p.melt_temp + 1e5 / p.conductivity * (0.1 - x) + 30.0 * (1.0 - (x / 0.1).powi(2))
        });
        let traj = simulate(&p, &init, &q, 100.0, &opts(n)).unwrap();
        let e0 = traj.samples[0].energy;
        energy_balance(&p, &traj, &q).iter().fold(0.0f64, |a, r| a.max(r.abs())) / e0
    };
    let (r1, r2) = (residual(41), residual(81));
    assert!(r2 < 1e-4, "relative residual {r2:e}");
    assert!(r1 / r2 > 3.0, "refinement ratio {}", r1 / r2);
}

#[test]
fn interface_converges_at_second_order() {
    let p = StefanParams::<f64>::zinc();
    let q = HeatInput::Schedule { start: vec![0.0, 40.0], flux: vec![1e5, 5e4] };
    let s_at = |n: usize| {
        let g = GridSpec::new(n).unwrap();
        let init = StefanState::linear(&p, g, 0.1, 1e5);
        simulate(&p, &init, &q, 80.0, &opts(n)).unwrap().samples.last().unwrap().state.s
    };
    let (a, b, c) = (s_at(21), s_at(41), s_at(81));
    let order = ((a - b) / (b - c)).log2();
    assert!((1.5..=2.5).contains(&order), "observed order {order}");
}

#[test]
fn samples_end_exactly_at_horizon() {
    let p = StefanParams::<f64>::zinc();
    let g = GridSpec::new(11).unwrap();
    let init = StefanState::linear(&p, g, 0.1, 1e5);
    let traj = simulate(&p, &init, &HeatInput::constant(1e5), 7.3, &opts(11)).unwrap();
    assert_eq!(traj.samples.last().unwrap().state.time, 7.3);
    assert!(traj.halt.is_none());
}

#[test]
fn reaching_the_far_end_halts() {
    let p = unit_params();
    let g = GridSpec::new(11).unwrap();
    let init = StefanState::linear(&p, g, 0.9, 5.0);
    let traj = simulate(&p, &init, &HeatInput::constant(5.0), 10.0, &opts(11)).unwrap();
    let halt = traj.halt.expect("run should stop at the end of the bar");
    assert!(halt.time < 10.0);
    assert!(traj.samples.last().unwrap().state.s >= 1.0);
}

#[test]
fn cooling_flags_invalid_samples_without_strict_mode() {
    // Heat extraction pushes the boundary temperature below the melting point.
    let p = unit_params();
    let g = GridSpec::new(11).unwrap();
    let init = StefanState::from_fn(&p, g, 0.5, |x| 0.2 * (0.5 - x));
    let lax = simulate(&p, &init, &HeatInput::constant(-2.0), 0.2, &opts(11)).unwrap();
    assert!(lax.halt.is_none());
    assert!(lax.samples.iter().any(|s| !s.valid));
    let strict = SimOptions { strict_validity: true, ..opts(11) };
    let halted = simulate(&p, &init, &HeatInput::constant(-2.0), 0.2, &strict).unwrap();
    assert!(halted.halt.is_some());
}

#[test]
fn generic_f32_run() {
    let p = StefanParams::<f32>::zinc();
    let g = GridSpec::new(11).unwrap();
    let init = StefanState::linear(&p, g, 0.1f32, 1e5);
    let opts = SimOptions { nodes: 11, stride: 10, ..SimOptions::default() };
    let traj = simulate(&p, &init, &HeatInput::constant(1e5f32), 5.0, &opts).unwrap();
    assert!(traj.samples.last().unwrap().state.s > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// With non-negative heating and a superheated start, the melt never
    /// refreezes and never drops below the melting point.
    #[test]
    fn heating_keeps_melt_valid_and_growing(
        q in 0.0f64..3.0,
        a in 0.0f64..2.0,
        b in 0.0f64..2.0,
        s0 in 0.1f64..0.5,
    ) {
        let p = unit_params();
        let g = GridSpec::new(21).unwrap();
        // Non-negative superheat vanishing at the interface.
        let init = StefanState::from_fn(&p, g, s0, |x| {
            let r = 1.0 - x / s0;
            a * r + b * (std::f64::consts::PI * r / 2.0).sin().powi(2)
        });
        let traj = simulate(&p, &init, &HeatInput::constant(q), 0.05, &SimOptions { nodes: 21, stride: 5, ..SimOptions::default() }).unwrap();
        for s in &traj.samples {
            prop_assert!(s.s_dot >= -1e-6, "s_dot = {}", s.s_dot);
            let min = s.state.theta.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(min >= -1e-6, "min superheat {min}");
        }
    }
}

//! Acceptance checks, one PASS/FAIL line each with its runtime.
//!
//! Exits 0 whatever the outcome so the workspace test run stays usable; set
//! `ACCEPTANCE_STRICT=1` to exit 1 when any check fails.

use std::time::{Duration, Instant};

use phasefront::battery::{self, presets as bp};
use phasefront::metrics::{first_time_below, settling_time, tail_decay_rate, tail_variance, time_to_fraction};
use phasefront::numerics::GridSpec;
use phasefront::observers::{self, presets as op, KernelKind, ObserverMode};
use phasefront::seaice::{self, presets as sp, SeaIceObserverMode, DAY_SECONDS, YEAR_SECONDS};
use phasefront::stefan::{self, HeatInput, SimOptions, StefanParams, StefanState};
use phasefront::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one check: pass flag and a one-line account of the numbers.
type Outcome = Result<(bool, String)>;

struct Check {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `a < b` with `None` read as never.
fn earlier(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("never".into(), |v| format!("{v:.4}"))
}

fn kernel() -> Outcome {
    let alpha = StefanParams::<f64>::zinc().alpha();
    let (d, lambda) = (0.1, 0.05);
    let mut ok = true;
    let mut notes = Vec::new();
    for kind in [KernelKind::Forward, KernelKind::Inverse] {
        let r = [64, 128, 256].iter().map(|&n| observers::kernel_residual(kind, n, d, lambda, alpha)).collect::<Result<Vec<f64>>>()?;
        let ratios = [r[0] / r[1], r[1] / r[2]];
        ok &= ratios.iter().all(|q| *q >= 3.0);
        notes.push(format!("{kind:?} ratios {:.2}, {:.2}", ratios[0], ratios[1]));
    }
    Ok((ok, notes.join("; ")))
}

fn stefan_invariants() -> Outcome {
    let unit = StefanParams { conductivity: 1.0, density: 1.0, heat_capacity: 1.0, latent_heat: 1.0, melt_temp: 0.0, domain_len: 1.0 };
    let opts = SimOptions { nodes: 21, stride: 5, ..SimOptions::default() };
    let grid = GridSpec::new(opts.nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let (mut min_sdot, mut min_heat) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..50 {
        let s0 = rng.gen_range(0.1..0.5);
        let (a, b) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let init = StefanState::from_fn(&unit, grid, s0, |x| {
            let r = 1.0 - x / s0;
            a * r + b * (std::f64::consts::PI * r / 2.0).sin().powi(2)
        });
        let t1 = rng.gen_range(0.01..0.04);
        let t2 = rng.gen_range(0.05..0.08);
        let input = HeatInput::Schedule { start: vec![0.0, t1, t2], flux: (0..3).map(|_| rng.gen_range(0.0..3.0)).collect() };
        let traj = stefan::simulate(&unit, &init, &input, 0.1, &opts)?;
        for s in &traj.samples {
            min_sdot = min_sdot.min(s.s_dot);
            min_heat = min_heat.min(s.state.theta.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }

    let zinc = StefanParams::<f64>::zinc();
    let n = 200;
    let flux = HeatInput::constant(1e5);
    let init = StefanState::from_fn(&zinc, GridSpec::new(n)?, 0.1, |x| {
        zinc.melt_temp + 1e5 / zinc.conductivity * (0.1 - x) + 30.0 * (1.0 - (x / 0.1).powi(2))
    });
    let traj = stefan::simulate(&zinc, &init, &flux, 100.0, &SimOptions { nodes: n, stride: 500, ..SimOptions::default() })?;
    let e0 = traj.samples[0].energy;
    let residual = stefan::energy_balance(&zinc, &traj, &flux).iter().fold(0.0f64, |m, r| m.max(r.abs())) / e0.abs();

    let ok = min_sdot >= -1e-6 && min_heat >= -1e-6 && residual <= 1e-3;
    Ok((ok, format!("50 runs: min s_dot {min_sdot:.3e}, min superheat {min_heat:.3e}; energy residual {residual:.3e} at N = {n}")))
}

fn full_observer() -> Outcome {
    let run = |lambda: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let traj = observers::run_observer(&op::full_observer::<f64>(lambda))?;
        Ok((traj.times(), traj.h1_errors()))
    };
    let lambda = op::REFERENCE_LAMBDA;
    let (t, e) = run(lambda)?;
    let (t0, e0) = run(0.0)?;
    let rate = tail_decay_rate(&t, &e);
    let (fast, slow) = (time_to_fraction(&t, &e, 0.1), time_to_fraction(&t0, &e0, 0.1));
    let ok = rate.is_some_and(|r| r >= 0.5 * lambda) && earlier(fast, slow);
    Ok((ok, format!("tail rate {} (need {:.4}); t10 {} s vs zero gain {} s", fmt_opt(rate), 0.5 * lambda, fmt_opt(fast), fmt_opt(slow))))
}

fn joint_vs_baseline() -> Outcome {
    let joint = observers::run_observer(&op::joint_comparison::<f64>(ObserverMode::Joint))?;
    let base = observers::run_observer(&op::joint_comparison::<f64>(ObserverMode::Baseline))?;
    let t50 = |tr: &observers::ObserverTrajectory<f64>, k: Option<usize>| {
        let e = k.map_or_else(|| tr.interface_errors(), |k| tr.probe_errors(k));
        time_to_fraction(&tr.times(), &e, 0.5)
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, k) in [("interface", None), ("probe 0", Some(0)), ("probe 1", Some(1)), ("probe 2", Some(2)), ("probe 3", Some(3))] {
        let (a, b) = (t50(&joint, k), t50(&base, k));
        ok &= earlier(a, b);
        notes.push(format!("{name} {} vs {}", fmt_opt(a), fmt_opt(b)));
    }
    Ok((ok, format!("t50 joint vs baseline, s: {}", notes.join(", "))))
}

fn annual_cycle() -> Outcome {
    let sc = sp::annual::<f64>()?;
    let traj = seaice::simulate_annual(&sc.params, &sc.forcing, &sc.snowfall, &sc.init, sc.years, &sc.options)?;
    if let Some(h) = &traj.halt {
        return Ok((false, format!("halted at {:.0} s: {}", h.time, h.reason)));
    }
    let t0 = traj.samples[0].time;
    let year_of = |t: f64| ((t - t0) / YEAR_SECONDS).ceil().max(1.0) as usize - 1;
    let mut ok = true;
    let mut notes = Vec::new();
    let mut maxima = Vec::new();
    for y in 0..sc.years {
        let year: Vec<_> = traj.samples.iter().filter(|s| year_of(s.time) == y).collect();
        let hi = year.iter().copied().max_by(|a, b| a.thickness.total_cmp(&b.thickness)).unwrap();
        let lo = year.iter().copied().min_by(|a, b| a.thickness.total_cmp(&b.thickness)).unwrap();
        maxima.push(hi.thickness);
        if y >= 2 {
            // Growth season ends under snow, then the melt season carries the
            // column down to its minimum later in the same year.
            let day = |t: f64| (t - t0 - y as f64 * YEAR_SECONDS) / DAY_SECONDS;
            let melted = traj.samples.iter().any(|s| s.time > hi.time && s.time <= lo.time && s.melting);
            ok &= hi.snow_depth > 0.0 && hi.time < lo.time && melted && hi.thickness > lo.thickness;
            notes.push(format!("year {} max {:.3} m day {:.0}, min {:.3} m day {:.0}", y + 1, hi.thickness, day(hi.time), lo.thickness, day(lo.time)));
        }
    }
    let drift = (3..sc.years).map(|y| rel(maxima[y], maxima[y - 1])).fold(0.0f64, f64::max);
    ok &= drift <= 0.05;
    Ok((ok, format!("max drift after spin-up {:.2} %; {}", 100.0 * drift, notes.join("; "))))
}

fn seaice_observer() -> Outcome {
    let lambda = sp::REFERENCE_LAMBDAS[0];
    let closed = seaice::run_observer(&sp::january_observer::<f64>(lambda, SeaIceObserverMode::Backstepping, 30.0)?)?;
    let open = seaice::run_observer(&sp::january_observer::<f64>(lambda, SeaIceObserverMode::OpenLoop, 30.0)?)?;
    let (tc, ec) = (closed.times(), closed.l2_errors());
    let (to, eo) = (open.times(), open.l2_errors());
    let first5 = first_time_below(&tc, &ec, 0.05);
    let (t10c, t10o) = (time_to_fraction(&tc, &ec, 0.1), time_to_fraction(&to, &eo, 0.1));
    let ratio = t10o.zip(t10c).map(|(o, c)| o / c);
    let ok = first5.is_some_and(|t| t <= 3.0 * DAY_SECONDS) && ratio.is_some_and(|r| (4.0..=12.0).contains(&r));
    Ok((
        ok,
        format!(
            "first at 5 % on day {}; t10 open/closed {} / {} d, ratio {}",
            fmt_opt(first5.map(|t| t / DAY_SECONDS)),
            fmt_opt(t10o.map(|t| t / DAY_SECONDS)),
            fmt_opt(t10c.map(|t| t / DAY_SECONDS)),
            fmt_opt(ratio)
        ),
    ))
}

fn seaice_robustness() -> Outcome {
    let (sc, deltas) = sp::robustness::<f64>(15.0)?;
    let (_, m) = seaice::robustness_run(&sc, deltas, 5.0)?;
    let ok = m.band <= 0.1 * m.peak;
    Ok((
        ok,
        format!(
            "|H - H_hat| peak {:.3e} m, band after day 5 {:.3e} m = {:.1} % of peak; settles about its final value on day {}",
            m.peak,
            m.band,
            100.0 * m.band / m.peak,
            fmt_opt(m.settling_time.map(|t| t / DAY_SECONDS))
        ),
    ))
}

fn battery_conservation() -> Outcome {
    let params = battery::CellParams::<f64>::table();
    let opts = battery::BatteryOptions::default();
    let init = bp::truth_initial(&params, &opts);
    let plant = battery::simulate_discharge(&params, &battery::OcpPair::synthetic(), bp::reference_current(), &init, 600.0, &opts)?;
    let n0 = plant.samples[0].lithium;
    let plant_drift = plant.samples.iter().map(|s| rel(s.lithium, n0)).fold(0.0f64, f64::max);

    let est = battery::run_estimation(&bp::estimation::<f64>(None, 600.0)?)?;
    let (m0, h0) = (est.samples[0].lithium, est.samples[0].lithium_est);
    let obs_drift = est.samples.iter().map(|s| rel(s.lithium, m0).max(rel(s.lithium_est, h0))).fold(0.0f64, f64::max);

    let ended = plant.halt.is_none() && est.halt.is_none();
    let ok = ended && plant_drift <= 1e-4 && obs_drift <= 1e-4;
    Ok((ok, format!("600 s at 5C: plant drift {plant_drift:.2e}, estimation run drift {obs_drift:.2e}, halts none: {ended}")))
}

fn battery_soc() -> Outcome {
    let sc = bp::estimation::<f64>(None, 600.0)?;
    let tr = battery::run_estimation(&sc)?;
    let t = tr.times();
    let e = tr.soc_errors();
    let settle = settling_time(&t, &e, 1.0);
    let iface = settling_time(&t, &tr.interface_errors(sc.params.pos.radius), 0.01);
    let ok = e[0] >= 15.0 && settle.is_some_and(|s| s <= 300.0) && iface.is_some_and(|s| s <= 60.0);
    Ok((ok, format!("initial {:.1} points; within 1 point from {} s; interface within 1 % from {} s", e[0], fmt_opt(settle), fmt_opt(iface))))
}

fn bks_vs_ekf() -> Outcome {
    let sc = bp::estimation::<f64>(Some(bp::reference_noise()), 600.0)?;
    let bks = battery::run_estimation(&sc)?;
    let ekf = battery::run_ekf(&sc)?;
    let stats = |tr: &battery::EstimationTrajectory<f64>| {
        let t = tr.times();
        let first = t.iter().zip(tr.soc_errors()).find(|(_, e)| *e <= 1.0).map(|(t, _)| *t);
        let dev: Vec<f64> = tr.samples.iter().map(|s| s.soc_est - s.soc_true).collect();
        (first, tail_variance(&t, &dev, 0.5 * t.last().copied().unwrap_or(0.0)))
    };
    let (bf, bv) = stats(&bks);
    let (ef, ev) = stats(&ekf);
    let ok = earlier(bf, ef) && ev.zip(bv).is_some_and(|(e, b)| e < b);
    Ok((
        ok,
        format!(
            "first within 1 point BKS {} s vs EKF {} s; tail variance EKF {} vs BKS {}",
            fmt_opt(bf),
            fmt_opt(ef),
            ev.map_or("n/a".into(), |v| format!("{v:.3e}")),
            bv.map_or("n/a".into(), |v| format!("{v:.3e}"))
        ),
    ))
}

fn main() {
    let checks = [
        Check { name: "kernel residual order", budget: Duration::from_secs(5), run: kernel },
        Check { name: "stefan plant invariants", budget: Duration::from_secs(60), run: stefan_invariants },
        Check { name: "full-state observer decay", budget: Duration::from_secs(30), run: full_observer },
        Check { name: "joint vs baseline", budget: Duration::from_secs(60), run: joint_vs_baseline },
        Check { name: "sea-ice annual cycle", budget: Duration::from_secs(300), run: annual_cycle },
        Check { name: "sea-ice observer", budget: Duration::from_secs(300), run: seaice_observer },
        Check { name: "sea-ice robustness", budget: Duration::from_secs(300), run: seaice_robustness },
        Check { name: "battery conservation", budget: Duration::from_secs(120), run: battery_conservation },
        Check { name: "battery soc convergence", budget: Duration::from_secs(120), run: battery_soc },
        Check { name: "bks vs ekf with noise", budget: Duration::from_secs(180), run: bks_vs_ekf },
    ];
    let mut failed = 0;
    for c in &checks {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= c.budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {:<26} {:>8.2} s (budget {} s)  {detail}", c.name, elapsed.as_secs_f64(), c.budget.as_secs());
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

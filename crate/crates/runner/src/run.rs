//! Builds the scenario a config describes, runs it and turns the trajectory
//! into records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use phasefront::battery::{self, presets as bp, BatteryOptions, CellParams, CellState, EstimationScenario, EstimationTrajectory, NoiseSpec, OcpCurve, OcpPair};
use phasefront::observers::{self, presets::StefanSetup, ObserverGains, ObserverMode};
use phasefront::seaice::{self, presets as sp, MonthlyForcing, Perturbation, SeaIceObserverMode, SeaIceObserverScenario, SeaIceOptions, DAY_SECONDS, YEAR_SECONDS};
use phasefront::stefan::{self, Halt, HeatInput};

use crate::config::{BatteryConfig, Mode, Model, ScenarioConfig, SeaIceConfig, StefanConfig};
use crate::error::{RunnerError, EXIT_OK, EXIT_VALIDITY};
use crate::records::{thin, write_profiles, write_records, ProfilePoint, Record};
use crate::summary::{Metrics, Provenance, Summary, SUMMARY_SCHEMA};

/// Default horizon of the January observer runs, days.
pub const SEAICE_OBSERVER_DAYS: f64 = 30.0;
/// Default horizon of the robustness run, days.
pub const ROBUSTNESS_DAYS: f64 = 15.0;
/// Default horizon of the battery runs, s.
pub const BATTERY_HORIZON: f64 = 600.0;

/// Command-line settings that sit on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub preset: Option<String>,
    /// Replaces the noise seed of the config.
    pub seed: Option<u64>,
    /// Halt Stefan runs on the first sign violation.
    pub strict_validity: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub profiles: Vec<ProfilePoint>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.summary.halt.is_some() {
            EXIT_VALIDITY
        } else {
            EXIT_OK
        }
    }

    /// Writes `records.csv`, `summary.json` and, when there are profiles, `profiles.csv`.
    pub fn write(&self, dir: &Path) -> Result<(), RunnerError> {
        std::fs::create_dir_all(dir).map_err(|e| RunnerError::Io(format!("{}: {e}", dir.display())))?;
        write_records(&dir.join("records.csv"), &self.records)?;
        if !self.profiles.is_empty() {
            write_profiles(&dir.join("profiles.csv"), &self.profiles)?;
        }
        self.summary.write(&dir.join("summary.json"))
    }
}

/// Records provenance of one setting.
struct Prov(BTreeMap<String, Provenance>);

impl Prov {
    fn set(&mut self, key: &str, overridden: bool, default: Provenance) {
        self.0.insert(key.to_string(), if overridden { Provenance::Config } else { default });
    }
}

struct Raw {
    records: Vec<Record>,
    profiles: Vec<ProfilePoint>,
    halt: Option<Halt>,
    horizon: f64,
    seed: Option<u64>,
}

/// Runs `cfg` and builds its records and summary.
pub fn execute(cfg: &ScenarioConfig, ctx: &RunContext) -> Result<RunOutput, RunnerError> {
    cfg.validate()?;
    let mut prov = Prov(BTreeMap::new());
    prov.set("horizon", cfg.horizon.is_some(), Provenance::Chosen);
    let raw = match cfg.model {
        Model::Stefan => run_stefan(cfg, &cfg.stefan, ctx, &mut prov)?,
        Model::Seaice => run_seaice(cfg, &cfg.seaice, &mut prov)?,
        Model::Battery => run_battery(cfg, &cfg.battery, ctx, &mut prov)?,
    };
    let stride = cfg.output_stride;
    let records = thin(&raw.records, stride);
    let profiles = if stride == 1 {
        raw.profiles
    } else {
        let kept: Vec<f64> = records.iter().map(|r| r.time).collect();
        raw.profiles.into_iter().filter(|p| kept.contains(&p.time)).collect()
    };
    let metrics = Metrics::from_records(cfg.model, cfg.mode, &records);
    let summary = Summary {
        schema: SUMMARY_SCHEMA.to_string(),
        model: cfg.model,
        mode: cfg.mode,
        preset: ctx.preset.clone(),
        seed: raw.seed,
        horizon: raw.horizon,
        halt: raw.halt,
        provenance: prov.0,
        metrics,
    };
    Ok(RunOutput { records, profiles, summary })
}

/// Output directory: `--out`, then the config's `output_dir`, then
/// `runs/<name>`.
pub fn output_dir(cfg: &ScenarioConfig, out: Option<&Path>, name: &str) -> PathBuf {
    out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| Path::new("runs").join(name))
}

fn model_err(context: &str) -> impl Fn(phasefront::Error) -> RunnerError + '_ {
    move |e| RunnerError::model(context, e)
}

// ---- Stefan ----------------------------------------------------------------

fn stefan_setup(c: &StefanConfig, strict: bool, prov: &mut Prov) -> StefanSetup<f64> {
    let mut s = StefanSetup::<f64>::reference();
    let o = &c.params;
    let p = &mut s.params;
    for (key, value, slot) in [
        ("params.conductivity", o.conductivity, &mut p.conductivity),
        ("params.density", o.density, &mut p.density),
        ("params.heat_capacity", o.heat_capacity, &mut p.heat_capacity),
        ("params.latent_heat", o.latent_heat, &mut p.latent_heat),
        ("params.melt_temp", o.melt_temp, &mut p.melt_temp),
        ("params.domain_len", o.domain_len, &mut p.domain_len),
    ] {
        prov.set(key, value.is_some(), Provenance::Chosen);
        if let Some(v) = value {
            *slot = v;
        }
    }
    prov.set("flux", c.flux.is_some(), Provenance::Chosen);
    prov.set("s0", c.s0.is_some(), Provenance::Chosen);
    prov.set("nodes", c.nodes.is_some(), Provenance::Chosen);
    s.flux = c.flux.unwrap_or(s.flux);
    s.s0 = c.s0.unwrap_or(s.s0);
    s.options.nodes = c.nodes.unwrap_or(s.options.nodes);
    s.options.stride = c.stride.unwrap_or(s.options.stride);
    s.options.strict_validity = strict;
    s
}

fn run_stefan(cfg: &ScenarioConfig, c: &StefanConfig, ctx: &RunContext, prov: &mut Prov) -> Result<Raw, RunnerError> {
    let setup = stefan_setup(c, ctx.strict_validity, prov);
    let tm = setup.params.melt_temp;
    if cfg.mode == Mode::Simulate {
        let ctx_name = "stefan simulate";
        let horizon = cfg.horizon.unwrap_or(observers::presets::FULL_HORIZON);
        let input = HeatInput::constant(setup.flux);
        let init = setup.plant().map_err(model_err(ctx_name))?;
        let traj = stefan::simulate(&setup.params, &init, &input, horizon, &setup.options).map_err(model_err(ctx_name))?;
        let balance = stefan::energy_balance(&setup.params, &traj, &input);
        let e0 = traj.samples.first().map_or(0.0, |s| s.energy);
        let records = traj
            .samples
            .iter()
            .zip(&balance)
            .map(|(s, b)| {
                let mut r = Record::at(s.state.time);
                r.interface = s.state.s;
                let probes = observers::PROBE_FRACTIONS.map(|f| s.state.temperature_at(f * s.state.s, tm));
                r.set_probes(probes, [f64::NAN; 4]);
                r.invariant = e0 + b;
                r.valid = s.valid;
                r
            })
            .collect();
        return Ok(Raw { records, profiles: Vec::new(), halt: traj.halt, horizon, seed: None });
    }

    let ctx_name = format!("stefan {}", cfg.mode.name());
    let lambda = c.lambda.unwrap_or(observers::presets::REFERENCE_LAMBDA);
    prov.set("lambda", c.lambda.is_some(), Provenance::Chosen);
    let mut sc = match cfg.mode {
        Mode::ObserveFull => setup.full_observer(lambda),
        Mode::ObserveJoint | Mode::ObserveBaseline => {
            prov.set("l", c.l.is_some(), Provenance::Chosen);
            let gains = ObserverGains { lambda, l: c.l.unwrap_or(observers::presets::REFERENCE_L) };
            let mode = if cfg.mode == Mode::ObserveJoint { ObserverMode::Joint } else { ObserverMode::Baseline };
            setup.joint_comparison(gains, mode)
        }
        _ => unreachable!("validated mode"),
    }
    .map_err(model_err(&ctx_name))?;
    if let Some(h) = cfg.horizon {
        sc.horizon = h;
    }
    let traj = observers::run_observer(&sc).map_err(model_err(&ctx_name))?;
    let records = traj
        .samples
        .iter()
        .map(|s| {
            let mut r = Record::at(s.time);
            r.interface = s.s;
            r.interface_est = s.s_hat;
            r.set_probes(s.probe_true, s.probe_est);
            r.l2_error = s.norms.l2;
            r.h1_error = s.norms.h1;
            r.valid = s.valid;
            r
        })
        .collect();
    Ok(Raw { records, profiles: Vec::new(), halt: traj.halt, horizon: sc.horizon, seed: None })
}

// ---- Sea ice ---------------------------------------------------------------

fn seaice_options(c: &SeaIceConfig, base: SeaIceOptions, prov: &mut Prov) -> SeaIceOptions {
    prov.set("ice_nodes", c.ice_nodes.is_some(), Provenance::Chosen);
    prov.set("snow_nodes", c.snow_nodes.is_some(), Provenance::Chosen);
    prov.set("salinity", c.salinity.is_some(), Provenance::Published);
    SeaIceOptions {
        ice_nodes: c.ice_nodes.unwrap_or(base.ice_nodes),
        snow_nodes: c.snow_nodes.unwrap_or(base.snow_nodes),
        sample_interval: c.sample_interval.unwrap_or(base.sample_interval),
        salinity: c.salinity.unwrap_or(base.salinity),
        ..base
    }
}

fn load_forcing(c: &SeaIceConfig, prov: &mut Prov) -> Result<MonthlyForcing<f64>, RunnerError> {
    prov.set("forcing", c.forcing.is_some(), Provenance::Published);
    match &c.forcing {
        None => Ok(MonthlyForcing::table()),
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
            MonthlyForcing::from_csv(file).map_err(|e| RunnerError::model(path.display().to_string(), e))
        }
    }
}

fn ice_probes(profile: &[f64]) -> [f64; 4] {
    seaice::PROBE_FRACTIONS.map(|f| phasefront::numerics::interp_uniform(profile, 1.0, f))
}

fn profile_points<'a>(
    time: f64,
    truth: &'a [f64],
    estimate: Option<&'a [f64]>,
    position: impl Fn(usize) -> f64 + 'a,
) -> impl Iterator<Item = ProfilePoint> + 'a {
    truth.iter().enumerate().map(move |(i, v)| ProfilePoint {
        time,
        position: position(i),
        truth: *v,
        estimate: estimate.map_or(f64::NAN, |e| e[i]),
    })
}

fn run_seaice(cfg: &ScenarioConfig, c: &SeaIceConfig, prov: &mut Prov) -> Result<Raw, RunnerError> {
    let forcing = load_forcing(c, prov)?;
    prov.set("params", false, Provenance::Published);
    let ctx_name = format!("seaice {}", cfg.mode.name());
    let err = model_err(&ctx_name);

    if cfg.mode == Mode::Simulate {
        let mut sc = sp::annual::<f64>().map_err(&err)?;
        prov.set("snowfall", false, Provenance::Chosen);
        prov.set("years", c.years.is_some(), Provenance::Chosen);
        sc.forcing = forcing;
        sc.options = seaice_options(c, sc.options, prov);
        sc.init = sp::initial_column(&sc.params, &sc.forcing, &sc.options).map_err(&err)?;
        let years = c.years.unwrap_or(sc.years);
        let horizon = cfg.horizon.unwrap_or(years as f64 * YEAR_SECONDS);
        let traj = seaice::simulate(&sc.params, &sc.forcing, &sc.snowfall, &sc.init, horizon, &sc.options).map_err(&err)?;
        let mut records = Vec::with_capacity(traj.samples.len());
        let mut profiles = Vec::new();
        for s in &traj.samples {
            let mut r = Record::at(s.time);
            r.interface = s.thickness;
            r.snow_depth = s.snow_depth;
            r.set_probes(ice_probes(&s.ice), [f64::NAN; 4]);
            records.push(r);
            let n = s.ice.len();
            profiles.extend(profile_points(s.time, &s.ice, None, |i| i as f64 / (n - 1) as f64));
        }
        return Ok(Raw { records, profiles, halt: traj.halt, horizon, seed: None });
    }

    let (mode, default_days) = match cfg.mode {
        Mode::ObserveOpenloop => (SeaIceObserverMode::OpenLoop, SEAICE_OBSERVER_DAYS),
        Mode::Robustness => (SeaIceObserverMode::Backstepping, ROBUSTNESS_DAYS),
        _ => (SeaIceObserverMode::Backstepping, SEAICE_OBSERVER_DAYS),
    };
    let days = cfg.horizon.map_or(default_days, |h| h / DAY_SECONDS);
    let lambda = c.lambda.unwrap_or(sp::REFERENCE_LAMBDAS[0]);
    prov.set("lambda", c.lambda.is_some(), Provenance::Published);
    prov.set("c", c.c.is_some(), Provenance::Published);
    prov.set("epsilon", c.epsilon.is_some(), Provenance::Published);
    let mut sc: SeaIceObserverScenario<f64> = sp::january_observer(lambda, mode, days).map_err(&err)?;
    sc.obs.c = c.c.unwrap_or(sc.obs.c);
    sc.obs.epsilon = c.epsilon.unwrap_or(sc.obs.epsilon);
    sc.forcing = forcing;
    sc.options = seaice_options(c, sc.options, prov);
    sc.plant_init = sp::initial_column(&sc.params, &sc.forcing, &sc.options).map_err(&err)?;
    sc.estimate_init = seaice::quadratic_estimate(sc.plant_init.ice[0], sc.params.tm2, sp::ESTIMATE_BEND, sc.options.ice_nodes);
    sc.thickness_est_init = sc.plant_init.thickness;
    if cfg.mode == Mode::Robustness {
        prov.set("deltas", c.deltas.is_some(), Provenance::Published);
        let [d1, d2, d3] = c.deltas.unwrap_or(sp::ROBUSTNESS_DELTAS);
        sc.perturbation = Perturbation { diffusivity: d1, beta: d2, ocean_flux: d3 };
    }
    let traj = seaice::run_observer(&sc).map_err(&err)?;
    let mut records = Vec::with_capacity(traj.samples.len());
    let mut profiles = Vec::new();
    for s in &traj.samples {
        let mut r = Record::at(s.time);
        r.interface = s.thickness;
        r.interface_est = s.thickness_est;
        r.snow_depth = s.snow_depth;
        r.set_probes(s.probe_true, s.probe_est);
        r.l2_error = s.l2_error;
        r.overshoot = s.overshoot;
        records.push(r);
        let n = s.ice.len();
        profiles.extend(profile_points(s.time, &s.ice, Some(&s.estimate), |i| i as f64 / (n - 1) as f64));
    }
    Ok(Raw { records, profiles, halt: traj.halt, horizon: sc.horizon, seed: None })
}

// ---- Battery ---------------------------------------------------------------

fn load_ocp(path: &Path) -> Result<OcpCurve<f64>, RunnerError> {
    let file = std::fs::File::open(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
    OcpCurve::from_csv(file).map_err(|e| RunnerError::model(path.display().to_string(), e))
}

struct CellSetup {
    params: CellParams<f64>,
    ocp: OcpPair<f64>,
    current: f64,
    options: BatteryOptions,
    truth: CellState<f64>,
}

fn cell_setup(c: &BatteryConfig, prov: &mut Prov) -> Result<CellSetup, RunnerError> {
    let mut params = CellParams::<f64>::table();
    prov.set("params", false, Provenance::Published);
    prov.set("contact_resistance", c.contact_resistance.is_some(), Provenance::Chosen);
    params.contact_resistance = c.contact_resistance.unwrap_or(params.contact_resistance);
    let mut ocp = OcpPair::synthetic();
    prov.set("ocp", c.ocp_pos.is_some() || c.ocp_neg.is_some(), Provenance::Chosen);
    if let Some(p) = &c.ocp_pos {
        ocp.pos = load_ocp(p)?;
    }
    if let Some(p) = &c.ocp_neg {
        ocp.neg = load_ocp(p)?;
    }
    prov.set("c_rate", c.c_rate.is_some(), Provenance::Published);
    prov.set("one_c", c.one_c.is_some(), Provenance::Chosen);
    let current = c.c_rate.unwrap_or(bp::C_RATE) * c.one_c.unwrap_or(bp::ONE_C);
    let base = BatteryOptions::default();
    prov.set("shell_nodes", c.shell_nodes.is_some(), Provenance::Chosen);
    prov.set("neg_nodes", c.neg_nodes.is_some(), Provenance::Chosen);
    let options = BatteryOptions {
        shell_nodes: c.shell_nodes.unwrap_or(base.shell_nodes),
        neg_nodes: c.neg_nodes.unwrap_or(base.neg_nodes),
        ..base
    };
    prov.set("true_interface", c.true_interface.is_some(), Provenance::Chosen);
    let r_p = c.true_interface.unwrap_or(bp::TRUE_INTERFACE) * params.pos.radius;
    let truth = CellState::initial(&params, current, r_p, bp::NEG_STOICHIOMETRY, &options);
    Ok(CellSetup { params, ocp, current, options, truth })
}

fn estimation_records(traj: &EstimationTrajectory<f64>, big_r: f64) -> Vec<Record> {
    traj.samples
        .iter()
        .map(|s| {
            let mut r = Record::at(s.time);
            r.interface = s.r_p / big_r;
            r.interface_est = s.r_p_est / big_r;
            r.soc = s.soc_true;
            r.soc_est = s.soc_est;
            r.l2_error = s.error_norm.sqrt();
            r.invariant = s.lithium;
            r.invariant_est = s.lithium_est;
            r
        })
        .collect()
}

fn run_battery(cfg: &ScenarioConfig, c: &BatteryConfig, ctx: &RunContext, prov: &mut Prov) -> Result<Raw, RunnerError> {
    let ctx_name = format!("battery {}", cfg.mode.name());
    let err = model_err(&ctx_name);
    let cell = cell_setup(c, prov)?;
    let horizon = cfg.horizon.unwrap_or(BATTERY_HORIZON);
    let big_r = cell.params.pos.radius;

    if cfg.mode == Mode::Simulate {
        let traj = battery::simulate_discharge(&cell.params, &cell.ocp, cell.current, &cell.truth, horizon, &cell.options).map_err(&err)?;
        let mut records = Vec::with_capacity(traj.samples.len());
        let mut profiles = Vec::new();
        for s in &traj.samples {
            let mut r = Record::at(s.time);
            r.interface = s.r_p / big_r;
            r.soc = s.soc_pos;
            r.invariant = s.lithium;
            r.voltage = s.voltage;
            records.push(r);
            let n = s.shell.len();
            let eta = |i: usize| (s.r_p + (big_r - s.r_p) * i as f64 / (n - 1) as f64) / big_r;
            profiles.extend(profile_points(s.time, &s.shell, None, eta));
        }
        return Ok(Raw { records, profiles, halt: traj.halt, horizon, seed: None });
    }

    let noise = cfg.noise.map(|n| NoiseSpec { std: n.std, seed: ctx.seed.unwrap_or(n.seed) });
    prov.set("noise", cfg.noise.is_some(), Provenance::Chosen);
    let mut obs = bp::reference_observer::<f64>();
    prov.set("lambda", c.lambda.is_some(), Provenance::Chosen);
    prov.set("kappa", c.kappa.is_some(), Provenance::Chosen);
    obs.lambda = c.lambda.unwrap_or(obs.lambda);
    obs.kappa = c.kappa.unwrap_or(obs.kappa);
    if cfg.mode == Mode::Ekf {
        prov.set("ekf", c.ekf.is_some(), Provenance::Chosen);
    }
    if let Some(ekf) = &c.ekf {
        obs.ekf = ekf.clone();
    }
    prov.set("estimate_interface", c.estimate_interface.is_some(), Provenance::Chosen);
    let r_hat = c.estimate_interface.unwrap_or(bp::ESTIMATE_INTERFACE) * big_r;
    let estimate = bp::estimate_initial(&cell.params, &cell.truth, r_hat, &cell.options);
    prov.set("measurement_interval", c.measurement_interval.is_some(), Provenance::Chosen);
    let sc = EstimationScenario {
        params: cell.params,
        ocp: cell.ocp,
        current: cell.current,
        truth: cell.truth,
        estimate,
        obs,
        noise,
        measurement_interval: c.measurement_interval.unwrap_or(1.0),
        horizon,
        options: cell.options,
        pin_interface: false,
    };
    sc.validate().map_err(&err)?;
    let traj = match cfg.mode {
        Mode::Ekf => battery::run_ekf(&sc),
        _ => battery::run_estimation(&sc),
    }
    .map_err(&err)?;
    Ok(Raw { records: estimation_records(&traj, big_r), profiles: Vec::new(), halt: traj.halt, horizon, seed: noise.map(|n| n.seed) })
}

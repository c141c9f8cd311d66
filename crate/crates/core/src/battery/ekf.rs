use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{diffusion_step_limit, rk4_step};

use super::model::{cell_rates, cell_step_limit, pack_cell, shell_rhs, total_lithium, unpack_cell, ShellState};
use super::observer::{clamp_interface, halted, shell_soc, weighted_error, EstimationSample, EstimationScenario, EstimationTrajectory, NoiseTrace};
use super::params::{molar_flux, CellParams, Electrode};

/// Step of forward differences in normalised state units.
const FD_STEP: f64 = 1e-6;

/// Shell model the filter runs on: `m` nodes, state
/// `[c_1/c_max, .., c_{m-1}/c_max, r_p/R]`.
struct FilterModel<'a> {
    params: &'a CellParams<f64>,
    nodes: usize,
    j_pos: f64,
}

impl FilterModel<'_> {
    fn to_shell(&self, x: &DVector<f64>) -> ShellState<f64> {
        let p = self.params;
        let mut c = vec![p.c_beta];
        c.extend(x.iter().take(self.nodes - 1).map(|v| v * p.pos.c_max));
        ShellState { r_p: x[self.nodes - 1] * p.pos.radius, c }
    }

    fn to_state(&self, s: &ShellState<f64>) -> DVector<f64> {
        let p = self.params;
        let mut v: Vec<f64> = s.c[1..].iter().map(|c| c / p.pos.c_max).collect();
        v.push(s.r_p / p.pos.radius);
        DVector::from_vec(v)
    }

    /// Propagates the shell over `dt` with RK4 substeps.
    fn propagate(&self, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
        let p = self.params;
        let mut s = self.to_shell(x);
        let mut t = 0.0;
        while t < dt {
            let ds = 1.0 / (self.nodes - 1) as f64;
            let gap = p.pos.radius - s.r_p;
            let limit = diffusion_step_limit(ds, 2.0 * p.pos.diffusivity / (gap * gap));
            let h = limit.min(dt - t);
            let mut y = s.c[1..].to_vec();
            y.push(s.r_p);
            let y1 = rk4_step::<f64, Error, _>(
                |_, y| {
                    let mut c = vec![p.c_beta];
                    c.extend_from_slice(&y[..y.len() - 1]);
                    let st = ShellState { r_p: y[y.len() - 1], c };
                    let (dc, r_dot) = shell_rhs(&st, self.j_pos, p)?;
                    let mut out = dc[1..].to_vec();
                    out.push(r_dot);
                    Ok(out)
                },
                t,
                &y,
                h,
            )?;
            let mut c = vec![p.c_beta];
            c.extend_from_slice(&y1[..y1.len() - 1]);
            s = ShellState { r_p: clamp_interface(y1[y1.len() - 1], p), c };
            t += h;
        }
        Ok(self.to_state(&s))
    }

    /// Propagated state and its forward-difference Jacobian.
    fn linearise(&self, x: &DVector<f64>, dt: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let fx = self.propagate(x, dt)?;
        let n = x.len();
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            xp[j] += FD_STEP;
            let col = (self.propagate(&xp, dt)? - &fx) / FD_STEP;
            jac.set_column(j, &col);
        }
        Ok((fx, jac))
    }
}

/// Extended Kalman filter on a coarse shell model, fed the same noisy
/// surface samples as the backstepping observer. The filter state is the
/// positive shell and its interface; there is no negative-particle estimate,
/// so `lithium_est` is NaN.
pub fn run_ekf(sc: &EstimationScenario<f64>) -> Result<EstimationTrajectory<f64>> {
    sc.validate()?;
    let params = &sc.params;
    let cfg = &sc.obs.ekf;
    let m = cfg.nodes;
    let model = FilterModel { params, nodes: m, j_pos: molar_flux(sc.current, Electrode::Pos, params) };
    let ts = sc.measurement_interval;
    let noise = NoiseTrace::new(sc.noise, ts, sc.horizon)?;
    let (nn, ns) = (sc.truth.neg.c.len(), sc.truth.shell.c.len());

    // Filter starts from the estimate's shell resampled on its own grid.
    let est = &sc.estimate.shell;
    let start = ShellState {
        r_p: est.r_p,
        c: super::model::shell_nodes(est.r_p, params.pos.radius, m).into_iter().map(|r| est.value_at(r, params)).collect(),
    };
    let mut x = model.to_state(&start);
    let mut p_cov = DMatrix::from_diagonal(&DVector::from_fn(m, |i, _| {
        if i + 1 == m {
            cfg.init_radius_std.powi(2)
        } else {
            cfg.init_conc_std.powi(2)
        }
    }));
    let q_diag = DVector::from_fn(m, |i, _| if i + 1 == m { cfg.process_radius * ts } else { cfg.process_conc * ts });
    let r_meas = (cfg.measurement_std / params.pos.c_max).powi(2);

    let mut truth = pack_cell(&sc.truth);
    let mut t = sc.truth.time;
    let end = t + sc.horizon;
    let interval = sc.options.sample_interval;
    let mut next_sample = t + interval;

    let record = |truth: &[f64], x: &DVector<f64>, t: f64, k: usize| -> Result<EstimationSample<f64>> {
        let (neg, shell) = unpack_cell(truth, nn, params.c_beta);
        let est = model.to_shell(x);
        Ok(EstimationSample {
            time: t,
            r_p: shell.r_p,
            r_p_est: est.r_p,
            soc_true: shell_soc(&shell, params),
            soc_est: shell_soc(&est, params),
            c_ss: shell.surface(),
            c_ss_meas: shell.surface() + noise.at(k),
            lithium: total_lithium(&neg, &shell, params),
            lithium_est: f64::NAN,
            error_norm: weighted_error(&shell, &est, params)?,
        })
    };

    let update = |x: &mut DVector<f64>, p_cov: &mut DMatrix<f64>, z: f64| -> Result<()> {
        let h_idx = m - 2;
        let s = p_cov[(h_idx, h_idx)] + r_meas;
        let gain: DVector<f64> = p_cov.column(h_idx) / s;
        let innov = z / params.pos.c_max - x[h_idx];
        *x += &gain * innov;
        x[m - 1] = clamp_interface(x[m - 1] * params.pos.radius, params) / params.pos.radius;
        let mut ikh = DMatrix::<f64>::identity(m, m);
        for i in 0..m {
            ikh[(i, h_idx)] -= gain[i];
        }
        let joseph = &ikh * &*p_cov * ikh.transpose() + &gain * gain.transpose() * r_meas;
        *p_cov = (&joseph + joseph.transpose()) * 0.5;
        if p_cov.clone().cholesky().is_none() {
            return Err(Error::Numerics(crate::error::NumericsError::NonFinite("EKF covariance lost positive definiteness")));
        }
        Ok(())
    };

    let (_, shell0) = unpack_cell(&truth, nn, params.c_beta);
    update(&mut x, &mut p_cov, shell0.surface() + noise.at(0))?;
    let mut samples = vec![record(&truth, &x, t, 0)?];
    let mut k = 0usize;
    while t < end - 1e-12 {
        let t_meas = noise.boundary(k + 1);
        let stop = t_meas.min(end);
        // Truth to the next measurement time.
        while t < stop - 1e-12 {
            let (_, shell) = unpack_cell(&truth, nn, params.c_beta);
            let limit = cell_step_limit(shell.r_p, params, ns, nn);
            let h = limit.min(stop - t);
            truth = match rk4_step::<f64, Error, _>(|_, y| cell_rates(y, nn, sc.current, params), t, &truth, h) {
                Ok(v) => v,
                Err(e) if e.is_validity_halt() => return Ok(halted(samples, t, &e)),
                Err(e) => return Err(e),
            };
            t += h;
        }
        t = stop;
        let (fx, phi) = model.linearise(&x, stop - noise.boundary(k))?;
        x = fx;
        p_cov = &phi * &p_cov * phi.transpose() + DMatrix::from_diagonal(&q_diag);
        if (t - t_meas).abs() < 1e-9 {
            k += 1;
            let (_, shell) = unpack_cell(&truth, nn, params.c_beta);
            update(&mut x, &mut p_cov, shell.surface() + noise.at(k))?;
        }
        if t >= next_sample - 1e-9 || t >= end - 1e-12 {
            samples.push(record(&truth, &x, t, k)?);
            next_sample += interval;
        }
    }
    Ok(EstimationTrajectory { samples, halt: None })
}

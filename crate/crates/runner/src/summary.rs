//! Run summary. Every headline metric is derived from the written records,
//! so reloading `records.csv` reproduces `summary.json` exactly.

use std::collections::BTreeMap;
use std::path::Path;

use phasefront::metrics::{band_after, first_time_below, peak_before, settling_time, tail_decay_rate, tail_variance, time_to_fraction};
use phasefront::seaice::{DAY_SECONDS, YEAR_SECONDS};
use phasefront::stefan::Halt;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, Model};
use crate::error::RunnerError;
use crate::records::Record;

pub const SUMMARY_SCHEMA: &str = "phasefront-summary v1";

/// Days after which the robustness band is measured.
pub const SETTLE_DAYS: f64 = 5.0;

/// Where a default came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Value from the published experiment.
    Published,
    /// Value picked here where none was published.
    Chosen,
    /// Value set in the run's config.
    Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub model: Model,
    pub mode: Mode,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    /// Requested simulated time, s.
    pub horizon: f64,
    pub halt: Option<Halt>,
    pub provenance: BTreeMap<String, Provenance>,
    pub metrics: Metrics,
}

impl Summary {
    pub fn write(&self, path: &Path) -> Result<(), RunnerError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| RunnerError::Records(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
        let s: Self = serde_json::from_str(&text).map_err(|e| RunnerError::Records(format!("{}: {e}", path.display())))?;
        if s.schema != SUMMARY_SCHEMA {
            return Err(RunnerError::Records(format!("{}: unknown schema `{}`", path.display(), s.schema)));
        }
        Ok(s)
    }
}

/// Battery state-of-charge figures. Errors are in SoC points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocMetrics {
    pub initial_error: Option<f64>,
    pub final_error: Option<f64>,
    /// Time after which the error stays within 1 point, s.
    pub convergence_time: Option<f64>,
    /// First time the error is within 1 point, s.
    pub first_within_1pt: Option<f64>,
    /// Variance of `soc_est - soc` over the second half of the run.
    pub tail_variance: Option<f64>,
    /// Time after which `|r_p - r_hat| / R_p+` stays within 0.01, s.
    pub interface_convergence_time: Option<f64>,
}

/// Thickness-error figures of a perturbed-observer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    /// Largest `|H - H_hat|` in the first days, m.
    pub peak: Option<f64>,
    /// Largest `|H - H_hat|` afterwards, m.
    pub band: Option<f64>,
    pub band_over_peak: Option<f64>,
    /// Day after which `H - H_hat` stays within 10 % of the peak of its
    /// final value.
    pub settling_day: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearExtremes {
    pub year: usize,
    pub max_thickness: f64,
    pub min_thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub samples: usize,
    pub final_time: Option<f64>,
    /// Column the error figures below refer to.
    pub error_metric: Option<String>,
    pub initial_error: Option<f64>,
    pub final_error: Option<f64>,
    /// Settling times to 50 % and 10 % of the initial error, s.
    pub time_to_50pct: Option<f64>,
    pub time_to_10pct: Option<f64>,
    /// First time the error is at 5 % of its initial value, s.
    pub first_time_to_5pct: Option<f64>,
    /// Exponential rate fitted to the second half of the error trace, 1/s.
    pub decay_rate: Option<f64>,
    /// Settling time to 50 % for the interface and each probe error, s.
    pub channel_time_to_50pct: BTreeMap<String, Option<f64>>,
    /// Largest relative change of the invariant columns.
    pub conservation_drift: Option<f64>,
    pub overshoot: Option<f64>,
    pub valid_fraction: f64,
    pub final_interface: Option<f64>,
    pub soc: Option<SocMetrics>,
    pub robustness: Option<RobustnessSummary>,
    pub annual: Option<Vec<YearExtremes>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn column(records: &[Record], f: impl Fn(&Record) -> f64) -> Vec<f64> {
    records.iter().map(f).collect()
}

/// Largest relative departure from the first value, NaN entries skipped.
fn relative_drift(values: &[f64]) -> Option<f64> {
    let v0 = *values.first()?;
    if !v0.is_finite() || v0 == 0.0 {
        return None;
    }
    values.iter().filter(|v| v.is_finite()).map(|v| ((v - v0) / v0).abs()).reduce(f64::max)
}

fn max_finite(values: &[f64]) -> Option<f64> {
    values.iter().copied().filter(|v| v.is_finite()).reduce(f64::max)
}

impl Metrics {
    pub fn from_records(model: Model, mode: Mode, records: &[Record]) -> Self {
        let t = column(records, |r| r.time);
        let t0 = t.first().copied().unwrap_or(0.0);
        let t_end = t.last().copied().unwrap_or(0.0);

        let (error_metric, err) = match (model, mode) {
            (_, Mode::Simulate) => (None, Vec::new()),
            (Model::Stefan, _) => (Some("h1_error"), column(records, |r| r.h1_error)),
            (Model::Seaice, _) => (Some("l2_error"), column(records, |r| r.l2_error)),
            (Model::Battery, _) => (Some("soc_error"), column(records, |r| 100.0 * (r.soc_est - r.soc).abs())),
        };

        let mut channels = BTreeMap::new();
        if mode.is_estimator() {
            channels.insert("interface".to_string(), time_to_fraction(&t, &column(records, |r| (r.interface - r.interface_est).abs()), 0.5));
            if model != Model::Battery {
                for k in 0..4 {
                    let e = column(records, |r| (r.probes()[k] - r.probes_est()[k]).abs());
                    channels.insert(format!("probe_{k}"), time_to_fraction(&t, &e, 0.5));
                }
            }
        }

        let drift = [relative_drift(&column(records, |r| r.invariant)), relative_drift(&column(records, |r| r.invariant_est))]
            .into_iter()
            .flatten()
            .reduce(f64::max);

        let soc = (model == Model::Battery && mode.is_estimator()).then(|| {
            let t_mid = t0 + 0.5 * (t_end - t0);
            let iface = column(records, |r| (r.interface - r.interface_est).abs());
            SocMetrics {
                initial_error: err.first().copied().and_then(finite),
                final_error: err.last().copied().and_then(finite),
                convergence_time: settling_time(&t, &err, 1.0),
                first_within_1pt: t.iter().zip(&err).find(|(_, e)| **e <= 1.0).map(|(t, _)| *t),
                tail_variance: tail_variance(&t, &column(records, |r| r.soc_est - r.soc), t_mid),
                interface_convergence_time: settling_time(&t, &iface, 0.01),
            }
        });

        let robustness = (mode == Mode::Robustness).then(|| {
            let e = column(records, |r| r.interface - r.interface_est);
            let settle_after = t0 + SETTLE_DAYS * DAY_SECONDS;
            let peak = peak_before(&t, &e, settle_after);
            let band = band_after(&t, &e, settle_after);
            let last = e.last().copied().unwrap_or(0.0);
            let dev: Vec<f64> = e.iter().map(|v| (v - last).abs()).collect();
            RobustnessSummary {
                peak,
                band,
                band_over_peak: peak.zip(band).map(|(p, b)| b / p),
                settling_day: peak.and_then(|p| settling_time(&t, &dev, 0.1 * p)).map(|s| (s - t0) / DAY_SECONDS),
            }
        });

        let annual = (model == Model::Seaice && mode == Mode::Simulate).then(|| {
            let mut years: Vec<YearExtremes> = Vec::new();
            for r in records {
                // A sample on a year boundary closes the year before it.
                let year = ((r.time - t0) / YEAR_SECONDS).ceil().max(1.0) as usize - 1;
                match years.last_mut() {
                    Some(y) if y.year == year => {
                        y.max_thickness = y.max_thickness.max(r.interface);
                        y.min_thickness = y.min_thickness.min(r.interface);
                    }
                    _ => years.push(YearExtremes { year, max_thickness: r.interface, min_thickness: r.interface }),
                }
            }
            years
        });

        Self {
            samples: records.len(),
            final_time: t.last().copied(),
            error_metric: error_metric.map(str::to_string),
            initial_error: err.first().copied().and_then(finite),
            final_error: err.last().copied().and_then(finite),
            time_to_50pct: time_to_fraction(&t, &err, 0.5),
            time_to_10pct: time_to_fraction(&t, &err, 0.1),
            first_time_to_5pct: first_time_below(&t, &err, 0.05),
            decay_rate: tail_decay_rate(&t, &err).and_then(finite),
            channel_time_to_50pct: channels,
            conservation_drift: drift,
            overshoot: max_finite(&column(records, |r| r.overshoot)),
            valid_fraction: if records.is_empty() {
                1.0
            } else {
                records.iter().filter(|r| r.valid).count() as f64 / records.len() as f64
            },
            final_interface: records.last().and_then(|r| finite(r.interface)),
            soc,
            robustness,
            annual,
        }
    }

    /// Scalar metrics by name, for side-by-side comparison.
    pub fn headline(&self) -> Vec<(String, Option<f64>)> {
        let mut out = vec![
            ("initial_error".to_string(), self.initial_error),
            ("final_error".to_string(), self.final_error),
            ("time_to_50pct".to_string(), self.time_to_50pct),
            ("time_to_10pct".to_string(), self.time_to_10pct),
            ("first_time_to_5pct".to_string(), self.first_time_to_5pct),
            ("decay_rate".to_string(), self.decay_rate),
        ];
        for (k, v) in &self.channel_time_to_50pct {
            out.push((format!("{k}_time_to_50pct"), *v));
        }
        out.push(("conservation_drift".into(), self.conservation_drift));
        out.push(("overshoot".into(), self.overshoot));
        out.push(("final_interface".into(), self.final_interface));
        if let Some(s) = &self.soc {
            out.push(("soc_convergence_time".into(), s.convergence_time));
            out.push(("soc_first_within_1pt".into(), s.first_within_1pt));
            out.push(("soc_tail_variance".into(), s.tail_variance));
            out.push(("interface_convergence_time".into(), s.interface_convergence_time));
        }
        if let Some(r) = &self.robustness {
            out.push(("robustness_peak".into(), r.peak));
            out.push(("robustness_band".into(), r.band));
            out.push(("settling_day".into(), r.settling_day));
        }
        out
    }
}

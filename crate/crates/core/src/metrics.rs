//! Scalar diagnostics on sampled error traces.

use serde::{Deserialize, Serialize};

/// First sample time after which `values` stay at or below `threshold`.
pub fn settling_time(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let mut candidate = None;
    for (t, v) in times.iter().zip(values) {
        if v.is_nan() || *v > threshold {
            candidate = None;
        } else if candidate.is_none() {
            candidate = Some(*t);
        }
    }
    candidate
}

/// Settling time to `fraction` of the first value.
pub fn time_to_fraction(times: &[f64], values: &[f64], fraction: f64) -> Option<f64> {
    let first = *values.first()?;
    settling_time(times, values, fraction * first.abs())
}

/// First sample time at which `values` drop to `fraction` of the first value,
/// whether or not they stay there.
pub fn first_time_below(times: &[f64], values: &[f64], fraction: f64) -> Option<f64> {
    let level = fraction * values.first()?.abs();
    times.iter().zip(values).find(|(_, v)| **v <= level).map(|(t, _)| *t)
}

/// Relative level below which trace values are treated as round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Least-squares exponential rate fitted to the second half of a positive trace.
/// Returns `r` such that `values ~ C exp(-r t)`. Values below
/// [`ROUNDOFF_FLOOR`] times the trace maximum are skipped.
pub fn tail_decay_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let n = times.len().min(values.len());
    if n < 4 {
        return None;
    }
    let t_mid = 0.5 * (times[0] + times[n - 1]);
    // Samples at the round-off floor carry no rate information.
    let floor = ROUNDOFF_FLOOR * values[..n].iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = times[..n]
        .iter()
        .zip(&values[..n])
        .filter(|(t, v)| **t >= t_mid && **v > floor && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Largest absolute value at or after `t_from`.
pub fn band_after(times: &[f64], values: &[f64], t_from: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_from)
        .map(|(_, v)| v.abs())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Largest absolute value before `t_until`.
pub fn peak_before(times: &[f64], values: &[f64], t_until: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t < t_until)
        .map(|(_, v)| v.abs())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Sample variance of `values` over `t >= t_from`, about their mean.
pub fn tail_variance(times: &[f64], values: &[f64], t_from: f64) -> Option<f64> {
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_from)
        .map(|(_, v)| *v)
        .collect();
    if tail.len() < 2 {
        return None;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    Some(tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (tail.len() - 1) as f64)
}

/// Headline numbers for an error trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub initial: f64,
    pub final_value: f64,
    pub time_to_50pct: Option<f64>,
    pub time_to_10pct: Option<f64>,
    pub tail_decay_rate: Option<f64>,
}

impl ConvergenceSummary {
    pub fn from_trace(times: &[f64], values: &[f64]) -> Self {
        Self {
            initial: values.first().copied().unwrap_or(f64::NAN),
            final_value: values.last().copied().unwrap_or(f64::NAN),
            time_to_50pct: time_to_fraction(times, values, 0.5),
            time_to_10pct: time_to_fraction(times, values, 0.1),
            tail_decay_rate: tail_decay_rate(times, values),
        }
    }
}

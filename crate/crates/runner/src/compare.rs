//! Side-by-side metrics of two finished runs.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RunnerError;
use crate::records::read_records;
use crate::summary::{Metrics, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `b - a` when both exist.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub run_a: String,
    pub run_b: String,
    pub rows: Vec<ComparisonRow>,
}

/// Metrics of a run directory, re-derived from its records.
pub fn run_metrics(dir: &Path) -> Result<(Summary, Metrics), RunnerError> {
    let summary = Summary::read(&dir.join("summary.json"))?;
    let records = read_records(&dir.join("records.csv"))?;
    let metrics = Metrics::from_records(summary.model, summary.mode, &records);
    Ok((summary, metrics))
}

pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<Comparison, RunnerError> {
    let (sa, ma) = run_metrics(dir_a)?;
    let (sb, mb) = run_metrics(dir_b)?;
    if sa.model != sb.model {
        return Err(RunnerError::Records(format!("cannot compare a {} run with a {} run", sa.model.name(), sb.model.name())));
    }
    let hb = mb.headline();
    let rows = ma
        .headline()
        .into_iter()
        .map(|(metric, a)| {
            let b = hb.iter().find(|(m, _)| *m == metric).and_then(|(_, v)| *v);
            ComparisonRow { delta: a.zip(b).map(|(a, b)| b - a), metric, a, b }
        })
        .collect();
    Ok(Comparison { run_a: dir_a.display().to_string(), run_b: dir_b.display().to_string(), rows })
}

impl Comparison {
    /// Plain-text table.
    pub fn table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        let mut out = format!("a: {}\nb: {}\n{:<28} {:>14} {:>14} {:>14}\n", self.run_a, self.run_b, "metric", "a", "b", "b - a");
        for r in &self.rows {
            let _ = writeln!(out, "{:<28} {:>14} {:>14} {:>14}", r.metric, cell(r.a), cell(r.b), cell(r.delta));
        }
        out
    }
}

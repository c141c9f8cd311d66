//! Fixed-schema CSV output. Every run writes the same columns; quantities a
//! model does not have are `nan`.
//!
//! | column | stefan | seaice | battery |
//! |---|---|---|---|
//! | `interface`, `interface_est` | `s`, m | ice thickness, m | `r_p / R_p+` |
//! | `snow_depth` | | snow depth, m | |
//! | `probe_k`, `probe_est_k` | `T` at `k s/4`, K | ice `T` at depth `k H/4`, C | |
//! | `l2_error` | profile L2 error | profile L2 error | `(int r^2 (c - c_hat)^2 dr)^{1/2}` |
//! | `h1_error` | profile H1 error | | |
//! | `soc`, `soc_est` | | | positive-electrode SoC |
//! | `invariant`, `invariant_est` | `E - int q/k` | | lithium total, mol/m^2 |
//! | `voltage` | | | terminal voltage, V |
//! | `overshoot` | | `max(T_hat - T)`, C | |
//! | `valid` | sign condition held | | |

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RunnerError;

pub const RECORDS_HEADER: &str = "# phasefront-records v1";
pub const PROFILES_HEADER: &str = "# phasefront-profiles v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub time: f64,
    pub interface: f64,
    pub interface_est: f64,
    pub snow_depth: f64,
    pub probe_0: f64,
    pub probe_1: f64,
    pub probe_2: f64,
    pub probe_3: f64,
    pub probe_est_0: f64,
    pub probe_est_1: f64,
    pub probe_est_2: f64,
    pub probe_est_3: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub soc: f64,
    pub soc_est: f64,
    pub invariant: f64,
    pub invariant_est: f64,
    pub voltage: f64,
    pub overshoot: f64,
    pub valid: bool,
}

impl Record {
    /// All quantities `nan`, valid.
    pub fn at(time: f64) -> Self {
        let nan = f64::NAN;
        Self {
            time,
            interface: nan,
            interface_est: nan,
            snow_depth: nan,
            probe_0: nan,
            probe_1: nan,
            probe_2: nan,
            probe_3: nan,
            probe_est_0: nan,
            probe_est_1: nan,
            probe_est_2: nan,
            probe_est_3: nan,
            l2_error: nan,
            h1_error: nan,
            soc: nan,
            soc_est: nan,
            invariant: nan,
            invariant_est: nan,
            voltage: nan,
            overshoot: nan,
            valid: true,
        }
    }

    pub fn set_probes(&mut self, truth: [f64; 4], est: [f64; 4]) {
        [self.probe_0, self.probe_1, self.probe_2, self.probe_3] = truth;
        [self.probe_est_0, self.probe_est_1, self.probe_est_2, self.probe_est_3] = est;
    }

    pub fn probes(&self) -> [f64; 4] {
        [self.probe_0, self.probe_1, self.probe_2, self.probe_3]
    }

    pub fn probes_est(&self) -> [f64; 4] {
        [self.probe_est_0, self.probe_est_1, self.probe_est_2, self.probe_est_3]
    }
}

/// One profile value pair: `position` is the normalised coordinate of the
/// model (`x/s`, depth over `H`, or `r/R_p+`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub time: f64,
    pub position: f64,
    pub truth: f64,
    pub estimate: f64,
}

/// Shortest round-trip decimal, `nan` for NaN.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io(format!("{}: {e}", path.display()))
}

/// Writes the versioned header line followed by the CSV table.
fn write_table<W: Write>(mut out: W, header: &str, columns: &[&str], rows: impl Iterator<Item = Vec<String>>) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

const RECORD_COLUMNS: [&str; 21] = [
    "time",
    "interface",
    "interface_est",
    "snow_depth",
    "probe_0",
    "probe_1",
    "probe_2",
    "probe_3",
    "probe_est_0",
    "probe_est_1",
    "probe_est_2",
    "probe_est_3",
    "l2_error",
    "h1_error",
    "soc",
    "soc_est",
    "invariant",
    "invariant_est",
    "voltage",
    "overshoot",
    "valid",
];

fn record_row(r: &Record) -> Vec<String> {
    let mut row: Vec<String> = [
        r.time,
        r.interface,
        r.interface_est,
        r.snow_depth,
        r.probe_0,
        r.probe_1,
        r.probe_2,
        r.probe_3,
        r.probe_est_0,
        r.probe_est_1,
        r.probe_est_2,
        r.probe_est_3,
        r.l2_error,
        r.h1_error,
        r.soc,
        r.soc_est,
        r.invariant,
        r.invariant_est,
        r.voltage,
        r.overshoot,
    ]
    .iter()
    .map(|v| fmt(*v))
    .collect();
    row.push(r.valid.to_string());
    row
}

pub fn write_records_to<W: Write>(out: W, records: &[Record]) -> std::io::Result<()> {
    write_table(out, RECORDS_HEADER, &RECORD_COLUMNS, records.iter().map(record_row))
}

pub fn write_records(path: &Path, records: &[Record]) -> Result<(), RunnerError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_records_to(std::io::BufWriter::new(file), records).map_err(|e| io_err(path, e))
}

pub fn write_profiles(path: &Path, points: &[ProfilePoint]) -> Result<(), RunnerError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let rows = points.iter().map(|p| vec![fmt(p.time), fmt(p.position), fmt(p.truth), fmt(p.estimate)]);
    write_table(std::io::BufWriter::new(file), PROFILES_HEADER, &["time", "position", "truth", "estimate"], rows)
        .map_err(|e| io_err(path, e))
}

/// Checks the header line and returns the remaining reader.
fn expect_header<R: Read>(reader: R, header: &str) -> Result<BufReader<R>, RunnerError> {
    let mut buf = BufReader::new(reader);
    let mut first = String::new();
    buf.read_line(&mut first).map_err(|e| RunnerError::Records(e.to_string()))?;
    if first.trim_end() != header {
        return Err(RunnerError::Records(format!("expected header `{header}`, found `{}`", first.trim_end())));
    }
    Ok(buf)
}

pub fn read_records_from<R: Read>(reader: R) -> Result<Vec<Record>, RunnerError> {
    let buf = expect_header(reader, RECORDS_HEADER)?;
    let mut rdr = csv::Reader::from_reader(buf);
    let records: Vec<Record> = rdr.deserialize().collect::<Result<_, _>>().map_err(|e| RunnerError::Records(e.to_string()))?;
    if records.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(RunnerError::Records("time column is not increasing".into()));
    }
    Ok(records)
}

pub fn read_records(path: &Path) -> Result<Vec<Record>, RunnerError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_records_from(file)
}

pub fn read_profiles(path: &Path) -> Result<Vec<ProfilePoint>, RunnerError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let buf = expect_header(file, PROFILES_HEADER)?;
    csv::Reader::from_reader(buf).deserialize().collect::<Result<_, _>>().map_err(|e| RunnerError::Records(e.to_string()))
}

/// Every `stride`-th element plus the last one.
pub fn thin<T: Clone>(items: &[T], stride: usize) -> Vec<T> {
    let n = items.len();
    items.iter().enumerate().filter(|(i, _)| i % stride == 0 || i + 1 == n).map(|(_, v)| v.clone()).collect()
}

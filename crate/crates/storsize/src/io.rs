//! File formats: time-series CSV, scenario descriptors and dispatch output.
//!
//! A scenario on disk is a JSON descriptor naming two CSV files (relative
//! paths resolve against the descriptor's directory):
//!
//! ```json
//! {"t0": 0.0, "dt": 1.0, "pv_csv": "pv.csv", "load_csv": "load.csv",
//!  "tariff": [{"start_hour": 0.0, "price_dollars_per_wh": 6.1e-5}],
//!  "params": {"eta_pv": 0.9, "eta_b": 0.9, "z": 3e-4, "k": 0.15,
//!             "t_c_hours": 12.0, "d_watts": 800.0}}
//! ```
//!
//! Each CSV has the header `t_hours,value` and one row per sample.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use storsize_core::dispatch::DispatchSolution;
use storsize_core::scenario::{Scenario, ScenarioError, SystemParams, Tariff, TariffSegment, TimeSeries};
use thiserror::Error;

use crate::json;

pub const SERIES_HEADER: [&str; 2] = ["t_hours", "value"];

pub const DISPATCH_HEADER: [&str; 7] =
    ["t_hours", "u_watts", "p_b_watts", "e_b_wh", "delta_c_wh", "p_g_watts", "price_dollars_per_wh"];

pub const TRACE_HEADER: [&str; 2] = ["c_ref_wh", "j_dollars"];

/// Relative tolerance when checking that sample times are uniform.
const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("scenario: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario: {path}: expected header {expected:?}, found {found:?}")]
    MalformedHeader { path: PathBuf, expected: Vec<String>, found: Vec<String> },
    #[error("scenario: {path}: row {row}: {message}")]
    BadRow { path: PathBuf, row: usize, message: String },
    #[error("scenario: pv has {pv} samples but load has {load}")]
    LengthMismatch { pv: usize, load: usize },
    #[error("scenario: dt must be positive and finite, got {0} h")]
    NonPositiveDt(f64),
    #[error("scenario: {path}: row {row} has t = {found} h, expected {expected} h (samples must be uniform from t0 with step dt)")]
    NonUniformTime { path: PathBuf, row: usize, expected: f64, found: f64 },
    #[error("scenario: {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("scenario: {0}")]
    Invalid(#[from] ScenarioError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Raw `(t, value)` rows of a series CSV.
pub fn read_series_rows(reader: impl Read, path: &Path) -> Result<Vec<(f64, f64)>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_row_err(path, 0, e))?.clone();
    let found: Vec<String> = header.iter().map(str::to_owned).collect();
    if found != SERIES_HEADER {
        return Err(IoError::MalformedHeader {
            path: path.to_path_buf(),
            expected: SERIES_HEADER.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_row_err(path, row, e))?;
        if rec.len() != 2 {
            return Err(IoError::BadRow { path: path.to_path_buf(), row, message: format!("expected 2 fields, found {}", rec.len()) });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| IoError::BadRow { path: path.to_path_buf(), row, message: format!("{s:?}: {e}") })
        };
        rows.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(rows)
}

fn csv_row_err(path: &Path, row: usize, e: csv::Error) -> IoError {
    IoError::BadRow { path: path.to_path_buf(), row, message: e.to_string() }
}

/// Checks the time column against `t0 + k·dt` and builds the series.
pub fn series_from_rows(rows: &[(f64, f64)], t0: f64, dt: f64, path: &Path) -> Result<TimeSeries, IoError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IoError::NonPositiveDt(dt));
    }
    for (k, &(t, _)) in rows.iter().enumerate() {
        let expected = t0 + k as f64 * dt;
        if (t - expected).abs() > TIME_TOL * expected.abs().max(1.0) {
            return Err(IoError::NonUniformTime { path: path.to_path_buf(), row: k + 1, expected, found: t });
        }
    }
    Ok(TimeSeries::new(t0, dt, rows.iter().map(|r| r.1).collect())?)
}

pub fn read_series_csv(path: &Path, t0: f64, dt: f64) -> Result<TimeSeries, IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    series_from_rows(&read_series_rows(file, path)?, t0, dt, path)
}

pub fn write_series_csv(series: &TimeSeries, path: &Path) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e: csv::Error| csv_row_err(path, 0, e);
    w.write_record(SERIES_HEADER).map_err(wrap)?;
    for (k, v) in series.values().iter().enumerate() {
        w.write_record([series.time_at(k).to_string(), v.to_string()]).map_err(|e| csv_row_err(path, k + 1, e))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffEntry {
    pub start_hour: f64,
    pub price_dollars_per_wh: f64,
    /// Defaults to the next block's start, or 24 for the last block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_hour: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsEntry {
    pub eta_pv: f64,
    pub eta_b: f64,
    pub z: f64,
    pub k: f64,
    pub t_c_hours: f64,
    pub d_watts: f64,
}

impl From<SystemParams> for ParamsEntry {
    fn from(p: SystemParams) -> Self {
        Self { eta_pv: p.eta_pv, eta_b: p.eta_b, z: p.z, k: p.k, t_c_hours: p.t_c, d_watts: p.d }
    }
}

impl From<ParamsEntry> for SystemParams {
    fn from(p: ParamsEntry) -> Self {
        Self { eta_pv: p.eta_pv, eta_b: p.eta_b, z: p.z, k: p.k, t_c: p.t_c_hours, d: p.d_watts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescriptor {
    pub t0: f64,
    pub dt: f64,
    pub pv_csv: PathBuf,
    pub load_csv: PathBuf,
    pub tariff: Vec<TariffEntry>,
    pub params: ParamsEntry,
}

pub fn tariff_from_entries(entries: &[TariffEntry]) -> Result<Tariff, IoError> {
    let mut sorted = entries.to_vec();
    sorted.sort_by(|a, b| a.start_hour.total_cmp(&b.start_hour));
    let segments = sorted
        .iter()
        .enumerate()
        .map(|(i, e)| TariffSegment {
            start_hour: e.start_hour,
            end_hour: e.end_hour.unwrap_or_else(|| sorted.get(i + 1).map_or(24.0, |n| n.start_hour)),
            price: e.price_dollars_per_wh,
        })
        .collect();
    Ok(Tariff::new(segments)?)
}

pub fn tariff_entries(tariff: &Tariff) -> Vec<TariffEntry> {
    tariff
        .segments()
        .iter()
        .map(|s| TariffEntry { start_hour: s.start_hour, price_dollars_per_wh: s.price, end_hour: Some(s.end_hour) })
        .collect()
}

pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let desc: ScenarioDescriptor =
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    if !(desc.dt > 0.0 && desc.dt.is_finite()) {
        return Err(IoError::NonPositiveDt(desc.dt));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let pv_path = base.join(&desc.pv_csv);
    let load_path = base.join(&desc.load_csv);
    let pv_rows = read_series_rows(fs::File::open(&pv_path).map_err(io_err(&pv_path))?, &pv_path)?;
    let load_rows = read_series_rows(fs::File::open(&load_path).map_err(io_err(&load_path))?, &load_path)?;
    if pv_rows.len() != load_rows.len() {
        return Err(IoError::LengthMismatch { pv: pv_rows.len(), load: load_rows.len() });
    }
    let pv = series_from_rows(&pv_rows, desc.t0, desc.dt, &pv_path)?;
    let load = series_from_rows(&load_rows, desc.t0, desc.dt, &load_path)?;
    let tariff = tariff_from_entries(&desc.tariff)?;
    Ok(Scenario::new(pv, load, tariff, desc.params.into())?)
}

/// Writes `<stem>.json`, `<stem>_pv.csv` and `<stem>_load.csv` into `dir`
/// and returns the descriptor path.
pub fn save_scenario(scenario: &Scenario, dir: &Path, stem: &str) -> Result<PathBuf, IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let pv_name = format!("{stem}_pv.csv");
    let load_name = format!("{stem}_load.csv");
    write_series_csv(scenario.pv(), &dir.join(&pv_name))?;
    write_series_csv(scenario.load(), &dir.join(&load_name))?;
    let desc = ScenarioDescriptor {
        t0: scenario.t0(),
        dt: scenario.dt(),
        pv_csv: pv_name.into(),
        load_csv: load_name.into(),
        tariff: tariff_entries(scenario.tariff()),
        params: (*scenario.params()).into(),
    };
    let path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&desc).map_err(|source| IoError::Json { path: path.clone(), source })?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

/// One dispatch CSV row. Energy and lost capacity are the values at the
/// end of the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchRow {
    pub t_hours: f64,
    pub u_watts: f64,
    pub p_b_watts: f64,
    pub e_b_wh: f64,
    pub delta_c_wh: f64,
    pub p_g_watts: f64,
    pub price_dollars_per_wh: f64,
}

pub fn dispatch_rows(scenario: &Scenario, sol: &DispatchSolution) -> Vec<DispatchRow> {
    (0..sol.u.len())
        .map(|k| DispatchRow {
            t_hours: scenario.time_at(k),
            u_watts: sol.u[k],
            p_b_watts: sol.p_b[k],
            e_b_wh: sol.e_b[k + 1],
            delta_c_wh: sol.delta_c[k + 1],
            p_g_watts: sol.p_g[k],
            price_dollars_per_wh: scenario.price(k),
        })
        .collect()
}

/// Scalar part of a dispatch solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSummary {
    pub c_ref: f64,
    pub j: f64,
    pub j_max: f64,
    pub j_plus: f64,
    pub j_minus: f64,
    pub complementarity_max: f64,
    pub solver_stats: storsize_core::dispatch::SolverStats,
}

impl From<&DispatchSolution> for DispatchSummary {
    fn from(s: &DispatchSolution) -> Self {
        Self {
            c_ref: s.c_ref,
            j: s.j,
            j_max: s.j_max,
            j_plus: s.j_plus,
            j_minus: s.j_minus,
            complementarity_max: s.complementarity_max,
            solver_stats: s.solver_stats,
        }
    }
}

pub fn write_dispatch_csv(rows: &[DispatchRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `dispatch.csv` and `dispatch_summary.json` into `dir`.
pub fn save_dispatch(scenario: &Scenario, sol: &DispatchSolution, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("dispatch.csv");
    let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_dispatch_csv(&dispatch_rows(scenario, sol), file).map_err(|e| csv_row_err(&csv_path, 0, e))?;
    let json_path = dir.join("dispatch_summary.json");
    fs::write(&json_path, json::to_string(&DispatchSummary::from(sol)) + "\n").map_err(io_err(&json_path))
}

pub fn load_dispatch_csv(path: &Path) -> Result<Vec<DispatchRow>, IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let found: Vec<String> = rdr.headers().map_err(|e| csv_row_err(path, 0, e))?.iter().map(str::to_owned).collect();
    if found != DISPATCH_HEADER {
        return Err(IoError::MalformedHeader {
            path: path.to_path_buf(),
            expected: DISPATCH_HEADER.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    rdr.deserialize().enumerate().map(|(i, r)| r.map_err(|e| csv_row_err(path, i + 1, e))).collect()
}

pub fn write_trace_csv(trace: &[(f64, f64)], path: &Path) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(TRACE_HEADER).map_err(|e| csv_row_err(path, 0, e))?;
    for (i, (c, j)) in trace.iter().enumerate() {
        w.write_record([c.to_string(), j.to_string()]).map_err(|e| csv_row_err(path, i + 1, e))?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_must_match() {
        let err = read_series_rows("time,value\n0,1\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, IoError::MalformedHeader { .. }));
    }

    #[test]
    fn rows_parse_and_validate_grid() {
        let rows = read_series_rows("t_hours,value\n0,1.5\n0.5,2\n1.0,3\n".as_bytes(), Path::new("x.csv")).unwrap();
        let s = series_from_rows(&rows, 0.0, 0.5, Path::new("x.csv")).unwrap();
        assert_eq!(s.values(), &[1.5, 2.0, 3.0]);
        let err = series_from_rows(&rows, 0.0, 1.0, Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, IoError::NonUniformTime { row: 2, .. }));
        assert!(matches!(series_from_rows(&rows, 0.0, 0.0, Path::new("x.csv")), Err(IoError::NonPositiveDt(_))));
    }

    #[test]
    fn bad_number_names_row() {
        let err = read_series_rows("t_hours,value\n0,1\n1,abc\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, IoError::BadRow { row: 2, .. }));
    }

    #[test]
    fn missing_last_block_is_a_gap() {
        let entries = vec![
            TariffEntry { start_hour: 0.0, price_dollars_per_wh: 6.1e-5, end_hour: None },
            TariffEntry { start_hour: 11.0, price_dollars_per_wh: 16.5e-5, end_hour: None },
            TariffEntry { start_hour: 18.0, price_dollars_per_wh: 7.8e-5, end_hour: Some(22.0) },
        ];
        match tariff_from_entries(&entries) {
            Err(IoError::Invalid(ScenarioError::TariffGap { from, to })) => assert_eq!((from, to), (22.0, 24.0)),
            other => panic!("{other:?}"),
        }
    }
}

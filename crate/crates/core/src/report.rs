// SPDX-License-Identifier: Apache-2.0

//! CSV reports written after a run.
//!
//! | report         | file               | columns |
//! |----------------|--------------------|---------|
//! | `trace`        | `trace.csv`        | [`crate::sim::trace::COLUMNS`] |
//! | `lag-matrix`   | `lag_matrix.csv`   | [`LAG_COLUMNS`] |
//! | `idle-tail`    | `idle_tail.csv`    | [`IDLE_TAIL_COLUMNS`] |
//! | `mark-spacing` | `mark_spacing.csv` | [`MARK_SPACING_COLUMNS`] |
//! | `error-stats`  | `error_stats.csv`  | [`ERROR_STATS_COLUMNS`] |
//!
//! Numbers use `.` as the decimal point and no grouping; every file ends
//! with a newline, and an empty result still gets its header row.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::aqm::{Algorithm, AqmConfig, PiConfig};
use crate::estimators::Estimator;
use crate::sim::analysis::{self, IdleTail, LagMatrix};
use crate::sim::{self, RunOutput, Scenario, ScenarioError};
use crate::units::{ms, Nanos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Report {
    Trace,
    LagMatrix,
    IdleTail,
    MarkSpacing,
    ErrorStats,
}

impl Report {
    pub const ALL: [Report; 5] = [
        Report::Trace,
        Report::LagMatrix,
        Report::IdleTail,
        Report::MarkSpacing,
        Report::ErrorStats,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Report::Trace => "trace",
            Report::LagMatrix => "lag-matrix",
            Report::IdleTail => "idle-tail",
            Report::MarkSpacing => "mark-spacing",
            Report::ErrorStats => "error-stats",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Report::Trace => "trace.csv",
            Report::LagMatrix => "lag_matrix.csv",
            Report::IdleTail => "idle_tail.csv",
            Report::MarkSpacing => "mark_spacing.csv",
            Report::ErrorStats => "error_stats.csv",
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Report {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Report::ALL
            .into_iter()
            .find(|r| r.key() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Report::ALL.iter().map(|r| r.key()).collect();
                format!("unknown report `{s}` (expected {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub reports: Vec<Report>,
    /// Threshold for the lag matrix.
    pub lag_threshold: Nanos,
    /// Start of the overload for the lag matrix.
    pub lag_onset: Nanos,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            reports: vec![Report::Trace],
            lag_threshold: ms(20),
            lag_onset: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("idle-tail rerun: {0}")]
    Scenario(#[from] ScenarioError),
}

/// What [`emit_reports`] produced.
#[derive(Debug, Clone, Default)]
pub struct Emitted {
    pub files: Vec<PathBuf>,
    /// Aligned text rendering of the lag matrix, when requested.
    pub lag_table: Option<String>,
}

pub const LAG_COLUMNS: [&str; 12] = [
    "applied_at",
    "estimator",
    "lag_ns",
    "t_oracle",
    "t_detect",
    "t_signal",
    "sojourn_ns",
    "drain_window_ns",
    "expected_ns",
    "ratio",
    "lag_in_sojourns",
    "error",
];

pub const IDLE_TAIL_COLUMNS: [&str; 8] = [
    "estimator",
    "burst_heuristic",
    "last_arrival",
    "tail_packets",
    "tail_signals",
    "crossing",
    "signals_after_crossing",
    "target",
];

pub const MARK_SPACING_COLUMNS: [&str; 5] = ["flow", "packets", "signals", "mean_gap", "gap_variance"];

pub const ERROR_STATS_COLUMNS: [&str; 6] = [
    "estimator",
    "samples",
    "excluded",
    "mean_error_ns",
    "rms_error_ns",
    "max_abs_error_ns",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

struct Csv {
    path: PathBuf,
    w: csv::Writer<BufWriter<File>>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, ReportError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| ReportError::Io {
            path: path.clone(),
            source,
        })?;
        let mut c = Csv {
            w: csv::Writer::from_writer(BufWriter::new(file)),
            path,
        };
        c.row(header)?;
        Ok(c)
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), ReportError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let path = &self.path;
        self.w.write_record(fields).map_err(|source| ReportError::Csv {
            path: path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<PathBuf, ReportError> {
        self.w.flush().map_err(|source| ReportError::Io {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

/// Writes the requested reports for `out` into `dir`, which must exist.
/// The idle-tail report reruns `sc` four times with a PI controller.
pub fn emit_reports(
    sc: &Scenario,
    out: &RunOutput,
    opts: &ReportOptions,
    dir: &Path,
) -> Result<Emitted, ReportError> {
    let mut emitted = Emitted::default();
    for &report in &opts.reports {
        let path = match report {
            Report::Trace => write_trace(out, dir)?,
            Report::LagMatrix => {
                let m = analysis::lag_matrix(&out.records, opts.lag_threshold, opts.lag_onset);
                emitted.lag_table = Some(render_lag_table(&m));
                write_lag_matrix(&m, dir)?
            }
            Report::IdleTail => write_idle_tail(&idle_tail_runs(sc)?, dir)?,
            Report::MarkSpacing => write_mark_spacing(out, dir)?,
            Report::ErrorStats => write_error_stats(out, dir)?,
        };
        emitted.files.push(path);
    }
    Ok(emitted)
}

fn write_trace(out: &RunOutput, dir: &Path) -> Result<PathBuf, ReportError> {
    let path = dir.join(Report::Trace.file_name());
    let file = File::create(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    sim::write_csv(&out.records, BufWriter::new(file)).map_err(|source| ReportError::Csv {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_lag_matrix(m: &LagMatrix, dir: &Path) -> Result<PathBuf, ReportError> {
    let mut c = Csv::create(dir, Report::LagMatrix.file_name(), &LAG_COLUMNS)?;
    for cell in &m.cells {
        let head = [cell.point.key().to_string(), cell.estimator.key().to_string()];
        let rest: Vec<String> = match &cell.measured {
            Ok(l) => vec![
                l.lag.to_string(),
                l.t_oracle.to_string(),
                l.t_detect.to_string(),
                l.t_signal.to_string(),
                l.sojourn.to_string(),
                opt(l.drain_window),
                opt(cell.expected()),
                opt(cell.ratio()),
                opt(cell.in_sojourns()),
                String::new(),
            ],
            Err(e) => {
                let mut v = vec![String::new(); 9];
                v.push(e.to_string());
                v
            }
        };
        c.row(head.into_iter().chain(rest))?;
    }
    c.finish()
}

/// Lag matrix as an aligned table: one row per application point, one
/// column per technique, each cell `lag (ratio to the idealized value)`.
pub fn render_lag_table(m: &LagMatrix) -> String {
    let header: Vec<String> = std::iter::once(String::new())
        .chain(analysis::LAG_ESTIMATORS.iter().map(|e| e.key().to_string()))
        .collect();
    let mut rows = vec![header];
    for point in [crate::aqm::ApplyPoint::Enqueue, crate::aqm::ApplyPoint::Dequeue] {
        let mut row = vec![format!("at {}", point.key())];
        for est in analysis::LAG_ESTIMATORS {
            let cell = m.cell(point, est).expect("full matrix");
            row.push(match (&cell.measured, cell.ratio()) {
                (Ok(l), Some(r)) => format!("{:.3} ms (x{:.2})", l.lag as f64 / 1e6, r),
                (Ok(l), None) => format!("{:.3} ms", l.lag as f64 / 1e6),
                (Err(_), _) => "n/a".to_string(),
            });
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut s = format!("lag matrix (threshold {} ms)\n", m.threshold as f64 / 1e6);
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    s
}

/// One idle-tail rerun.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleTailRun {
    pub estimator: Estimator,
    pub burst_heuristic: bool,
    pub target: Nanos,
    pub tail: Option<IdleTail>,
}

/// Reruns `sc` under PI control for raw and scaled sojourn, each with the
/// half-target heuristic on and off. PI settings come from the scenario when
/// it uses PI, otherwise the defaults.
pub fn idle_tail_runs(sc: &Scenario) -> Result<Vec<IdleTailRun>, ScenarioError> {
    let base = match sc.aqm.algorithm {
        Algorithm::Pi(p) => p,
        _ => PiConfig::default(),
    };
    let mut runs = Vec::with_capacity(4);
    for estimator in [Estimator::RawSojourn, Estimator::ScaledExact] {
        for burst_heuristic in [false, true] {
            let mut variant = sc.clone();
            variant.estimator = estimator;
            variant.aqm = AqmConfig {
                algorithm: Algorithm::Pi(PiConfig {
                    burst_heuristic,
                    ..base
                }),
                ..sc.aqm
            };
            let out = sim::run(&variant)?;
            runs.push(IdleTailRun {
                estimator,
                burst_heuristic,
                target: base.target,
                tail: analysis::idle_tail(&out.records, out.stats.last_arrival, estimator, base.target),
            });
        }
    }
    Ok(runs)
}

fn write_idle_tail(runs: &[IdleTailRun], dir: &Path) -> Result<PathBuf, ReportError> {
    let mut c = Csv::create(dir, Report::IdleTail.file_name(), &IDLE_TAIL_COLUMNS)?;
    // an empty tail contributes no rows
    for r in runs {
        let Some(t) = r.tail else { continue };
        c.row([
            r.estimator.key().to_string(),
            if r.burst_heuristic { "on" } else { "off" }.to_string(),
            t.last_arrival.to_string(),
            t.tail_packets.to_string(),
            t.tail_signals.to_string(),
            opt(t.crossing),
            t.signals_after_crossing.to_string(),
            r.target.to_string(),
        ])?;
    }
    c.finish()
}

fn write_mark_spacing(out: &RunOutput, dir: &Path) -> Result<PathBuf, ReportError> {
    let mut c = Csv::create(dir, Report::MarkSpacing.file_name(), &MARK_SPACING_COLUMNS)?;
    if !out.records.is_empty() {
        for s in analysis::mark_spacing(&out.records) {
            c.row([
                s.flow.map_or_else(|| "all".to_string(), |f| f.to_string()),
                s.packets.to_string(),
                s.signals.to_string(),
                s.mean_gap.to_string(),
                s.gap_variance.to_string(),
            ])?;
        }
    }
    c.finish()
}

fn write_error_stats(out: &RunOutput, dir: &Path) -> Result<PathBuf, ReportError> {
    let mut c = Csv::create(dir, Report::ErrorStats.file_name(), &ERROR_STATS_COLUMNS)?;
    if !out.records.is_empty() {
        for est in Estimator::ALL {
            let s = analysis::error_stats(&out.records, est);
            c.row([
                est.key().to_string(),
                s.samples.to_string(),
                s.excluded.to_string(),
                s.mean_error.to_string(),
                s.rms_error.to_string(),
                s.max_abs_error.to_string(),
            ])?;
        }
    }
    c.finish()
}

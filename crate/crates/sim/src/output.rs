//! `sessions.csv`, `summary.csv` and `events.log`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use v2vcc_core::metrics::{summarize, SessionRow};
use v2vcc_core::ndn::log::HEADER as EVENTS_HEADER;

use crate::experiment::MetricsTable;

pub const SESSIONS_HEADER: [&str; 16] = [
    "scenario_id",
    "seed",
    "cid",
    "pid",
    "outcome",
    "discovery_ms",
    "verification_ms",
    "negotiation_ms",
    "coordination_ms",
    "confirmation_ms",
    "total_ms",
    "price",
    "amount_kwh",
    "meet_x",
    "meet_y",
    "rounds",
];

pub const SUMMARY_HEADER: [&str; 8] = ["phase", "count", "mean", "min", "q1", "median", "q3", "max"];

#[derive(Debug, Error)]
#[error("writing {}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn ms(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn session_record(r: &SessionRow) -> [String; 16] {
    let [d, v, n, c, f] = r.phases.map(ms);
    [
        r.scenario_id.clone(),
        r.seed.to_string(),
        r.cid.clone(),
        r.pid.clone().unwrap_or_default(),
        r.outcome.clone(),
        d,
        v,
        n,
        c,
        f,
        ms(r.total_ms),
        r.price.map(|p| p.to_string()).unwrap_or_default(),
        r.amount_kwh.map(|a| format!("{a:.3}")).unwrap_or_default(),
        r.meet.map(|p| format!("{:.3}", p.x)).unwrap_or_default(),
        r.meet.map(|p| format!("{:.3}", p.y)).unwrap_or_default(),
        r.rounds.map(|n| n.to_string()).unwrap_or_default(),
    ]
}

fn csv_err(path: &Path, e: csv::Error) -> OutputError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    };
    OutputError { path: path.into(), source }
}

fn write_sessions(table: &MetricsTable, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SESSIONS_HEADER)?;
    for r in &table.rows {
        w.write_record(session_record(r))?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(table: &MetricsTable, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for (phase, stats) in summarize(&table.rows) {
        // phases with no completed value (e.g. baseline rows) are left out
        let Some(s) = stats else { continue };
        let mut rec = vec![phase.to_string(), s.count.to_string()];
        rec.extend([s.mean, s.min, s.q1, s.median, s.q3, s.max].map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_events(table: &MetricsTable, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{EVENTS_HEADER}")?;
    for run in &table.runs {
        writeln!(w, "# run={} seed={}", run.run, run.seed)?;
        for e in &run.events {
            writeln!(w, "{e}")?;
        }
    }
    w.flush()
}

/// Writes the three output files into `dir` (created if missing) and
/// returns their paths.
pub fn write_outputs(table: &MetricsTable, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError { path: dir.into(), source })?;
    let sessions = dir.join("sessions.csv");
    let summary = dir.join("summary.csv");
    let events = dir.join("events.log");
    write_sessions(table, &sessions).map_err(|e| csv_err(&sessions, e))?;
    write_summary(table, &summary).map_err(|e| csv_err(&summary, e))?;
    write_events(table, &events).map_err(|source| OutputError { path: events.clone(), source })?;
    Ok(vec![sessions, summary, events])
}

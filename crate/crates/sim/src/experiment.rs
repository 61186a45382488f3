use std::panic::{self, AssertUnwindSafe};

use rayon::prelude::*;
use thiserror::Error;
use v2vcc_core::ip::run_baseline_experiment;
use v2vcc_core::metrics::SessionRow;
use v2vcc_core::ndn::log::EventRecord;
use v2vcc_core::world::Audit;
use v2vcc_core::World;

use crate::config::{Mode, ScenarioConfig};

#[derive(Debug, Error)]
#[error("run {run} failed: {message}")]
pub struct ExperimentError {
    pub run: usize,
    pub message: String,
}

/// One simulated run, as kept by the table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run: usize,
    pub seed: u64,
    pub events: Vec<EventRecord>,
    pub audit: Audit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub scenario_id: String,
    /// Sorted by run, then by consumer.
    pub rows: Vec<SessionRow>,
    /// Empty for the baseline.
    pub runs: Vec<RunTrace>,
}

impl MetricsTable {
    pub fn empty(scenario_id: &str) -> Self {
        Self { scenario_id: scenario_id.into(), rows: Vec::new(), runs: Vec::new() }
    }

    pub fn completed_totals(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.total_ms).collect()
    }

    pub fn all_done(&self) -> bool {
        self.rows.iter().all(|r| r.outcome == "done")
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

/// Runs `f(run, seed + run)` for every run in parallel. Results come back in
/// run order; the first panicking run (lowest index) becomes the error.
pub fn run_parallel<T, F>(runs: usize, seed: u64, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync,
{
    let results: Vec<_> = (0..runs)
        .into_par_iter()
        .map(|i| panic::catch_unwind(AssertUnwindSafe(|| f(i, seed.wrapping_add(i as u64)))))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(run, r)| r.map_err(|p| ExperimentError { run, message: panic_message(p) }))
        .collect()
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<MetricsTable, ExperimentError> {
    let id = cfg.id.as_str();
    match cfg.mode {
        Mode::Ip => {
            let per_run = run_baseline_experiment(&cfg.cloud, cfg.runs, cfg.seed);
            let rows = per_run
                .iter()
                .enumerate()
                .flat_map(|(r, clients)| {
                    let seed = cfg.seed.wrapping_add(r as u64);
                    clients.iter().enumerate().map(move |(c, &t)| SessionRow::baseline(id, seed, r, c, t))
                })
                .collect();
            Ok(MetricsTable { scenario_id: id.into(), rows, runs: Vec::new() })
        }
        Mode::V2vcc => {
            let outputs = run_parallel(cfg.runs, cfg.seed, |_, seed| World::new(&cfg.params, seed).run())?;
            let mut table = MetricsTable::empty(id);
            for (run, out) in outputs.into_iter().enumerate() {
                let mut rows: Vec<_> =
                    out.sessions.iter().map(|s| SessionRow::from_session(id, out.seed, run, s)).collect();
                rows.sort_by(|a, b| a.cid.cmp(&b.cid));
                table.rows.extend(rows);
                table.runs.push(RunTrace { run, seed: out.seed, events: out.events, audit: out.audit });
            }
            Ok(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panic_maps_to_lowest_run() {
        let r = run_parallel(8, 100, |i, seed| {
            assert_eq!(seed, 100 + i as u64);
            if i == 3 || i == 6 {
                panic!("boom at {i}");
            }
            i
        });
        let e = r.unwrap_err();
        assert_eq!(e.run, 3);
        assert_eq!(e.message, "boom at 3");
    }

    #[test]
    fn results_in_run_order() {
        let v = run_parallel(16, 5, |i, seed| (i, seed)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &(j, s))| i == j && s == 5 + i as u64));
    }
}

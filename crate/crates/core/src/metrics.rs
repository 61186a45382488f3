//! Per-session result rows and box-plot summaries.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geo::Point;
use crate::message::Phase;
use crate::price::Price;
use crate::protocol::{ConsumerSession, SessionPhase};

/// Canonical millisecond value: whatever survives printing with six
/// decimals. Statistics are computed on these so that anyone re-reading
/// the CSV gets the same numbers.
pub fn canonical_ms(v: f64) -> f64 {
    alloc::format!("{v:.6}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRow {
    pub scenario_id: String,
    pub seed: u64,
    pub run: usize,
    pub cid: String,
    pub pid: Option<String>,
    pub outcome: String,
    /// Discovery through confirmation.
    pub phases: [Option<f64>; 5],
    pub total_ms: Option<f64>,
    pub price: Option<Price>,
    pub amount_kwh: Option<f64>,
    pub meet: Option<Point>,
    pub rounds: Option<u32>,
}

impl SessionRow {
    pub fn from_session(scenario_id: &str, seed: u64, run: usize, s: &ConsumerSession) -> Self {
        let done = s.phase == SessionPhase::Done;
        let record = s.record.as_ref();
        let phases = Phase::ALL.map(|p| if done { s.timings.duration_ms(p).map(canonical_ms) } else { None });
        Self {
            scenario_id: scenario_id.into(),
            seed,
            run,
            cid: s.cid.as_str().into(),
            pid: s.selected.as_ref().map(|p| p.as_str().into()),
            outcome: s.outcome_label(),
            phases,
            total_ms: if done { s.timings.total_ms().map(canonical_ms) } else { None },
            price: record.map(|r| r.price_per_kwh),
            amount_kwh: record.map(|r| r.amount_kwh),
            meet: record.and_then(|r| r.meeting.location),
            rounds: (s.negotiation_rounds > 0).then_some(s.negotiation_rounds),
        }
    }

    /// Baseline client row: only the total is known.
    pub fn baseline(scenario_id: &str, seed: u64, run: usize, client: usize, total_ms: f64) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            seed,
            run,
            cid: alloc::format!("K{client:02}"),
            pid: None,
            outcome: "done".into(),
            phases: [None; 5],
            total_ms: Some(canonical_ms(total_ms)),
            price: None,
            amount_kwh: None,
            meet: None,
            rounds: None,
        }
    }
}

/// Box-plot statistics of one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data (the common "type 7").
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Stats {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Column labels of the summary, in order.
pub const SUMMARY_COLUMNS: [&str; 6] = ["discovery", "verification", "negotiation", "coordination", "confirmation", "total"];

/// Statistics per phase and for the total, over rows that have a value.
pub fn summarize(rows: &[SessionRow]) -> Vec<(&'static str, Option<Stats>)> {
    let mut out = Vec::new();
    for (i, label) in SUMMARY_COLUMNS.iter().enumerate() {
        let values: Vec<f64> =
            rows.iter().filter_map(|r| if i < 5 { r.phases[i] } else { r.total_ms }).collect();
        out.push((*label, Stats::of(&values)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let s = Stats::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 4.0, 2.5));
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q3, 3.25);
        assert_eq!(Stats::of(&[7.0]).unwrap().q3, 7.0);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn canonical_values_are_fixed_points() {
        let v = canonical_ms(0.1 + 0.2);
        assert_eq!(v, 0.3);
        assert_eq!(canonical_ms(v), v);
    }
}

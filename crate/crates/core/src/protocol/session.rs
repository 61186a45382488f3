use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::filter::DiscoveryFilter;
use crate::geo::Point;
use crate::message::Phase;
use crate::name::Ident;
use crate::price::Price;
use crate::profile::{Fields, MeetingProposal, Offer, SupplierProfile};
use crate::sim::SimTime;

use super::coordination::Party;
use super::select::Criterion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("no supplier answered discovery")]
    DiscoveryFailed,
    #[error("supplier verification failed")]
    VerificationFailed,
    #[error("every candidate supplier was inconsistent")]
    AllCandidatesRejected,
    #[error("negotiation failed")]
    NegotiationFailed,
    #[error("no mutually feasible meeting point")]
    CoordinationFailed,
    #[error("confirmation does not match the supplier's record")]
    ConfirmationMismatch,
    #[error("{0} timed out")]
    Timeout(Phase),
    #[error("session did not finish before the simulation horizon")]
    Unfinished,
}

impl ProtocolError {
    /// Short label used in the `outcome` CSV column.
    pub fn label(&self) -> String {
        match self {
            ProtocolError::DiscoveryFailed => "discovery_failed".into(),
            ProtocolError::VerificationFailed => "verification_failed".into(),
            ProtocolError::AllCandidatesRejected => "all_candidates_rejected".into(),
            ProtocolError::NegotiationFailed => "negotiation_failed".into(),
            ProtocolError::CoordinationFailed => "coordination_failed".into(),
            ProtocolError::ConfirmationMismatch => "confirmation_mismatch".into(),
            ProtocolError::Timeout(p) => format!("{p}_timeout"),
            ProtocolError::Unfinished => "unfinished".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SessionPhase {
    Idle,
    Active(Phase),
    Done,
    Failed,
}

/// Start/end of each phase, in simulation time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    spans: [(Option<SimTime>, Option<SimTime>); 5],
}

impl PhaseTimings {
    fn idx(p: Phase) -> usize {
        p as usize
    }

    pub fn start(&self, p: Phase) -> Option<SimTime> {
        self.spans[Self::idx(p)].0
    }

    pub fn end(&self, p: Phase) -> Option<SimTime> {
        self.spans[Self::idx(p)].1
    }

    /// Duration in ms of a completed phase.
    pub fn duration_ms(&self, p: Phase) -> Option<f64> {
        let (s, e) = self.spans[Self::idx(p)];
        Some(e? - s?)
    }

    /// Sum of the five phase durations, if all completed.
    pub fn total_ms(&self) -> Option<f64> {
        Phase::ALL.iter().map(|p| self.duration_ms(*p)).sum()
    }

    pub(crate) fn begin(&mut self, p: Phase, now: SimTime) {
        self.spans[Self::idx(p)].0 = Some(now);
    }

    pub(crate) fn finish(&mut self, p: Phase, now: SimTime) {
        self.spans[Self::idx(p)].1 = Some(now);
    }
}

/// Logged by both parties once a deal is confirmed.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionRecord {
    pub cid: Ident,
    pub pid: Ident,
    pub price_per_kwh: Price,
    pub amount_kwh: f64,
    pub meeting: MeetingProposal,
    pub confirmed_at: SimTime,
}

impl TransactionRecord {
    pub fn to_payload(&self) -> String {
        let loc = self.meeting.location.map_or_else(|| String::from("-"), |p| format!("{p}"));
        format!(
            "cid={};pid={};price={};amount={};window={};loc={};confirmed_at={}",
            self.cid,
            self.pid,
            self.price_per_kwh,
            self.amount_kwh,
            self.meeting.window(),
            loc,
            self.confirmed_at.as_ms()
        )
    }

    pub fn from_payload(text: &str) -> Option<Self> {
        let f = Fields::parse(text)?;
        let (window_start, window_end) = crate::profile::parse_window(f.get("window")?)?;
        let location = match f.get("loc")? {
            "-" => None,
            p => Some(Point::parse(p)?),
        };
        Some(TransactionRecord {
            cid: Ident::new(f.get("cid")?).ok()?,
            pid: Ident::new(f.get("pid")?).ok()?,
            price_per_kwh: f.get("price")?.parse().ok()?,
            amount_kwh: f.num("amount")?,
            meeting: MeetingProposal { window_start, window_end, location },
            confirmed_at: SimTime::from_ms(f.num("confirmed_at")?),
        })
    }
}

/// Per-consumer protocol state across the five phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerSession {
    pub cid: Ident,
    pub phase: SessionPhase,
    pub desired_energy: f64,
    pub filter: DiscoveryFilter,
    pub criteria: Vec<Criterion>,
    pub target_discovery_count: usize,
    pub candidates: Vec<SupplierProfile>,
    pub selected: Option<Ident>,
    pub verified: Option<SupplierProfile>,
    pub agreement: Option<Offer>,
    pub meeting: Option<MeetingProposal>,
    /// Consumer-side state when the meeting was accepted.
    pub meeting_check: Option<Party>,
    pub soc: f64,
    pub consumption_rate: f64,
    pub timings: PhaseTimings,
    pub negotiation_rounds: u32,
    pub failure: Option<ProtocolError>,
    pub record: Option<TransactionRecord>,
}

impl ConsumerSession {
    pub fn new(cid: Ident, desired_energy: f64, filter: DiscoveryFilter, soc: f64, consumption_rate: f64) -> Self {
        Self {
            cid,
            phase: SessionPhase::Idle,
            desired_energy,
            filter,
            criteria: super::select::DEFAULT_CRITERIA.to_vec(),
            target_discovery_count: 1,
            candidates: Vec::new(),
            selected: None,
            verified: None,
            agreement: None,
            meeting: None,
            meeting_check: None,
            soc,
            consumption_rate,
            timings: PhaseTimings::default(),
            negotiation_rounds: 0,
            failure: None,
            record: None,
        }
    }

    /// Moves to `next`, closing the current phase. Phases only move forward.
    pub fn advance(&mut self, next: Phase, now: SimTime) {
        match self.phase {
            SessionPhase::Active(cur) => {
                assert!(next > cur, "phase {next} does not follow {cur}");
                self.timings.finish(cur, now);
            }
            SessionPhase::Idle => {}
            other => panic!("session already finished: {other:?}"),
        }
        self.timings.begin(next, now);
        self.phase = SessionPhase::Active(next);
    }

    pub fn complete(&mut self, record: TransactionRecord, now: SimTime) {
        if let SessionPhase::Active(cur) = self.phase {
            self.timings.finish(cur, now);
        }
        self.record = Some(record);
        self.phase = SessionPhase::Done;
    }

    pub fn fail(&mut self, err: ProtocolError) {
        self.failure = Some(err);
        self.phase = SessionPhase::Failed;
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, SessionPhase::Done | SessionPhase::Failed)
    }

    pub fn outcome_label(&self) -> String {
        match (self.phase, self.failure) {
            (SessionPhase::Done, _) => "done".into(),
            (_, Some(e)) => e.label(),
            _ => ProtocolError::Unfinished.label(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> ConsumerSession {
        ConsumerSession::new(Ident::new("C00").unwrap(), 10.0, DiscoveryFilter::default(), 5.0, 0.2)
    }

    #[test]
    fn phases_accumulate_timings() {
        let mut s = session();
        let t = SimTime::from_ms;
        s.advance(Phase::Discovery, t(0.0));
        s.advance(Phase::Verification, t(0.2));
        s.advance(Phase::Negotiation, t(0.5));
        s.advance(Phase::Coordination, t(1.0));
        s.advance(Phase::Confirmation, t(1.25));
        let rec = TransactionRecord {
            cid: s.cid.clone(),
            pid: Ident::new("S00").unwrap(),
            price_per_kwh: "0.095".parse().unwrap(),
            amount_kwh: 10.0,
            meeting: MeetingProposal { window_start: 840, window_end: 900, location: Some(Point::new(1.0, 2.0)) },
            confirmed_at: t(1.3),
        };
        s.complete(rec, t(1.5));
        assert_eq!(s.timings.duration_ms(Phase::Negotiation), Some(0.5));
        assert_eq!(s.timings.total_ms(), Some(1.5));
        assert_eq!(s.outcome_label(), "done");
    }

    #[test]
    #[should_panic]
    fn phases_cannot_go_backwards() {
        let mut s = session();
        s.advance(Phase::Negotiation, SimTime::ZERO);
        s.advance(Phase::Verification, SimTime::ZERO);
    }

    #[test]
    fn record_payload_round_trip() {
        let rec = TransactionRecord {
            cid: Ident::new("C00").unwrap(),
            pid: Ident::new("S00").unwrap(),
            price_per_kwh: "0.095".parse().unwrap(),
            amount_kwh: 12.5,
            meeting: MeetingProposal { window_start: 840, window_end: 900, location: Some(Point::new(1.5, -2.0)) },
            confirmed_at: SimTime::from_ms(1.2345678),
        };
        assert_eq!(TransactionRecord::from_payload(&rec.to_payload()), Some(rec));
    }

    #[test]
    fn failure_labels() {
        let mut s = session();
        s.fail(ProtocolError::Timeout(Phase::Negotiation));
        assert_eq!(s.outcome_label(), "negotiation_timeout");
    }
}

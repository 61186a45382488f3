//! Spatial and temporal meeting placement.

use alloc::format;
use alloc::string::String;

use crate::geo::Point;
use crate::profile::{parse_window, Fields, MeetingProposal};

use super::feasibility::{feasible_meeting, travel_minutes};

/// One side's state as far as meeting placement is concerned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Party {
    pub position: Point,
    pub soc: f64,
    pub consumption_rate: f64,
    pub reserve_kwh: f64,
    /// Driving speed used for travel-time estimates, m/s.
    pub travel_speed: f64,
}

impl Party {
    pub fn can_reach(&self, to: Point) -> bool {
        feasible_meeting(self.soc, self.consumption_rate, self.position, to, self.reserve_kwh)
    }

    /// Earliest minute-of-day this party can be at `to`.
    pub fn arrival_minute(&self, to: Point, now_minute: u32) -> u32 {
        now_minute + travel_minutes(self.position.distance(&to), self.travel_speed)
    }

    /// Both range and timing allow meeting at `m`.
    pub fn accepts(&self, m: &MeetingProposal, now_minute: u32) -> bool {
        let Some(loc) = m.location else { return false };
        m.is_valid() && self.can_reach(loc) && self.arrival_minute(loc, now_minute) <= m.window_start
    }

    /// Tightens `window` so that it starts no earlier than this party's
    /// arrival at `loc`; `None` if the window closes first.
    pub fn fit_window(&self, window_start: u32, window_end: u32, loc: Point, now_minute: u32) -> Option<MeetingProposal> {
        let start = window_start.max(self.arrival_minute(loc, now_minute));
        (start <= window_end).then_some(MeetingProposal { window_start: start, window_end, location: Some(loc) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinationReply {
    /// The consumer's location works for the supplier.
    Accept(MeetingProposal),
    /// Supplier's own choice (its current position).
    Counter(MeetingProposal),
    Reject,
}

impl CoordinationReply {
    pub fn to_payload(&self) -> String {
        let render = |status: &str, m: &MeetingProposal| {
            let loc = m.location.map_or_else(|| String::from("-"), |p| format!("{p}"));
            format!("status={status};window={};loc={loc}", m.window())
        };
        match self {
            CoordinationReply::Accept(m) => render("accept", m),
            CoordinationReply::Counter(m) => render("counter", m),
            CoordinationReply::Reject => String::from("status=reject"),
        }
    }

    pub fn from_payload(text: &str) -> Option<Self> {
        let f = Fields::parse(text)?;
        let status = f.get("status")?;
        if status == "reject" {
            return Some(CoordinationReply::Reject);
        }
        let (window_start, window_end) = parse_window(f.get("window")?)?;
        let m = MeetingProposal { window_start, window_end, location: Some(Point::parse(f.get("loc")?)?) };
        match status {
            "accept" => Some(CoordinationReply::Accept(m)),
            "counter" => Some(CoordinationReply::Counter(m)),
            _ => None,
        }
    }
}

/// Supplier decision for the `round`-th proposal (1-based) of a session.
/// With no usable location it picks its own position; a second-round
/// proposal is taken or refused outright.
pub fn supplier_reply(proposal: &MeetingProposal, supplier: &Party, now_minute: u32, round: u32) -> CoordinationReply {
    if let Some(loc) = proposal.location {
        if supplier.can_reach(loc) {
            if let Some(m) = supplier.fit_window(proposal.window_start, proposal.window_end, loc, now_minute) {
                return CoordinationReply::Accept(m);
            }
        }
    }
    if round >= 2 {
        return CoordinationReply::Reject;
    }
    let own = supplier.position;
    match supplier.fit_window(proposal.window_start, proposal.window_end, own, now_minute) {
        Some(m) if supplier.can_reach(own) => CoordinationReply::Counter(m),
        _ => CoordinationReply::Reject,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn party(x: f64, soc: f64) -> Party {
        Party { position: Point::new(x, 0.0), soc, consumption_rate: 0.2, reserve_kwh: 0.5, travel_speed: 13.4112 }
    }

    fn proposal(loc: Option<Point>) -> MeetingProposal {
        MeetingProposal { window_start: 840, window_end: 900, location: loc }
    }

    #[test]
    fn offered_location_accepted_when_reachable() {
        let consumer = party(0.0, 5.0);
        let supplier = party(200.0, 30.0);
        let r = supplier_reply(&proposal(Some(consumer.position)), &supplier, 840, 1);
        let CoordinationReply::Accept(m) = r else { panic!("{r:?}") };
        assert_eq!(m.location, Some(consumer.position));
        // 200 m at 30 mph is under a minute, rounded up to one
        assert_eq!(m.window_start, 841);
        assert!(consumer.accepts(&m, 840));
    }

    #[test]
    fn empty_location_means_supplier_position() {
        let supplier = party(200.0, 30.0);
        let r = supplier_reply(&proposal(None), &supplier, 840, 1);
        assert_eq!(r, CoordinationReply::Counter(MeetingProposal { location: Some(supplier.position), ..proposal(None) }));
    }

    #[test]
    fn twelve_km_apart_with_ten_km_range() {
        // consumer: 2.5 kWh at 0.2 kWh/km with 0.5 reserve => 10 km of range
        let consumer = party(0.0, 2.5);
        let supplier = party(12_000.0, 30.0);
        let r = supplier_reply(&proposal(None), &supplier, 840, 1);
        let CoordinationReply::Counter(m) = r else { panic!() };
        assert!(!consumer.can_reach(m.location.unwrap()));
        let mid = consumer.position.midpoint(&supplier.position);
        assert!(consumer.can_reach(mid));
        let round2 = supplier_reply(&MeetingProposal { location: Some(mid), ..proposal(None) }, &supplier, 840, 2);
        assert!(matches!(round2, CoordinationReply::Accept(_)));

        // consumer with only 1 kWh cannot reach the midpoint either
        let weak = party(0.0, 1.0);
        assert!(!weak.can_reach(mid));
    }

    #[test]
    fn closed_window_rejected() {
        let supplier = party(0.0, 30.0);
        let late = MeetingProposal { window_start: 800, window_end: 830, location: None };
        assert_eq!(supplier_reply(&late, &supplier, 840, 1), CoordinationReply::Reject);
    }

    #[test]
    fn payload_round_trip() {
        let m = MeetingProposal { window_start: 841, window_end: 900, location: Some(Point::new(3.5, -1.0)) };
        for r in [CoordinationReply::Accept(m), CoordinationReply::Counter(m), CoordinationReply::Reject] {
            assert_eq!(CoordinationReply::from_payload(&r.to_payload()), Some(r));
        }
    }
}

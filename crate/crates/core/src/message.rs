//! The five-phase name grammar.
//!
//! ```text
//! /FastCharging/Discovery/<area|->/<maxPrice|->/<minEnergy|->/<minRep|->/<start|->/<end|->/<ts>[/<pid>]
//! /FastCharging/<pid>/Verification[/<cid>]/<ts>
//! /FastCharging/<pid>/Negotiation/<price>/<amount>[/Hard][/<cid>]/<ts>
//! /FastCharging/<pid>/Coordination/Spatial/Temporal/<start>-<end>/<x,y|->[/<cid>]/<ts>
//! /FastCharging/<pid>/Coordination/<start>-<end>/<x,y|->/Negotiation/<price>/<amount>[/<cid>]/<ts>
//! ```
//!
//! The last line is the confirmation message: it reuses the `Coordination`
//! keyword and is told apart from a coordination request by position (no
//! `Spatial` marker after the keyword). The optional `<cid>` lets a supplier
//! keep concurrent sessions apart; discovery and verification leave it out
//! so that identical requests from different consumers aggregate and cache.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::filter::{Area, DiscoveryFilter};
use crate::geo::Point;
use crate::name::{Ident, Name, NameError};
use crate::price::Price;
use crate::profile::{parse_window, MeetingProposal, Offer};

pub const ROOT: &str = "FastCharging";
const ABSENT: &str = "-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Discovery,
    Verification,
    Negotiation,
    Coordination,
    Confirmation,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Discovery,
        Phase::Verification,
        Phase::Negotiation,
        Phase::Coordination,
        Phase::Confirmation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Discovery => "discovery",
            Phase::Verification => "verification",
            Phase::Negotiation => "negotiation",
            Phase::Coordination => "coordination",
            Phase::Confirmation => "confirmation",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A decoded protocol name. Each variant carries exactly the fields its
/// phase needs; `timestamp` is simulation time in whole milliseconds.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Discovery {
        filter: DiscoveryFilter,
        /// Set on reply names only.
        responder: Option<Ident>,
        timestamp: u64,
    },
    Verification {
        pid: Ident,
        cid: Option<Ident>,
        timestamp: u64,
    },
    Negotiation {
        pid: Ident,
        offer: Offer,
        cid: Option<Ident>,
        timestamp: u64,
    },
    Coordination {
        pid: Ident,
        proposal: MeetingProposal,
        cid: Option<Ident>,
        timestamp: u64,
    },
    Confirmation {
        pid: Ident,
        meeting: MeetingProposal,
        price_per_kwh: Price,
        amount_kwh: f64,
        cid: Option<Ident>,
        timestamp: u64,
    },
}

impl Message {
    pub fn phase(&self) -> Phase {
        match self {
            Message::Discovery { .. } => Phase::Discovery,
            Message::Verification { .. } => Phase::Verification,
            Message::Negotiation { .. } => Phase::Negotiation,
            Message::Coordination { .. } => Phase::Coordination,
            Message::Confirmation { .. } => Phase::Confirmation,
        }
    }

    /// Producer id; `None` only for broadcast discovery interests.
    pub fn pid(&self) -> Option<&Ident> {
        match self {
            Message::Discovery { responder, .. } => responder.as_ref(),
            Message::Verification { pid, .. }
            | Message::Negotiation { pid, .. }
            | Message::Coordination { pid, .. }
            | Message::Confirmation { pid, .. } => Some(pid),
        }
    }

    pub fn cid(&self) -> Option<&Ident> {
        match self {
            Message::Discovery { .. } => None,
            Message::Verification { cid, .. }
            | Message::Negotiation { cid, .. }
            | Message::Coordination { cid, .. }
            | Message::Confirmation { cid, .. } => cid.as_ref(),
        }
    }

    pub fn timestamp(&self) -> u64 {
        match self {
            Message::Discovery { timestamp, .. }
            | Message::Verification { timestamp, .. }
            | Message::Negotiation { timestamp, .. }
            | Message::Coordination { timestamp, .. }
            | Message::Confirmation { timestamp, .. } => *timestamp,
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| String::from(ABSENT), |v| v.to_string())
}

/// Renders a message as a name. Fixed component positions; absent optional
/// filter fields become `-`.
pub fn encode_name(msg: &Message) -> Name {
    let mut c: Vec<String> = vec![ROOT.to_string()];
    match msg {
        Message::Discovery { filter, responder, timestamp } => {
            c.push("Discovery".into());
            c.push(opt(filter.area));
            c.push(opt(filter.max_price_per_kwh));
            c.push(opt(filter.min_energy));
            c.push(opt(filter.min_reputation));
            c.push(opt(filter.window_start));
            c.push(opt(filter.window_end));
            c.push(timestamp.to_string());
            if let Some(pid) = responder {
                c.push(pid.to_string());
            }
        }
        Message::Verification { pid, cid, timestamp } => {
            c.push(pid.to_string());
            c.push("Verification".into());
            c.extend(cid.iter().map(ToString::to_string));
            c.push(timestamp.to_string());
        }
        Message::Negotiation { pid, offer, cid, timestamp } => {
            c.push(pid.to_string());
            c.push("Negotiation".into());
            c.push(offer.price_per_kwh.to_string());
            c.push(offer.amount_kwh.to_string());
            if offer.hard {
                c.push("Hard".into());
            }
            c.extend(cid.iter().map(ToString::to_string));
            c.push(timestamp.to_string());
        }
        Message::Coordination { pid, proposal, cid, timestamp } => {
            c.push(pid.to_string());
            c.push("Coordination".into());
            c.push("Spatial".into());
            c.push("Temporal".into());
            c.push(proposal.window());
            c.push(opt(proposal.location));
            c.extend(cid.iter().map(ToString::to_string));
            c.push(timestamp.to_string());
        }
        Message::Confirmation { pid, meeting, price_per_kwh, amount_kwh, cid, timestamp } => {
            c.push(pid.to_string());
            c.push("Coordination".into());
            c.push(meeting.window());
            c.push(opt(meeting.location));
            c.push("Negotiation".into());
            c.push(price_per_kwh.to_string());
            c.push(amount_kwh.to_string());
            c.extend(cid.iter().map(ToString::to_string));
            c.push(timestamp.to_string());
        }
    }
    Name::from_components(c).expect("message fields render as valid components")
}

struct Reader<'a> {
    name: &'a Name,
}

impl<'a> Reader<'a> {
    fn err(&self, reason: &'static str) -> NameError {
        NameError::malformed(self.name, reason)
    }

    fn at(&self, i: usize) -> Result<&'a str, NameError> {
        self.name.get(i).ok_or_else(|| self.err("too few components"))
    }

    fn optional<T>(&self, i: usize, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, NameError> {
        match self.at(i)? {
            ABSENT => Ok(None),
            text => parse(text).map(Some).ok_or_else(|| self.err("unparsable filter field")),
        }
    }

    fn timestamp(&self, i: usize) -> Result<u64, NameError> {
        self.at(i)?.parse().map_err(|_| self.err("bad timestamp"))
    }

    fn ident(&self, i: usize) -> Result<Ident, NameError> {
        Ident::new(self.at(i)?).map_err(|_| self.err("bad identifier"))
    }

    fn non_negative(&self, i: usize) -> Result<f64, NameError> {
        non_negative(self.at(i)?).ok_or_else(|| self.err("bad number"))
    }

    fn location(&self, i: usize) -> Result<Option<Point>, NameError> {
        self.optional(i, Point::parse)
    }

    fn window(&self, i: usize) -> Result<(u32, u32), NameError> {
        parse_window(self.at(i)?).ok_or_else(|| self.err("bad time frame"))
    }

    /// Optional consumer id followed by the timestamp, starting at `first`.
    fn tail(&self, first: usize) -> Result<(Option<Ident>, u64), NameError> {
        match self.name.len().checked_sub(first) {
            Some(1) => Ok((None, self.timestamp(first)?)),
            Some(2) => Ok((Some(self.ident(first)?), self.timestamp(first + 1)?)),
            _ => Err(self.err("component count does not fit the phase template")),
        }
    }
}

fn non_negative(text: &str) -> Option<f64> {
    let v: f64 = text.parse().ok()?;
    (v.is_finite() && v >= 0.0).then_some(v)
}

/// Inverse of [`encode_name`].
pub fn parse_name(name: &Name) -> Result<Message, NameError> {
    let r = Reader { name };
    if r.at(0)? != ROOT {
        return Err(r.err("missing FastCharging root"));
    }
    if r.at(1)? == "Discovery" {
        let responder = match name.len() {
            9 => None,
            10 => Some(r.ident(9)?),
            _ => return Err(r.err("component count does not fit the phase template")),
        };
        let area = r.optional(2, Area::parse)?;
        if area.is_some_and(|a| a.radius < 0.0) {
            return Err(r.err("negative radius"));
        }
        let filter = DiscoveryFilter {
            area,
            max_price_per_kwh: r.optional(3, |t| t.parse().ok())?,
            min_energy: r.optional(4, non_negative)?,
            min_reputation: r.optional(5, non_negative)?,
            window_start: r.optional(6, |t| t.parse().ok())?,
            window_end: r.optional(7, |t| t.parse().ok())?,
        };
        if !filter.is_valid() {
            return Err(r.err("window start after end"));
        }
        return Ok(Message::Discovery { filter, responder, timestamp: r.timestamp(8)? });
    }

    let pid = r.ident(1)?;
    match r.at(2)? {
        "Verification" => {
            let (cid, timestamp) = r.tail(3)?;
            Ok(Message::Verification { pid, cid, timestamp })
        }
        "Negotiation" => {
            let price_per_kwh: Price = r.at(3)?.parse().map_err(|_| r.err("bad price"))?;
            let amount_kwh = r.non_negative(4)?;
            let hard = name.get(5) == Some("Hard") && name.len() > 6;
            let offer = Offer { price_per_kwh, amount_kwh, hard };
            if !offer.is_valid() {
                return Err(r.err("offer price and amount must be positive"));
            }
            let (cid, timestamp) = r.tail(if hard { 6 } else { 5 })?;
            Ok(Message::Negotiation { pid, offer, cid, timestamp })
        }
        "Coordination" if r.at(3)? == "Spatial" => {
            if r.at(4)? != "Temporal" {
                return Err(r.err("expected Temporal marker"));
            }
            let (window_start, window_end) = r.window(5)?;
            let proposal = MeetingProposal { window_start, window_end, location: r.location(6)? };
            let (cid, timestamp) = r.tail(7)?;
            Ok(Message::Coordination { pid, proposal, cid, timestamp })
        }
        "Coordination" => {
            let (window_start, window_end) = r.window(3)?;
            let meeting = MeetingProposal { window_start, window_end, location: r.location(4)? };
            if r.at(5)? != "Negotiation" {
                return Err(r.err("expected Negotiation section"));
            }
            let price_per_kwh = r.at(6)?.parse().map_err(|_| r.err("bad price"))?;
            let amount_kwh = r.non_negative(7)?;
            let (cid, timestamp) = r.tail(8)?;
            Ok(Message::Confirmation { pid, meeting, price_per_kwh, amount_kwh, cid, timestamp })
        }
        _ => Err(r.err("no phase keyword")),
    }
}

/// Name under which a supplier answers `interest`: broadcast discovery
/// replies get the responder id appended, point-to-point replies reuse the
/// interest name.
pub fn data_name_for(interest: &Name, pid: &Ident) -> Result<Name, NameError> {
    match parse_name(interest)? {
        Message::Discovery { responder: None, .. } => interest.child(pid.as_str()),
        Message::Discovery { responder: Some(_), .. } => {
            Err(NameError::malformed(interest, "discovery reply name used as interest"))
        }
        msg => {
            if msg.pid() == Some(pid) {
                Ok(interest.clone())
            } else {
                Err(NameError::malformed(interest, "pid in name differs from responder"))
            }
        }
    }
}

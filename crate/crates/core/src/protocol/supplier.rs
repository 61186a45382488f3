//! Producer application run by a selling vehicle.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::filter::matches_filter;
use crate::geo::Point;
use crate::message::{data_name_for, parse_name, Message};
use crate::name::{Ident, Name};
use crate::ndn::{Data, Interest};
use crate::price::Price;
use crate::profile::{MeetingProposal, Offer, SupplierProfile};
use crate::sim::SimTime;

use super::coordination::{supplier_reply, CoordinationReply, Party};
use super::negotiation::{NegotiationPolicy, SupplierNegotiation, SupplierReply};
use super::session::TransactionRecord;
use super::{Clock, DISCOVERY_FRESHNESS_MS, SESSION_FRESHNESS_MS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    Honest,
    /// Advertises a different price at discovery than it later verifies.
    Misreport { discovery_price: Price },
    /// Verification replies are corrupted after signing.
    TamperVerification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupplierConfig {
    /// Initial advertised state; the location is refreshed from mobility.
    pub profile: SupplierProfile,
    pub policy: NegotiationPolicy,
    pub reserve_kwh: f64,
    pub travel_speed: f64,
    pub reservation_window_ms: f64,
    pub clock: Clock,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq)]
struct Reservation {
    offer: Offer,
    /// `None` once confirmed.
    until: Option<SimTime>,
    meeting: Option<MeetingProposal>,
    party: Option<Party>,
}

impl Reservation {
    fn is_live(&self, now: SimTime) -> bool {
        self.until.is_none_or(|u| u > now)
    }
}

#[derive(Debug)]
pub struct SupplierApp {
    cfg: SupplierConfig,
    negotiations: BTreeMap<Ident, SupplierNegotiation>,
    /// Last counter sent per consumer, so a coordination request can
    /// stand in for acceptance of a hard offer.
    last_counter: BTreeMap<Ident, Offer>,
    reservations: BTreeMap<Ident, Reservation>,
    coordination_rounds: BTreeMap<Ident, u32>,
    /// Replies already produced, so retransmissions get identical answers.
    answered: BTreeMap<Name, Data>,
    records: Vec<TransactionRecord>,
    /// Feasibility state at the moment each consumer's meeting was fixed.
    meeting_parties: BTreeMap<Ident, Party>,
    peak_reserved_kwh: f64,
}

impl SupplierApp {
    pub fn new(cfg: SupplierConfig) -> Self {
        Self {
            cfg,
            negotiations: BTreeMap::new(),
            last_counter: BTreeMap::new(),
            reservations: BTreeMap::new(),
            coordination_rounds: BTreeMap::new(),
            answered: BTreeMap::new(),
            records: Vec::new(),
            meeting_parties: BTreeMap::new(),
            peak_reserved_kwh: 0.0,
        }
    }

    pub fn pid(&self) -> &Ident {
        &self.cfg.profile.pid
    }

    pub fn config(&self) -> &SupplierConfig {
        &self.cfg
    }

    pub fn records(&self) -> &[TransactionRecord] {
        &self.records
    }

    pub fn meeting_party(&self, cid: &Ident) -> Option<&Party> {
        self.meeting_parties.get(cid)
    }

    /// Largest total reservation ever held at once.
    pub fn peak_reserved_kwh(&self) -> f64 {
        self.peak_reserved_kwh
    }

    pub fn reserved_kwh(&self, now: SimTime) -> f64 {
        self.reservations.values().filter(|r| r.is_live(now)).map(|r| r.offer.amount_kwh).sum()
    }

    fn reserved_by_others(&self, cid: &Ident, now: SimTime) -> f64 {
        self.reservations
            .iter()
            .filter(|(c, r)| *c != cid && r.is_live(now))
            .map(|(_, r)| r.offer.amount_kwh)
            .sum()
    }

    fn current_profile(&self, now: SimTime, position: Point) -> SupplierProfile {
        let until = self.reservations.values().filter_map(|r| r.until.filter(|u| *u > now)).max();
        SupplierProfile { location: position, reserved_until: until, ..self.cfg.profile.clone() }
    }

    fn party(&self, position: Point) -> Party {
        Party {
            position,
            soc: self.cfg.profile.soc,
            consumption_rate: self.cfg.profile.consumption_rate,
            reserve_kwh: self.cfg.reserve_kwh,
            travel_speed: self.cfg.travel_speed,
        }
    }

    fn sign(&self, name: Name, payload: &str, freshness: f64) -> Data {
        Data::signed(name, payload.as_bytes().to_vec(), self.cfg.profile.pid.clone(), freshness)
    }

    fn reserve(&mut self, cid: &Ident, offer: Offer, now: SimTime) -> bool {
        if self.reserved_by_others(cid, now) + offer.amount_kwh > self.cfg.profile.available_energy {
            return false;
        }
        let until = Some(now + self.cfg.reservation_window_ms);
        self.reservations.insert(cid.clone(), Reservation { offer, until, meeting: None, party: None });
        self.peak_reserved_kwh = self.peak_reserved_kwh.max(self.reserved_kwh(now));
        true
    }

    /// Answers an interest that reached this producer, or stays silent.
    pub fn on_interest(&mut self, interest: &Interest, now: SimTime, position: Point) -> Option<Data> {
        if let Some(done) = self.answered.get(&interest.name) {
            return Some(done.clone());
        }
        let msg = parse_name(&interest.name).ok()?;
        if msg.pid().is_some_and(|p| p != self.pid()) {
            return None;
        }
        let data = match msg {
            Message::Discovery { filter, .. } => {
                if interest.exclude.contains(self.pid()) {
                    return None;
                }
                let mut advertised = self.current_profile(now, position);
                if let Behavior::Misreport { discovery_price } = self.cfg.behavior {
                    advertised.price_per_kwh = discovery_price;
                }
                if !matches_filter(&advertised, &filter) {
                    return None;
                }
                let name = data_name_for(&interest.name, self.pid()).ok()?;
                // discovery answers are stateless; not memoised
                return Some(self.sign(name, &advertised.to_payload(), DISCOVERY_FRESHNESS_MS));
            }
            Message::Verification { .. } => {
                let payload = self.current_profile(now, position).to_payload();
                let mut data = self.sign(interest.name.clone(), &payload, SESSION_FRESHNESS_MS);
                if self.cfg.behavior == Behavior::TamperVerification {
                    if let Some(b) = data.payload.first_mut() {
                        *b ^= 0x01;
                    }
                }
                data
            }
            Message::Negotiation { offer, cid: Some(cid), .. } => {
                let reply = self.negotiate(&cid, &offer, now);
                self.sign(interest.name.clone(), &reply.to_payload(), SESSION_FRESHNESS_MS)
            }
            Message::Coordination { proposal, cid: Some(cid), .. } => {
                let reply = self.coordinate(&cid, &proposal, now, position);
                self.sign(interest.name.clone(), &reply.to_payload(), SESSION_FRESHNESS_MS)
            }
            Message::Confirmation { meeting, price_per_kwh, amount_kwh, cid: Some(cid), .. } => {
                let payload = match self.confirm(&cid, &meeting, price_per_kwh, amount_kwh, now) {
                    Some(rec) => format!("status=ack;confirmed_at={}", rec.confirmed_at.as_ms()),
                    None => "status=mismatch".into(),
                };
                self.sign(interest.name.clone(), &payload, SESSION_FRESHNESS_MS)
            }
            // point-to-point requests must say who is asking
            _ => return None,
        };
        self.answered.insert(interest.name.clone(), data.clone());
        Some(data)
    }

    fn negotiate(&mut self, cid: &Ident, offer: &Offer, now: SimTime) -> SupplierReply {
        let list = self.cfg.profile.price_per_kwh;
        let policy = self.cfg.policy;
        let unreserved = (self.cfg.profile.available_energy - self.reserved_by_others(cid, now)).max(0.0);
        let state = self.negotiations.entry(cid.clone()).or_insert_with(|| SupplierNegotiation::new(list, &policy));
        let reply = state.respond(offer, unreserved, &policy);
        if let SupplierReply::Counter(counter) = reply {
            self.last_counter.insert(cid.clone(), counter);
            if counter.same_terms(offer) && !self.reserve(cid, Offer { hard: false, ..counter }, now) {
                return SupplierReply::Refuse;
            }
        }
        reply
    }

    fn coordinate(&mut self, cid: &Ident, proposal: &MeetingProposal, now: SimTime, position: Point) -> CoordinationReply {
        let live = self.reservations.get(cid).is_some_and(|r| r.is_live(now));
        if !live {
            // taking a hard offer goes straight to coordination
            match self.last_counter.get(cid).copied() {
                Some(hard) if hard.hard && self.reserve(cid, Offer { hard: false, ..hard }, now) => {}
                _ => return CoordinationReply::Reject,
            }
        }
        let round = {
            let r = self.coordination_rounds.entry(cid.clone()).or_insert(0);
            *r += 1;
            *r
        };
        let party = self.party(position);
        let reply = supplier_reply(proposal, &party, self.cfg.clock.minute_at(now), round);
        if let CoordinationReply::Accept(m) | CoordinationReply::Counter(m) = reply {
            if let Some(r) = self.reservations.get_mut(cid) {
                r.meeting = Some(m);
                r.party = Some(party);
            }
        }
        reply
    }

    /// Checks the echoed terms against this side's record. On a match the
    /// reservation becomes permanent and the transaction is logged; on a
    /// mismatch it is released.
    pub fn confirm(
        &mut self,
        cid: &Ident,
        meeting: &MeetingProposal,
        price: Price,
        amount_kwh: f64,
        now: SimTime,
    ) -> Option<TransactionRecord> {
        let r = self.reservations.get(cid).filter(|r| r.is_live(now))?.clone();
        let matches = r.meeting.as_ref() == Some(meeting)
            && r.offer.price_per_kwh == price
            && r.offer.amount_kwh == amount_kwh;
        if !matches {
            self.reservations.remove(cid);
            return None;
        }
        let record = TransactionRecord {
            cid: cid.clone(),
            pid: self.pid().clone(),
            price_per_kwh: price,
            amount_kwh,
            meeting: *meeting,
            confirmed_at: now,
        };
        if let Some(res) = self.reservations.get_mut(cid) {
            res.until = None;
        }
        if let Some(p) = r.party {
            self.meeting_parties.insert(cid.clone(), p);
        }
        self.records.push(record.clone());
        Some(record)
    }

    /// Consumers this supplier has confirmed.
    pub fn confirmed(&self) -> BTreeSet<Ident> {
        self.records.iter().map(|r| r.cid.clone()).collect()
    }
}

//! Consumer application: drives one charging session through the five
//! phases, one outstanding request at a time.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::filter::DiscoveryFilter;
use crate::message::{encode_name, Message, Phase};
use crate::name::Ident;
use crate::ndn::{verify_signature, Data, Token};
use crate::price::Price;
use crate::profile::{Fields, MeetingProposal, Offer, SupplierProfile};
use crate::sim::SimTime;

use super::coordination::{CoordinationReply, Party};
use super::negotiation::{consumer_move, ConsumerMove, NegotiationPolicy, SupplierReply};
use super::select::{select_supplier, Criterion};
use super::session::{ConsumerSession, ProtocolError, SessionPhase, TransactionRecord};
use super::{AppCtx, Clock};

/// A verified supplier whose location moved further than this is
/// treated as inconsistent, meters.
pub const LOCATION_TOLERANCE_M: f64 = 500.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerConfig {
    pub cid: Ident,
    pub desired_energy: f64,
    pub filter: DiscoveryFilter,
    pub criteria: Vec<Criterion>,
    pub target_discovery_count: usize,
    pub soc: f64,
    pub consumption_rate: f64,
    pub reserve_kwh: f64,
    pub travel_speed: f64,
    /// Minutes of day the consumer can meet in.
    pub window: (u32, u32),
    /// Offer the current position as the meeting point in round one.
    pub suggest_location: bool,
    pub policy: NegotiationPolicy,
    /// Highest acceptable price; falls back to the filter's cap, then the
    /// supplier's list price.
    pub ceiling: Option<Price>,
    /// Take the discovery reply as verified instead of asking again.
    pub combine_phases: bool,
    pub clock: Clock,
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Idle,
    Discovering { token: Token, fallback: bool },
    Verifying { token: Token, pid: Ident },
    Negotiating { token: Token, offer: Offer },
    Coordinating { token: Token, round: u32 },
    Confirming { token: Token, price: Price, amount: f64, meeting: MeetingProposal },
    Finished,
}

#[derive(Debug)]
pub struct ConsumerApp {
    cfg: ConsumerConfig,
    session: ConsumerSession,
    step: Step,
    rejected: BTreeSet<Ident>,
    /// Some rejection was for inconsistent data rather than a bad
    /// signature or silence.
    saw_inconsistency: bool,
    fallback_used: bool,
    /// Rounds spent with the current supplier.
    rounds_here: u32,
    /// Data this app accepted and whether each passed the signature check.
    received: Vec<bool>,
}

impl ConsumerApp {
    pub fn new(cfg: ConsumerConfig) -> Self {
        let mut session =
            ConsumerSession::new(cfg.cid.clone(), cfg.desired_energy, cfg.filter, cfg.soc, cfg.consumption_rate);
        session.criteria = cfg.criteria.clone();
        session.target_discovery_count = cfg.target_discovery_count;
        Self {
            cfg,
            session,
            step: Step::Idle,
            rejected: BTreeSet::new(),
            saw_inconsistency: false,
            fallback_used: false,
            rounds_here: 0,
            received: Vec::new(),
        }
    }

    pub fn session(&self) -> &ConsumerSession {
        &self.session
    }

    pub fn config(&self) -> &ConsumerConfig {
        &self.cfg
    }

    /// Signature outcome of every data packet handed to this app.
    pub fn signature_checks(&self) -> &[bool] {
        &self.received
    }

    pub fn is_finished(&self) -> bool {
        self.step == Step::Finished
    }

    pub fn start(&mut self, ctx: &mut AppCtx<'_>) {
        assert_eq!(self.step, Step::Idle, "session already started");
        self.session.advance(Phase::Discovery, ctx.now);
        self.discover(ctx, false, ctx.max_retx);
    }

    fn party(&self, ctx: &AppCtx<'_>) -> Party {
        Party {
            position: ctx.position,
            soc: self.cfg.soc,
            consumption_rate: self.cfg.consumption_rate,
            reserve_kwh: self.cfg.reserve_kwh,
            travel_speed: self.cfg.travel_speed,
        }
    }

    fn fail(&mut self, err: ProtocolError) {
        self.session.fail(err);
        self.step = Step::Finished;
    }

    fn known_pids(&self) -> BTreeSet<Ident> {
        self.session.candidates.iter().map(|c| c.pid.clone()).chain(self.rejected.iter().cloned()).collect()
    }

    fn open_candidates(&self) -> Vec<SupplierProfile> {
        self.session.candidates.iter().filter(|c| !self.rejected.contains(&c.pid)).cloned().collect()
    }

    fn discover(&mut self, ctx: &mut AppCtx<'_>, fallback: bool, max_retx: u32) {
        let msg = Message::Discovery { filter: self.cfg.filter, responder: None, timestamp: ctx.timestamp() };
        let token = ctx.express(encode_name(&msg), self.known_pids(), max_retx);
        self.step = Step::Discovering { token, fallback };
    }

    /// Hands over a data packet that satisfied request `token`.
    pub fn on_data(&mut self, token: Token, data: &Data, ctx: &mut AppCtx<'_>) {
        let authentic = verify_signature(data);
        self.received.push(authentic);
        match self.step.clone() {
            Step::Discovering { token: t, fallback } if t == token => self.on_discovery(data, authentic, fallback, ctx),
            Step::Verifying { token: t, pid } if t == token => self.on_verification(&pid, data, authentic, ctx),
            Step::Negotiating { token: t, offer } if t == token => self.on_counter(&offer, data, authentic, ctx),
            Step::Coordinating { token: t, round } if t == token => self.on_meeting(round, data, authentic, ctx),
            Step::Confirming { token: t, price, amount, meeting } if t == token => {
                self.on_ack(price, amount, meeting, data, authentic, ctx)
            }
            _ => {}
        }
    }

    /// Request `token` ran out of retransmissions.
    pub fn on_give_up(&mut self, token: Token, ctx: &mut AppCtx<'_>) {
        match self.step.clone() {
            Step::Discovering { token: t, fallback } if t == token => {
                if self.open_candidates().is_empty() {
                    if fallback {
                        self.fail(self.rejection_error());
                    } else {
                        self.fail(ProtocolError::DiscoveryFailed);
                    }
                } else {
                    self.finish_discovery(fallback, ctx);
                }
            }
            Step::Verifying { token: t, pid } if t == token => self.reject(pid, false, ctx),
            Step::Negotiating { token: t, .. } if t == token => self.fail(ProtocolError::Timeout(Phase::Negotiation)),
            Step::Coordinating { token: t, .. } if t == token => self.fail(ProtocolError::Timeout(Phase::Coordination)),
            Step::Confirming { token: t, .. } if t == token => self.fail(ProtocolError::Timeout(Phase::Confirmation)),
            _ => {}
        }
    }

    fn rejection_error(&self) -> ProtocolError {
        if self.session.phase == SessionPhase::Active(Phase::Negotiation) {
            ProtocolError::NegotiationFailed
        } else if self.saw_inconsistency {
            ProtocolError::AllCandidatesRejected
        } else {
            ProtocolError::VerificationFailed
        }
    }

    fn on_discovery(&mut self, data: &Data, authentic: bool, fallback: bool, ctx: &mut AppCtx<'_>) {
        let profile = data.payload_str().and_then(SupplierProfile::from_payload);
        if let Some(p) = profile.filter(|p| authentic && p.pid.as_str() == data.name.last()) {
            if !self.known_pids().contains(&p.pid) {
                self.session.candidates.push(p);
            }
        }
        if self.open_candidates().len() >= self.cfg.target_discovery_count.max(1) {
            self.finish_discovery(fallback, ctx);
        } else {
            // ask again, excluding everyone already heard from; a silent
            // re-expression ends discovery
            self.discover(ctx, fallback, 0);
        }
    }

    fn finish_discovery(&mut self, fallback: bool, ctx: &mut AppCtx<'_>) {
        if !fallback {
            self.session.advance(Phase::Verification, ctx.now);
        }
        self.verify_next(ctx);
    }

    fn verify_next(&mut self, ctx: &mut AppCtx<'_>) {
        let open = self.open_candidates();
        let Some(pid) = select_supplier(&open, ctx.position, &self.cfg.criteria).cloned() else {
            if self.fallback_used {
                self.fail(self.rejection_error());
            } else {
                self.fallback_used = true;
                self.discover(ctx, true, ctx.max_retx);
            }
            return;
        };
        self.session.selected = Some(pid.clone());
        if self.cfg.combine_phases {
            let profile = open.into_iter().find(|c| c.pid == pid).expect("selected from candidates");
            self.start_negotiation(profile, ctx);
            return;
        }
        let msg = Message::Verification { pid: pid.clone(), cid: None, timestamp: ctx.timestamp() };
        let token = ctx.express(encode_name(&msg), BTreeSet::new(), ctx.max_retx);
        self.step = Step::Verifying { token, pid };
    }

    fn reject(&mut self, pid: Ident, inconsistent: bool, ctx: &mut AppCtx<'_>) {
        self.saw_inconsistency |= inconsistent;
        self.rejected.insert(pid);
        self.session.selected = None;
        self.verify_next(ctx);
    }

    fn on_verification(&mut self, pid: &Ident, data: &Data, authentic: bool, ctx: &mut AppCtx<'_>) {
        if !authentic {
            return self.reject(pid.clone(), false, ctx);
        }
        let Some(actual) = data.payload_str().and_then(SupplierProfile::from_payload) else {
            return self.reject(pid.clone(), false, ctx);
        };
        let advertised = self.session.candidates.iter().find(|c| &c.pid == pid).expect("verifying a candidate");
        let consistent = actual.pid == *pid
            && actual.price_per_kwh == advertised.price_per_kwh
            && actual.available_energy == advertised.available_energy
            && actual.location.distance(&advertised.location) <= LOCATION_TOLERANCE_M;
        if !consistent {
            return self.reject(pid.clone(), true, ctx);
        }
        self.start_negotiation(actual, ctx);
    }

    fn ceiling(&self, list: Price) -> Price {
        self.cfg.ceiling.or(self.cfg.filter.max_price_per_kwh).unwrap_or(list)
    }

    fn start_negotiation(&mut self, profile: SupplierProfile, ctx: &mut AppCtx<'_>) {
        let opening = Offer::new(self.cfg.policy.opening_price(profile.price_per_kwh), self.cfg.desired_energy);
        self.session.verified = Some(profile);
        self.rounds_here = 0;
        // a supplier that sold out mid-negotiation sends us back here
        if self.session.phase != SessionPhase::Active(Phase::Negotiation) {
            self.session.advance(Phase::Negotiation, ctx.now);
        }
        self.send_offer(opening, ctx);
    }

    fn pid(&self) -> Ident {
        self.session.selected.clone().expect("supplier selected")
    }

    fn send_offer(&mut self, offer: Offer, ctx: &mut AppCtx<'_>) {
        let msg = Message::Negotiation {
            pid: self.pid(),
            offer,
            cid: Some(self.cfg.cid.clone()),
            timestamp: ctx.timestamp(),
        };
        let token = ctx.express(encode_name(&msg), BTreeSet::new(), ctx.max_retx);
        self.step = Step::Negotiating { token, offer };
    }

    fn on_counter(&mut self, last: &Offer, data: &Data, authentic: bool, ctx: &mut AppCtx<'_>) {
        self.session.negotiation_rounds += 1;
        self.rounds_here += 1;
        let reply = data.payload_str().and_then(SupplierReply::from_payload).filter(|_| authentic);
        let counter = match reply {
            Some(SupplierReply::Counter(c)) => c,
            // sold out: try whoever is next
            Some(SupplierReply::Refuse) => return self.reject(self.pid(), false, ctx),
            None => return self.fail(ProtocolError::NegotiationFailed),
        };
        let list = self.session.verified.as_ref().expect("verified").price_per_kwh;
        match consumer_move(last, &counter, list, self.ceiling(list), &self.cfg.policy) {
            ConsumerMove::Agree(agreed) => {
                self.session.agreement = Some(agreed);
                self.session.advance(Phase::Coordination, ctx.now);
                let proposal = MeetingProposal {
                    window_start: self.cfg.window.0,
                    window_end: self.cfg.window.1,
                    location: self.cfg.suggest_location.then_some(ctx.position),
                };
                self.propose(proposal, 1, ctx);
            }
            ConsumerMove::Propose(next) if self.rounds_here < self.cfg.policy.max_rounds => {
                self.send_offer(next, ctx)
            }
            _ => self.fail(ProtocolError::NegotiationFailed),
        }
    }

    fn propose(&mut self, proposal: MeetingProposal, round: u32, ctx: &mut AppCtx<'_>) {
        let msg = Message::Coordination {
            pid: self.pid(),
            proposal,
            cid: Some(self.cfg.cid.clone()),
            timestamp: ctx.timestamp(),
        };
        let token = ctx.express(encode_name(&msg), BTreeSet::new(), ctx.max_retx);
        self.step = Step::Coordinating { token, round };
    }

    fn on_meeting(&mut self, round: u32, data: &Data, authentic: bool, ctx: &mut AppCtx<'_>) {
        let reply = data.payload_str().and_then(CoordinationReply::from_payload).filter(|_| authentic);
        let me = self.party(ctx);
        let now_minute = self.cfg.clock.minute_at(ctx.now);
        let meeting = match reply {
            Some(CoordinationReply::Accept(m) | CoordinationReply::Counter(m)) => m,
            _ => return self.fail(ProtocolError::CoordinationFailed),
        };
        if me.accepts(&meeting, now_minute) {
            let agreed = self.session.agreement.expect("agreement before coordination");
            self.session.meeting = Some(meeting);
            self.session.meeting_check = Some(me);
            self.session.advance(Phase::Confirmation, ctx.now);
            let msg = Message::Confirmation {
                pid: self.pid(),
                meeting,
                price_per_kwh: agreed.price_per_kwh,
                amount_kwh: agreed.amount_kwh,
                cid: Some(self.cfg.cid.clone()),
                timestamp: ctx.timestamp(),
            };
            let token = ctx.express(encode_name(&msg), BTreeSet::new(), ctx.max_retx);
            self.step =
                Step::Confirming { token, price: agreed.price_per_kwh, amount: agreed.amount_kwh, meeting };
            return;
        }
        if round >= 2 {
            return self.fail(ProtocolError::CoordinationFailed);
        }
        let supplier_at = match meeting.location {
            Some(loc) if loc != ctx.position => loc,
            _ => self.session.verified.as_ref().expect("verified").location,
        };
        let proposal = MeetingProposal {
            window_start: self.cfg.window.0,
            window_end: self.cfg.window.1,
            location: Some(ctx.position.midpoint(&supplier_at)),
        };
        self.propose(proposal, round + 1, ctx);
    }

    fn on_ack(
        &mut self,
        price: Price,
        amount: f64,
        meeting: MeetingProposal,
        data: &Data,
        authentic: bool,
        ctx: &mut AppCtx<'_>,
    ) {
        let fields = data.payload_str().and_then(Fields::parse).filter(|_| authentic);
        let confirmed_at = fields
            .as_ref()
            .filter(|f| f.get("status") == Some("ack"))
            .and_then(|f| f.num("confirmed_at"));
        let Some(at) = confirmed_at else {
            return self.fail(ProtocolError::ConfirmationMismatch);
        };
        let record = TransactionRecord {
            cid: self.cfg.cid.clone(),
            pid: self.pid(),
            price_per_kwh: price,
            amount_kwh: amount,
            meeting,
            confirmed_at: SimTime::from_ms(at),
        };
        self.session.complete(record, ctx.now);
        self.step = Step::Finished;
    }

    /// Marks a session that never finished.
    pub fn abandon(&mut self) {
        if !self.session.is_finished() && self.session.phase != SessionPhase::Idle {
            self.fail(ProtocolError::Unfinished);
        }
    }
}

//! One simulated run: suppliers and consumers on a shared wireless
//! channel, each with its own forwarder, driven by the event kernel.
//!
//! Layout: suppliers sit on a ring around the arena centre (a lone
//! supplier sits at the centre) and consumer `i` is placed near supplier
//! `i % suppliers`, so everybody is within radio range of everybody else
//! at the default sizes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::filter::DiscoveryFilter;
use crate::geo::Point;
use crate::message::Phase;
use crate::name::{Ident, Name};
use crate::ndn::{
    Action, Data, DropReason, EventKind, EventRecord, FaceId, Forwarder, ForwarderConfig, Interest, Nonce,
    Packet, PendingInterests, TimeoutOutcome, Token,
};
use crate::price::Price;
use crate::profile::{SupplierProfile, TimeSlot};
use crate::protocol::{
    AppCtx, Behavior, Clock, ConsumerApp, ConsumerConfig, ConsumerSession, NegotiationPolicy, SessionPhase,
    SupplierApp, SupplierConfig, TransactionRecord, DEFAULT_CRITERIA,
};
use crate::sim::{rng_stream, Channel, ChannelConfig, Kernel, MobilityState, SimTime, MPH_TO_MPS};

pub const APP_FACE: FaceId = FaceId(0);
pub const AIR_FACE: FaceId = FaceId(1);

/// Speed assumed for travel-time estimates when vehicles are parked, mph.
const PARKED_TRAVEL_MPH: f64 = 30.0;

/// Everything that shapes one run besides the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub n_suppliers: usize,
    pub n_consumers: usize,
    pub discovery_target: usize,
    pub timeout_ms: f64,
    pub max_retx: u32,
    pub channel: ChannelConfig,
    /// On-air size of every protocol packet, bytes.
    pub packet_bytes: usize,
    pub speed_mph: f64,
    pub arena: f64,
    pub ring_radius: f64,
    pub consumer_spread: f64,
    /// Consumers start uniformly within `[0, start_jitter_ms)`.
    pub start_jitter_ms: f64,
    pub combine_phases: bool,
    pub suggest_location: bool,
    pub policy: NegotiationPolicy,
    pub desired_energy: f64,
    pub consumer_soc: f64,
    pub consumer_rate: f64,
    pub reserve_kwh: f64,
    pub supplier_energy: f64,
    pub supplier_soc: f64,
    pub supplier_rate: f64,
    pub supplier_price: Price,
    pub supplier_reputation: f64,
    pub supplier_slot: TimeSlot,
    pub filter: DiscoveryFilter,
    /// Adds a search area of this radius around each consumer, meters.
    pub filter_radius: Option<f64>,
    pub window: (u32, u32),
    pub clock: Clock,
    pub reservation_window_ms: f64,
    pub cs_capacity: usize,
    pub nonce_memory: usize,
    pub horizon_ms: f64,
    /// The first this-many suppliers advertise a lower price at discovery
    /// than they verify.
    pub misreporting: usize,
    /// The next this-many suppliers corrupt their verification replies.
    pub tampering: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        let price = |s: &str| s.parse::<Price>().expect("literal price");
        Self {
            n_suppliers: 1,
            n_consumers: 3,
            discovery_target: 1,
            timeout_ms: 30.0,
            max_retx: 12,
            channel: ChannelConfig::default(),
            packet_bytes: 256,
            speed_mph: 0.0,
            arena: 1000.0,
            ring_radius: 80.0,
            consumer_spread: 15.0,
            start_jitter_ms: 0.0,
            combine_phases: false,
            suggest_location: true,
            policy: NegotiationPolicy::default(),
            desired_energy: 20.0,
            consumer_soc: 5.0,
            consumer_rate: 0.2,
            reserve_kwh: 0.5,
            supplier_energy: 100.0,
            supplier_soc: 40.0,
            supplier_rate: 0.2,
            supplier_price: price("0.10"),
            supplier_reputation: 8.0,
            supplier_slot: TimeSlot { start: 840, end: 1020 },
            filter: DiscoveryFilter {
                area: None,
                max_price_per_kwh: Some(price("0.12")),
                min_energy: Some(20.0),
                min_reputation: None,
                window_start: Some(840),
                window_end: Some(900),
            },
            filter_radius: None,
            window: (840, 900),
            clock: Clock { start_minute: 840 },
            reservation_window_ms: 5.0 * 60_000.0,
            cs_capacity: 64,
            nonce_memory: 1000,
            horizon_ms: 60_000.0,
            misreporting: 0,
            tampering: 0,
        }
    }
}

impl ScenarioParams {
    fn travel_speed(&self) -> f64 {
        let mph = if self.speed_mph > 0.0 { self.speed_mph } else { PARKED_TRAVEL_MPH };
        mph * MPH_TO_MPS
    }

    pub fn supplier_pid(i: usize) -> Ident {
        Ident::new(format!("S{i:02}")).expect("valid pid")
    }

    pub fn consumer_cid(i: usize) -> Ident {
        Ident::new(format!("C{i:02}")).expect("valid cid")
    }
}

/// Simulation-wide checks gathered while the run executes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Audit {
    pub events_processed: u64,
    /// Every event fired no earlier than the previous one.
    pub clock_monotone: bool,
    /// `(node, name, nonce)` triples forwarded more than once.
    pub duplicate_forwards: usize,
    /// Data packets handed to consumer applications.
    pub data_delivered: usize,
    pub data_verified: usize,
    /// Largest `age - freshness` of any content-store hit (≤ 0 is good).
    pub worst_cache_staleness_ms: f64,
    /// Some supplier held more reservations than its surplus.
    pub reservation_overdraw: bool,
    /// Confirmed sessions whose two transaction records differ.
    pub record_mismatches: usize,
    /// Confirmed meetings one of the parties could not reach.
    pub infeasible_meetings: usize,
    /// Sessions whose phase start times do not strictly increase.
    pub phase_order_violations: usize,
    /// Interests put on the air.
    pub interests_on_air: u64,
    /// Data packets put on the air.
    pub data_on_air: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub seed: u64,
    /// One per consumer, in consumer order.
    pub sessions: Vec<ConsumerSession>,
    pub events: Vec<EventRecord>,
    /// Transaction records as logged by suppliers.
    pub supplier_records: Vec<TransactionRecord>,
    /// Interests handed to producer applications: (node, name).
    pub producer_requests: Vec<(usize, Name)>,
    pub audit: Audit,
}

enum App {
    Consumer(ConsumerApp),
    Supplier(SupplierApp),
}

struct Node {
    mobility: MobilityState,
    forwarder: Forwarder,
    rng: ChaCha8Rng,
    pending: PendingInterests,
    app: App,
    tx_free_at: SimTime,
    /// Data names queued or on the air from this node, with the time the
    /// transmission ends.
    on_air: BTreeMap<Name, SimTime>,
}

impl Node {
    fn position(&self, now: SimTime) -> Point {
        self.mobility.position_at(now.as_secs())
    }
}

enum Ev {
    Start(usize),
    Arrive { node: usize, packet: Packet },
    Timer { node: usize, token: Token, attempt: u32 },
}

pub struct World {
    params: ScenarioParams,
    seed: u64,
    kernel: Kernel<Ev>,
    channel: Channel,
    nodes: Vec<Node>,
    log: Vec<EventRecord>,
    forwarded: BTreeSet<(usize, Name, Nonce)>,
    producer_requests: Vec<(usize, Name)>,
    audit: Audit,
    last_fired: SimTime,
}

impl World {
    /// Builds the standard layout for `params`.
    pub fn new(params: &ScenarioParams, seed: u64) -> Self {
        let mut w = Self::empty(params, seed);
        let centre = Point::new(params.arena / 2.0, params.arena / 2.0);
        let mut sites = Vec::with_capacity(params.n_suppliers);
        for i in 0..params.n_suppliers {
            let site = if params.n_suppliers == 1 {
                centre
            } else {
                let a = TAU * i as f64 / params.n_suppliers as f64;
                Point::new(centre.x + params.ring_radius * libm::cos(a), centre.y + params.ring_radius * libm::sin(a))
            };
            sites.push(site);
            let behavior = if i < params.misreporting {
                Behavior::Misreport { discovery_price: params.supplier_price.scaled(0.8) }
            } else if i < params.misreporting + params.tampering {
                Behavior::TamperVerification
            } else {
                Behavior::Honest
            };
            w.add_supplier(site, behavior);
        }
        for i in 0..params.n_consumers {
            let anchor = if sites.is_empty() { centre } else { sites[i % sites.len()] };
            w.add_consumer_near(anchor);
        }
        w
    }

    /// A world with no nodes.
    pub fn empty(params: &ScenarioParams, seed: u64) -> Self {
        Self {
            params: params.clone(),
            seed,
            kernel: Kernel::new(),
            channel: Channel::new(params.channel, rng_stream(seed, 0)),
            nodes: Vec::new(),
            log: Vec::new(),
            forwarded: BTreeSet::new(),
            producer_requests: Vec::new(),
            audit: Audit { clock_monotone: true, worst_cache_staleness_ms: f64::NEG_INFINITY, ..Audit::default() },
            last_fired: SimTime::ZERO,
        }
    }

    fn node_rng(&self) -> ChaCha8Rng {
        rng_stream(self.seed, self.nodes.len() as u64 + 1)
    }

    fn mobility(&self, origin: Point, rng: &mut ChaCha8Rng) -> MobilityState {
        if self.params.speed_mph > 0.0 {
            let heading = rng.random::<f64>() * TAU;
            MobilityState::moving(origin, self.params.speed_mph, heading, self.params.arena)
        } else {
            MobilityState::stationary(origin, self.params.arena)
        }
    }

    fn forwarder(&self, producer: bool) -> Forwarder {
        Forwarder::new(ForwarderConfig {
            cs_capacity: self.params.cs_capacity,
            nonce_memory: self.params.nonce_memory,
            broadcast_face: AIR_FACE,
            producer_face: producer.then_some(APP_FACE),
        })
    }

    fn supplier_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.app, App::Supplier(_))).count()
    }

    fn consumer_count(&self) -> usize {
        self.nodes.len() - self.supplier_count()
    }

    /// Adds a supplier at `site`; returns its node index.
    pub fn add_supplier(&mut self, site: Point, behavior: Behavior) -> usize {
        let p = &self.params;
        let cfg = SupplierConfig {
            profile: SupplierProfile {
                pid: ScenarioParams::supplier_pid(self.supplier_count()),
                location: site,
                price_per_kwh: p.supplier_price,
                available_energy: p.supplier_energy,
                reputation: p.supplier_reputation,
                free_slots: alloc::vec![p.supplier_slot],
                soc: p.supplier_soc,
                consumption_rate: p.supplier_rate,
                reserved_until: None,
            },
            policy: p.policy,
            reserve_kwh: p.reserve_kwh,
            travel_speed: p.travel_speed(),
            reservation_window_ms: p.reservation_window_ms,
            clock: p.clock,
            behavior,
        };
        let mut rng = self.node_rng();
        let mobility = self.mobility(site, &mut rng);
        self.push_node(mobility, rng, App::Supplier(SupplierApp::new(cfg)))
    }

    /// Adds a consumer somewhere within `consumer_spread` of `anchor`.
    pub fn add_consumer_near(&mut self, anchor: Point) -> usize {
        let mut rng = self.node_rng();
        let a = rng.random::<f64>() * TAU;
        let r = self.params.consumer_spread * libm::sqrt(rng.random::<f64>());
        let origin = Point::new(anchor.x + r * libm::cos(a), anchor.y + r * libm::sin(a));
        let start = if self.params.start_jitter_ms > 0.0 {
            rng.random::<f64>() * self.params.start_jitter_ms
        } else {
            0.0
        };
        self.add_consumer_with_rng(origin, start, rng)
    }

    /// Adds a consumer at exactly `origin`, starting at `start_ms`.
    pub fn add_consumer(&mut self, origin: Point, start_ms: f64) -> usize {
        let rng = self.node_rng();
        self.add_consumer_with_rng(origin, start_ms, rng)
    }

    fn add_consumer_with_rng(&mut self, origin: Point, start_ms: f64, mut rng: ChaCha8Rng) -> usize {
        let p = &self.params;
        let mut filter = p.filter;
        if let Some(radius) = p.filter_radius {
            filter.area = Some(crate::filter::Area { center: origin, radius });
        }
        let cfg = ConsumerConfig {
            cid: ScenarioParams::consumer_cid(self.consumer_count()),
            desired_energy: p.desired_energy,
            filter,
            criteria: DEFAULT_CRITERIA.to_vec(),
            target_discovery_count: p.discovery_target,
            soc: p.consumer_soc,
            consumption_rate: p.consumer_rate,
            reserve_kwh: p.reserve_kwh,
            travel_speed: p.travel_speed(),
            window: p.window,
            suggest_location: p.suggest_location,
            policy: p.policy,
            ceiling: None,
            combine_phases: p.combine_phases,
            clock: p.clock,
        };
        let mobility = self.mobility(origin, &mut rng);
        let idx = self.push_node(mobility, rng, App::Consumer(ConsumerApp::new(cfg)));
        self.kernel.schedule_at(SimTime::from_ms(start_ms), Ev::Start(idx));
        idx
    }

    fn push_node(&mut self, mobility: MobilityState, rng: ChaCha8Rng, app: App) -> usize {
        let producer = matches!(app, App::Supplier(_));
        let node = Node {
            mobility,
            forwarder: self.forwarder(producer),
            rng,
            pending: PendingInterests::new(),
            app,
            tx_free_at: SimTime::ZERO,
            on_air: BTreeMap::new(),
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Direct access to the channel, e.g. to script losses.
    pub fn channel_mut(&mut self) -> &mut Channel {
        &mut self.channel
    }

    pub fn position_of(&self, node: usize) -> Point {
        self.nodes[node].position(self.kernel.now())
    }

    fn now(&self) -> SimTime {
        self.kernel.now()
    }

    fn record(&mut self, node: usize, kind: EventKind, name: &Name, nonce: Option<Nonce>) {
        self.log.push(EventRecord { time: self.now(), node, kind, name: name.clone(), nonce });
    }

    /// Runs to completion (or the horizon) and collects the results.
    pub fn run(mut self) -> RunOutput {
        let horizon = SimTime::from_ms(self.params.horizon_ms);
        while let Some((at, ev)) = self.kernel.pop_until(horizon) {
            if at < self.last_fired {
                self.audit.clock_monotone = false;
            }
            self.last_fired = at;
            self.audit.events_processed += 1;
            match ev {
                Ev::Start(node) => self.start(node),
                Ev::Arrive { node, packet } => match packet {
                    Packet::Interest(i) => self.interest_in(node, i, AIR_FACE),
                    Packet::Data(d) => self.data_in(node, d, AIR_FACE),
                },
                Ev::Timer { node, token, attempt } => self.timer(node, token, attempt),
            }
        }
        self.finish()
    }

    fn with_consumer<F>(&mut self, node: usize, f: F)
    where
        F: FnOnce(&mut ConsumerApp, &mut AppCtx<'_>),
    {
        let now = self.now();
        let (timeout, max_retx) = (self.params.timeout_ms, self.params.max_retx);
        let mut outbox = Vec::new();
        {
            let n = &mut self.nodes[node];
            let position = n.position(now);
            let App::Consumer(app) = &mut n.app else { return };
            let mut ctx = AppCtx::new(now, position, timeout, max_retx, &mut n.pending, &mut n.rng, &mut outbox);
            f(app, &mut ctx);
        }
        for (token, interest) in outbox {
            self.kernel.schedule(timeout, Ev::Timer { node, token, attempt: 0 });
            self.interest_in(node, interest, APP_FACE);
        }
    }

    fn start(&mut self, node: usize) {
        self.with_consumer(node, |app, ctx| app.start(ctx));
    }

    fn timer(&mut self, node: usize, token: Token, attempt: u32) {
        let n = &mut self.nodes[node];
        let Some(name) = n.pending.name(token).cloned() else { return };
        match n.pending.on_timeout(token, attempt, &mut n.rng) {
            TimeoutOutcome::Stale => {}
            TimeoutOutcome::Retransmit { interest, attempt } => {
                self.record(node, EventKind::Timeout, &name, None);
                self.kernel.schedule(self.params.timeout_ms, Ev::Timer { node, token, attempt });
                self.interest_in(node, interest, APP_FACE);
            }
            TimeoutOutcome::GaveUp => {
                self.record(node, EventKind::Timeout, &name, None);
                self.with_consumer(node, |app, ctx| app.on_give_up(token, ctx));
            }
        }
    }

    fn interest_in(&mut self, node: usize, interest: Interest, face: FaceId) {
        let now = self.now();
        self.record(node, EventKind::Recv, &interest.name, Some(interest.nonce));
        let actions = self.nodes[node].forwarder.on_interest(interest.clone(), face, now);
        for action in actions {
            match action {
                Action::ForwardInterest { face, interest } => {
                    if !self.forwarded.insert((node, interest.name.clone(), interest.nonce)) {
                        self.audit.duplicate_forwards += 1;
                    }
                    self.record(node, EventKind::Send, &interest.name, Some(interest.nonce));
                    if face == AIR_FACE {
                        self.transmit(node, Packet::Interest(interest));
                    } else {
                        self.hand_to_producer(node, &interest);
                    }
                }
                Action::SendData { face, data } => self.send_data(node, face, data),
                Action::CacheHit => self.record(node, EventKind::CacheHit, &interest.name, Some(interest.nonce)),
                Action::Aggregated => self.record(node, EventKind::Aggregate, &interest.name, Some(interest.nonce)),
                Action::Dropped(_) => self.record(node, EventKind::Drop, &interest.name, Some(interest.nonce)),
            }
        }
    }

    fn hand_to_producer(&mut self, node: usize, interest: &Interest) {
        let now = self.now();
        let n = &mut self.nodes[node];
        let position = n.position(now);
        let App::Supplier(app) = &mut n.app else { return };
        self.producer_requests.push((node, interest.name.clone()));
        if let Some(data) = app.on_interest(interest, now, position) {
            self.data_in(node, data, APP_FACE);
        }
    }

    fn data_in(&mut self, node: usize, data: Data, face: FaceId) {
        let now = self.now();
        self.record(node, EventKind::Recv, &data.name, None);
        let actions = self.nodes[node].forwarder.on_data(data.clone(), face, now);
        for action in actions {
            match action {
                Action::SendData { face, data } => self.send_data(node, face, data),
                Action::Dropped(DropReason::Unsolicited) => self.record(node, EventKind::Drop, &data.name, None),
                _ => {}
            }
        }
    }

    fn send_data(&mut self, node: usize, face: FaceId, data: Data) {
        if face == AIR_FACE {
            let now = self.now();
            // an identical packet still waiting for or using the medium
            // reaches every neighbour anyway
            if self.nodes[node].on_air.get(&data.name).is_some_and(|end| *end > now) {
                return;
            }
            self.record(node, EventKind::Send, &data.name, None);
            self.transmit(node, Packet::Data(data));
            return;
        }
        self.record(node, EventKind::Send, &data.name, None);
        let tokens = self.nodes[node].pending.on_data(&data);
        for token in tokens {
            self.with_consumer(node, |app, ctx| app.on_data(token, &data, ctx));
        }
    }

    /// Queues `packet` behind this node's earlier transmissions and fans
    /// it out to every node in range.
    fn transmit(&mut self, node: usize, packet: Packet) {
        let now = self.now();
        let ser = self.channel.config().serialization_ms(self.params.packet_bytes);
        let start = self.nodes[node].tx_free_at.max(now);
        let end = start + ser;
        self.nodes[node].tx_free_at = end;
        match &packet {
            Packet::Interest(_) => self.audit.interests_on_air += 1,
            Packet::Data(d) => {
                self.audit.data_on_air += 1;
                self.nodes[node].on_air.insert(d.name.clone(), end);
            }
        }
        let sender_pos = self.nodes[node].position(start);
        let receivers: Vec<(usize, Point)> =
            self.nodes.iter().enumerate().map(|(i, n)| (i, n.position(start))).collect();
        let deliveries = self.channel.broadcast(node, sender_pos, receivers, self.params.packet_bytes, start);
        for d in deliveries.into_iter().filter(|d| !d.lost) {
            self.kernel.schedule_at(d.at, Ev::Arrive { node: d.to, packet: packet.clone() });
        }
    }

    fn finish(mut self) -> RunOutput {
        let mut sessions = Vec::new();
        let mut supplier_records = Vec::new();
        let mut delivered = 0;
        let mut verified = 0;
        for n in &mut self.nodes {
            self.audit.worst_cache_staleness_ms =
                self.audit.worst_cache_staleness_ms.max(n.forwarder.stats().worst_served_staleness_ms);
            match &mut n.app {
                App::Consumer(app) => {
                    app.abandon();
                    delivered += app.signature_checks().len();
                    verified += app.signature_checks().iter().filter(|ok| **ok).count();
                    sessions.push(app.session().clone());
                }
                App::Supplier(app) => {
                    if app.peak_reserved_kwh() > app.config().profile.available_energy + 1e-9 {
                        self.audit.reservation_overdraw = true;
                    }
                    supplier_records.extend(app.records().iter().cloned());
                }
            }
        }
        self.audit.data_delivered = delivered;
        self.audit.data_verified = verified;

        for s in &sessions {
            let starts: Vec<SimTime> = Phase::ALL.iter().filter_map(|p| s.timings.start(*p)).collect();
            let strictly = starts.windows(2).all(|w| w[0] < w[1]);
            let ordered = starts.windows(2).all(|w| w[0] <= w[1]);
            // a combined discovery+verification leaves a zero-length phase
            if !(strictly || (self.params.combine_phases && ordered)) {
                self.audit.phase_order_violations += 1;
            }
            if s.phase != SessionPhase::Done {
                continue;
            }
            let rec = s.record.as_ref().expect("done sessions carry a record");
            let theirs = supplier_records.iter().find(|r| r.cid == rec.cid && r.pid == rec.pid);
            if theirs.map(TransactionRecord::to_payload) != Some(rec.to_payload()) {
                self.audit.record_mismatches += 1;
            }
            let loc = rec.meeting.location;
            let supplier_party = self.nodes.iter().find_map(|n| match &n.app {
                App::Supplier(app) if app.pid() == &rec.pid => app.meeting_party(&rec.cid).copied(),
                _ => None,
            });
            let feasible = match (loc, s.meeting_check, supplier_party) {
                (Some(l), Some(c), Some(sp)) => c.can_reach(l) && sp.can_reach(l),
                _ => false,
            };
            if !feasible {
                self.audit.infeasible_meetings += 1;
            }
        }

        RunOutput {
            seed: self.seed,
            sessions,
            events: self.log,
            supplier_records,
            producer_requests: self.producer_requests,
            audit: self.audit,
        }
    }
}

impl core::fmt::Debug for World {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("World").field("seed", &self.seed).field("nodes", &self.nodes.len()).finish()
    }
}

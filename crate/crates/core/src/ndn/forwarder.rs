//! Per-node forwarding logic: content store lookup, interest aggregation,
//! nonce-based loop suppression and reverse-path data delivery.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use super::cs::ContentStore;
use super::packet::{Data, Interest, Nonce};
use super::pit::Pit;
use crate::message::parse_name;
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    DuplicateNonce,
    NoRoute,
    Unsolicited,
    Malformed,
}

/// What the node does in response to a packet.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    ForwardInterest { face: FaceId, interest: Interest },
    SendData { face: FaceId, data: Data },
    /// Interest answered from the content store.
    CacheHit,
    /// Interest folded into an existing PIT entry.
    Aggregated,
    Dropped(DropReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwarderConfig {
    pub cs_capacity: usize,
    pub nonce_memory: usize,
    /// The shared wireless face.
    pub broadcast_face: FaceId,
    /// Local producer application, if this node serves the namespace.
    pub producer_face: Option<FaceId>,
}

impl Default for ForwarderConfig {
    fn default() -> Self {
        Self { cs_capacity: 64, nonce_memory: 1000, broadcast_face: FaceId(1), producer_face: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForwarderStats {
    pub interests_in: u64,
    pub data_in: u64,
    pub forwarded: u64,
    pub aggregated: u64,
    pub cache_hits: u64,
    pub duplicate_nonces: u64,
    pub no_route: u64,
    pub unsolicited: u64,
    pub malformed: u64,
    /// Largest `age - freshness` of any cache-served packet (never > 0).
    pub worst_served_staleness_ms: f64,
}

#[derive(Debug)]
struct NonceMemory {
    capacity: usize,
    order: VecDeque<Nonce>,
    seen: BTreeSet<Nonce>,
}

impl NonceMemory {
    fn remember(&mut self, nonce: Nonce) -> bool {
        if self.seen.contains(&nonce) {
            return false;
        }
        if self.capacity == 0 {
            return true;
        }
        if self.order.len() == self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.seen.remove(&old);
            }
        }
        self.order.push_back(nonce);
        self.seen.insert(nonce);
        true
    }
}

#[derive(Debug)]
pub struct Forwarder {
    config: ForwarderConfig,
    pit: Pit,
    cs: ContentStore,
    nonces: NonceMemory,
    stats: ForwarderStats,
}

impl Forwarder {
    pub fn new(config: ForwarderConfig) -> Self {
        Self {
            config,
            pit: Pit::new(),
            cs: ContentStore::new(config.cs_capacity),
            nonces: NonceMemory {
                capacity: config.nonce_memory,
                order: VecDeque::new(),
                seen: BTreeSet::new(),
            },
            stats: ForwarderStats { worst_served_staleness_ms: f64::NEG_INFINITY, ..Default::default() },
        }
    }

    pub fn config(&self) -> &ForwarderConfig {
        &self.config
    }

    pub fn stats(&self) -> &ForwarderStats {
        &self.stats
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn on_interest(&mut self, interest: Interest, in_face: FaceId, now: SimTime) -> Vec<Action> {
        self.stats.interests_in += 1;
        if parse_name(&interest.name).is_err() {
            self.stats.malformed += 1;
            return alloc::vec![Action::Dropped(DropReason::Malformed)];
        }
        if !self.nonces.remember(interest.nonce) {
            self.stats.duplicate_nonces += 1;
            return alloc::vec![Action::Dropped(DropReason::DuplicateNonce)];
        }

        if in_face == self.config.broadcast_face && self.config.producer_face.is_none() {
            // single hop: only producers answer what they hear on the air
            self.stats.no_route += 1;
            return alloc::vec![Action::Dropped(DropReason::NoRoute)];
        }

        if let Some(hit) = self.cs.lookup(&interest.name, &interest.exclude, now) {
            let staleness = (now - hit.inserted_at) - hit.data.freshness_ms;
            self.stats.worst_served_staleness_ms = self.stats.worst_served_staleness_ms.max(staleness);
            self.stats.cache_hits += 1;
            let data = hit.data.clone();
            return alloc::vec![Action::CacheHit, Action::SendData { face: in_face, data }];
        }

        if let Some(entry) = self.pit.find_mut(&interest, now) {
            entry.downstream.insert(in_face);
            entry.nonces.insert(interest.nonce);
            self.stats.aggregated += 1;
            return alloc::vec![Action::Aggregated];
        }

        let out = match self.config.producer_face {
            Some(app) if in_face == self.config.broadcast_face => app,
            _ => self.config.broadcast_face,
        };
        self.pit.purge_expired(now);
        self.pit.insert(&interest, in_face, now);
        self.stats.forwarded += 1;
        alloc::vec![Action::ForwardInterest { face: out, interest }]
    }

    pub fn on_data(&mut self, data: Data, in_face: FaceId, now: SimTime) -> Vec<Action> {
        self.stats.data_in += 1;
        let entries = self.pit.take_matching(&data.name, now);
        if entries.is_empty() {
            self.stats.unsolicited += 1;
            return alloc::vec![Action::Dropped(DropReason::Unsolicited)];
        }
        let faces: BTreeSet<FaceId> =
            entries.iter().flat_map(|e| e.downstream.iter().copied()).filter(|f| *f != in_face).collect();
        self.cs.insert(data.clone(), now);
        faces.into_iter().map(|face| Action::SendData { face, data: data.clone() }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::{Ident, Name};
    use alloc::format;

    const APP: FaceId = FaceId(0);
    const AIR: FaceId = FaceId(1);

    fn t(ms: f64) -> SimTime {
        SimTime::from_ms(ms)
    }

    fn name(s: &str) -> Name {
        s.parse().unwrap()
    }

    fn interest(n: &str, nonce: u64) -> Interest {
        Interest::new(name(n), Nonce(nonce), 30.0)
    }

    fn data(n: &str) -> Data {
        Data::signed(name(n), b"p".to_vec(), Ident::new("EV1").unwrap(), 100.0)
    }

    fn forwards(actions: &[Action]) -> usize {
        actions.iter().filter(|a| matches!(a, Action::ForwardInterest { .. })).count()
    }

    const V: &str = "/FastCharging/EV1/Verification/5";

    #[test]
    fn fresh_node_forwards_and_records() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        let a = f.on_interest(interest(V, 1), APP, t(0.0));
        assert_eq!(forwards(&a), 1);
        assert!(matches!(&a[0], Action::ForwardInterest { face, .. } if *face == AIR));
        assert_eq!(f.pit().len(), 1);
    }

    #[test]
    fn second_interest_aggregates() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        f.on_interest(interest(V, 1), FaceId(10), t(0.0));
        let a = f.on_interest(interest(V, 2), FaceId(11), t(0.1));
        assert_eq!(a, alloc::vec![Action::Aggregated]);
        let e = f.pit().iter().next().unwrap();
        assert_eq!(e.downstream.len(), 2);

        let out = f.on_data(data(V), AIR, t(0.2));
        assert_eq!(out.len(), 2);
        assert!(f.pit().is_empty());
        assert_eq!(f.cs().len(), 1);
    }

    #[test]
    fn cached_data_served_without_forwarding() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        f.on_interest(interest(V, 1), APP, t(0.0));
        f.on_data(data(V), AIR, t(0.2));
        let a = f.on_interest(interest(V, 2), FaceId(3), t(1.0));
        assert_eq!(forwards(&a), 0);
        assert!(matches!(&a[1], Action::SendData { face, .. } if *face == FaceId(3)));
        // expired after freshness
        let a = f.on_interest(interest(V, 3), FaceId(3), t(100.3));
        assert_eq!(forwards(&a), 1);
        assert!(f.stats().worst_served_staleness_ms <= 0.0);
    }

    #[test]
    fn duplicate_nonce_dropped() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        f.on_interest(interest(V, 9), APP, t(0.0));
        let a = f.on_interest(interest(V, 9), AIR, t(0.1));
        assert_eq!(a, alloc::vec![Action::Dropped(DropReason::DuplicateNonce)]);
    }

    #[test]
    fn unsolicited_data_dropped() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        let a = f.on_data(data(V), AIR, t(0.0));
        assert_eq!(a, alloc::vec![Action::Dropped(DropReason::Unsolicited)]);
        assert!(f.cs().is_empty());
    }

    #[test]
    fn wireless_interest_goes_to_producer_or_nowhere() {
        let mut consumer = Forwarder::new(ForwarderConfig::default());
        let a = consumer.on_interest(interest(V, 1), AIR, t(0.0));
        assert_eq!(a, alloc::vec![Action::Dropped(DropReason::NoRoute)]);

        let mut supplier = Forwarder::new(ForwarderConfig { producer_face: Some(APP), ..Default::default() });
        let a = supplier.on_interest(interest(V, 1), AIR, t(0.0));
        assert!(matches!(&a[0], Action::ForwardInterest { face, .. } if *face == APP));
    }

    #[test]
    fn malformed_interest_dropped() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        let a = f.on_interest(interest("/FastCharging/Bogus", 1), APP, t(0.0));
        assert_eq!(a, alloc::vec![Action::Dropped(DropReason::Malformed)]);
        assert_eq!(f.stats().malformed, 1);
    }

    #[test]
    fn discovery_reply_extends_interest_name() {
        let base = "/FastCharging/Discovery/-/-/-/-/-/-/0";
        let mut f = Forwarder::new(ForwarderConfig::default());
        f.on_interest(interest(base, 1), APP, t(0.0));
        let out = f.on_data(data(&format!("{base}/EV1")), AIR, t(0.2));
        assert!(matches!(&out[..], [Action::SendData { face, .. }] if *face == APP));
    }

    #[test]
    fn expired_pit_entry_does_not_aggregate() {
        let mut f = Forwarder::new(ForwarderConfig::default());
        f.on_interest(interest(V, 1), APP, t(0.0));
        let a = f.on_interest(interest(V, 2), APP, t(30.0));
        assert_eq!(forwards(&a), 1);
    }

    #[test]
    fn nonce_memory_is_bounded() {
        let mut f = Forwarder::new(ForwarderConfig { nonce_memory: 2, ..Default::default() });
        for n in 0..3 {
            f.on_interest(interest(&format!("/FastCharging/EV1/Verification/{n}"), n), APP, t(0.0));
        }
        // nonce 0 has been forgotten
        let a = f.on_interest(interest("/FastCharging/EV1/Verification/9", 0), APP, t(0.0));
        assert_eq!(forwards(&a), 1);
    }
}

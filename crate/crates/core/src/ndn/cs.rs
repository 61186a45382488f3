//! Content Store with freshness expiry and LRU eviction.

use alloc::collections::{BTreeMap, BTreeSet};

use super::packet::Data;
use super::satisfies;
use crate::name::{Ident, Name};
use crate::sim::SimTime;

#[derive(Debug, Clone)]
pub struct CsEntry {
    pub data: Data,
    pub inserted_at: SimTime,
    last_used: u64,
}

impl CsEntry {
    /// Servable iff its age does not exceed the data's freshness period.
    pub fn is_fresh(&self, now: SimTime) -> bool {
        now - self.inserted_at <= self.data.freshness_ms
    }
}

#[derive(Debug)]
pub struct ContentStore {
    capacity: usize,
    entries: BTreeMap<Name, CsEntry>,
    tick: u64,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, entries: BTreeMap::new(), tick: 0 }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, data: Data, now: SimTime) {
        if self.capacity == 0 {
            return;
        }
        self.evict_stale(now);
        self.tick += 1;
        let entry = CsEntry { data, inserted_at: now, last_used: self.tick };
        self.entries.insert(entry.data.name.clone(), entry);
        while self.entries.len() > self.capacity {
            let lru = self
                .entries
                .iter()
                .min_by_key(|(_, e)| e.last_used)
                .map(|(k, _)| k.clone())
                .expect("non-empty");
            self.entries.remove(&lru);
        }
    }

    pub fn evict_stale(&mut self, now: SimTime) {
        self.entries.retain(|_, e| e.is_fresh(now));
    }

    /// Fresh entry answering an interest: the exact name, or for discovery
    /// broadcasts the first non-excluded responder in name order.
    pub fn lookup(&mut self, name: &Name, exclude: &BTreeSet<Ident>, now: SimTime) -> Option<&CsEntry> {
        let key = self
            .entries
            .range(name.clone()..)
            .take_while(|(k, _)| name.is_prefix_of(k))
            .find(|(k, e)| e.is_fresh(now) && satisfies(name, exclude, k))
            .map(|(k, _)| k.clone())?;
        self.tick += 1;
        let entry = self.entries.get_mut(&key)?;
        entry.last_used = self.tick;
        Some(entry)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }
}

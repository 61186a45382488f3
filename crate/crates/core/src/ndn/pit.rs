//! Pending Interest Table.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::forwarder::FaceId;
use super::packet::{Interest, Nonce};
use super::satisfies;
use crate::name::{Ident, Name};
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct PitEntry {
    pub name: Name,
    pub exclude: BTreeSet<Ident>,
    pub downstream: BTreeSet<FaceId>,
    pub nonces: BTreeSet<Nonce>,
    pub expiry: SimTime,
}

impl PitEntry {
    pub fn is_live(&self, now: SimTime) -> bool {
        self.expiry > now
    }
}

/// Entries keyed by name; interests that differ only in their exclude set
/// get separate entries.
#[derive(Debug, Default)]
pub struct Pit {
    entries: BTreeMap<Name, Vec<PitEntry>>,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn purge_expired(&mut self, now: SimTime) {
        self.entries.retain(|_, v| {
            v.retain(|e| e.is_live(now));
            !v.is_empty()
        });
    }

    /// Live entry for exactly this interest (name and exclude set).
    pub fn find_mut(&mut self, interest: &Interest, now: SimTime) -> Option<&mut PitEntry> {
        self.entries
            .get_mut(&interest.name)?
            .iter_mut()
            .find(|e| e.exclude == interest.exclude && e.is_live(now))
    }

    pub fn insert(&mut self, interest: &Interest, face: FaceId, now: SimTime) {
        let entry = PitEntry {
            name: interest.name.clone(),
            exclude: interest.exclude.clone(),
            downstream: [face].into_iter().collect(),
            nonces: [interest.nonce].into_iter().collect(),
            expiry: now + interest.lifetime_ms,
        };
        let slot = self.entries.entry(interest.name.clone()).or_default();
        slot.retain(|e| e.exclude != entry.exclude);
        slot.push(entry);
    }

    /// Removes and returns every live entry the data name satisfies.
    pub fn take_matching(&mut self, data_name: &Name, now: SimTime) -> Vec<PitEntry> {
        let mut out = Vec::new();
        let mut keys: Vec<Name> = Vec::with_capacity(2);
        keys.push(data_name.clone());
        if let Some(parent) = data_name.parent() {
            keys.push(parent);
        }
        for key in keys {
            let Some(slot) = self.entries.get_mut(&key) else { continue };
            let mut i = 0;
            while i < slot.len() {
                let e = &slot[i];
                if e.is_live(now) && satisfies(&e.name, &e.exclude, data_name) {
                    out.push(slot.swap_remove(i));
                } else {
                    i += 1;
                }
            }
            if slot.is_empty() {
                self.entries.remove(&key);
            }
        }
        out.sort_by(|a, b| (&a.name, &a.exclude).cmp(&(&b.name, &b.exclude)));
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values().flatten()
    }
}

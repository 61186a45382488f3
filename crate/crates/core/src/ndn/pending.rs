//! Consumer-side bookkeeping for expressed interests: timeouts and
//! retransmission with fresh nonces.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::RngCore;

use super::packet::{Data, Interest, Nonce};
use super::satisfies;
use crate::name::{Ident, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(pub u64);

#[derive(Debug, Clone)]
struct Pending {
    name: Name,
    exclude: BTreeSet<Ident>,
    timeout_ms: f64,
    retx_left: u32,
    attempt: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeoutOutcome {
    /// Already satisfied, or a timer from an earlier attempt.
    Stale,
    Retransmit { interest: Interest, attempt: u32 },
    GaveUp,
}

#[derive(Debug, Default)]
pub struct PendingInterests {
    next: u64,
    entries: BTreeMap<Token, Pending>,
}

fn fresh_interest(p: &Pending, rng: &mut impl RngCore) -> Interest {
    Interest::new(p.name.clone(), Nonce(rng.next_u64()), p.timeout_ms).with_exclude(p.exclude.clone())
}

impl PendingInterests {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a new request and returns the first transmission. The
    /// caller arms a timer for `timeout_ms` tagged with attempt 0.
    pub fn express(
        &mut self,
        name: Name,
        exclude: BTreeSet<Ident>,
        timeout_ms: f64,
        max_retx: u32,
        rng: &mut impl RngCore,
    ) -> (Token, Interest) {
        let token = Token(self.next);
        self.next += 1;
        let p = Pending { name, exclude, timeout_ms, retx_left: max_retx, attempt: 0 };
        let interest = fresh_interest(&p, rng);
        self.entries.insert(token, p);
        (token, interest)
    }

    pub fn name(&self, token: Token) -> Option<&Name> {
        self.entries.get(&token).map(|p| &p.name)
    }

    pub fn timeout_ms(&self, token: Token) -> Option<f64> {
        self.entries.get(&token).map(|p| p.timeout_ms)
    }

    pub fn on_timeout(&mut self, token: Token, attempt: u32, rng: &mut impl RngCore) -> TimeoutOutcome {
        let Some(p) = self.entries.get_mut(&token) else { return TimeoutOutcome::Stale };
        if p.attempt != attempt {
            return TimeoutOutcome::Stale;
        }
        if p.retx_left == 0 {
            self.entries.remove(&token);
            return TimeoutOutcome::GaveUp;
        }
        p.retx_left -= 1;
        p.attempt += 1;
        let attempt = p.attempt;
        let interest = fresh_interest(p, rng);
        TimeoutOutcome::Retransmit { interest, attempt }
    }

    /// Removes and returns the requests `data` satisfies.
    pub fn on_data(&mut self, data: &Data) -> Vec<Token> {
        let hits: Vec<Token> = self
            .entries
            .iter()
            .filter(|(_, p)| satisfies(&p.name, &p.exclude, &data.name))
            .map(|(t, _)| *t)
            .collect();
        for t in &hits {
            self.entries.remove(t);
        }
        hits
    }

    pub fn cancel(&mut self, token: Token) {
        self.entries.remove(&token);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

//! The five-phase charging protocol: rule sets for each phase and the
//! consumer/supplier applications that run them over the forwarder.

pub mod consumer;
pub mod coordination;
pub mod feasibility;
pub mod negotiation;
pub mod select;
pub mod session;
pub mod supplier;

pub use consumer::{ConsumerApp, ConsumerConfig};
pub use coordination::{supplier_reply, CoordinationReply, Party};
pub use feasibility::{feasible_meeting, travel_minutes, DEFAULT_RESERVE_KWH};
pub use negotiation::{consumer_move, negotiate, ConsumerMove, NegotiationPolicy, SupplierNegotiation, SupplierReply};
pub use select::{select_supplier, Criterion, DEFAULT_CRITERIA};
pub use session::{ConsumerSession, PhaseTimings, ProtocolError, SessionPhase, TransactionRecord};
pub use supplier::{Behavior, SupplierApp, SupplierConfig};

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::geo::Point;
use crate::name::{Ident, Name};
use crate::ndn::{Interest, PendingInterests, Token};
use crate::sim::SimTime;

/// Freshness of discovery replies, ms.
pub const DISCOVERY_FRESHNESS_MS: f64 = 1000.0;
/// Freshness of every point-to-point reply, ms.
pub const SESSION_FRESHNESS_MS: f64 = 100.0;

/// Minute-of-day clock anchored at `start_minute` when simulation time is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    pub start_minute: u32,
}

impl Clock {
    pub fn minute_at(&self, now: SimTime) -> u32 {
        self.start_minute + libm::floor(now.as_ms() / 60_000.0) as u32
    }
}

impl Default for Clock {
    fn default() -> Self {
        Clock { start_minute: 14 * 60 }
    }
}

/// What an application may touch while handling a callback.
pub struct AppCtx<'a> {
    pub now: SimTime,
    pub position: Point,
    pub timeout_ms: f64,
    pub max_retx: u32,
    pending: &'a mut PendingInterests,
    rng: &'a mut ChaCha8Rng,
    outbox: &'a mut Vec<(Token, Interest)>,
}

impl<'a> AppCtx<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        now: SimTime,
        position: Point,
        timeout_ms: f64,
        max_retx: u32,
        pending: &'a mut PendingInterests,
        rng: &'a mut ChaCha8Rng,
        outbox: &'a mut Vec<(Token, Interest)>,
    ) -> Self {
        Self { now, position, timeout_ms, max_retx, pending, rng, outbox }
    }

    /// Queues a request; the driver transmits it and arms its timer.
    pub fn express(&mut self, name: Name, exclude: BTreeSet<Ident>, max_retx: u32) -> Token {
        let (token, interest) = self.pending.express(name, exclude, self.timeout_ms, max_retx, self.rng);
        self.outbox.push((token, interest));
        token
    }

    pub fn timestamp(&self) -> u64 {
        self.now.whole_ms()
    }
}

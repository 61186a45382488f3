//! Price negotiation rules for both sides.
//!
//! One round is one interest (consumer offer) and one data (supplier
//! answer). The supplier concedes by midpoints towards the consumer's offer
//! but never below its floor; the consumer raises its offer by a fixed step
//! of the list price and takes the counter once it is within reach. At
//! `max_rounds` the supplier's answer is a hard offer, which the consumer
//! takes iff it fits its budget ceiling.

use alloc::format;
use alloc::string::String;

use crate::price::Price;
use crate::profile::{Fields, Offer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegotiationPolicy {
    /// Fraction below list price the consumer opens at.
    pub opening_discount: f64,
    /// Consumer's per-round raise, as a fraction of list price.
    pub concession_step: f64,
    /// Supplier's floor as a fraction of its list price.
    pub floor_fraction: f64,
    pub max_rounds: u32,
}

impl Default for NegotiationPolicy {
    fn default() -> Self {
        Self { opening_discount: 0.10, concession_step: 0.05, floor_fraction: 0.9, max_rounds: 4 }
    }
}

impl NegotiationPolicy {
    pub fn is_valid(&self) -> bool {
        (0.0..1.0).contains(&self.opening_discount)
            && self.concession_step > 0.0
            && self.floor_fraction > 0.0
            && self.floor_fraction <= 1.0
            && self.max_rounds >= 1
    }

    pub fn opening_price(&self, list: Price) -> Price {
        list.scaled(1.0 - self.opening_discount)
    }

    pub fn floor(&self, list: Price) -> Price {
        list.scaled(self.floor_fraction)
    }

    fn step(&self, list: Price) -> Price {
        list.scaled(self.concession_step)
    }
}

/// Supplier's answer to a consumer offer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupplierReply {
    /// Counter (or echo, when it equals the consumer's offer).
    Counter(Offer),
    /// Nothing left to sell.
    Refuse,
}

impl SupplierReply {
    pub fn to_payload(&self) -> String {
        match self {
            SupplierReply::Counter(o) => {
                format!("status=counter;price={};amount={};hard={}", o.price_per_kwh, o.amount_kwh, u8::from(o.hard))
            }
            SupplierReply::Refuse => String::from("status=refuse"),
        }
    }

    pub fn from_payload(text: &str) -> Option<Self> {
        let f = Fields::parse(text)?;
        match f.get("status")? {
            "refuse" => Some(SupplierReply::Refuse),
            "counter" => Some(SupplierReply::Counter(Offer {
                price_per_kwh: f.get("price")?.parse().ok()?,
                amount_kwh: f.num("amount")?,
                hard: match f.get("hard")? {
                    "1" => true,
                    "0" => false,
                    _ => return None,
                },
            })),
            _ => None,
        }
    }
}

/// Supplier-side state for one consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplierNegotiation {
    pub list: Price,
    pub floor: Price,
    pub last_counter: Price,
    pub rounds: u32,
}

impl SupplierNegotiation {
    pub fn new(list: Price, policy: &NegotiationPolicy) -> Self {
        Self { list, floor: policy.floor(list), last_counter: list, rounds: 0 }
    }

    /// Answers `offer` given how much energy is still unreserved.
    pub fn respond(&mut self, offer: &Offer, unreserved_kwh: f64, policy: &NegotiationPolicy) -> SupplierReply {
        self.rounds += 1;
        let amount = offer.amount_kwh.min(unreserved_kwh);
        if amount <= 0.0 {
            return SupplierReply::Refuse;
        }
        let hard = self.rounds >= policy.max_rounds;
        let price = if offer.price_per_kwh >= self.last_counter {
            offer.price_per_kwh.min(self.list)
        } else {
            offer.price_per_kwh.midpoint(self.last_counter).max(self.floor)
        };
        self.last_counter = price;
        SupplierReply::Counter(Offer { price_per_kwh: price, amount_kwh: amount, hard })
    }
}

/// Consumer's reaction to a counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConsumerMove {
    Agree(Offer),
    Propose(Offer),
    /// Hard offer above the budget ceiling.
    Reject,
}

/// Decides the consumer's next step after `counter` answered `last`.
pub fn consumer_move(
    last: &Offer,
    counter: &Offer,
    list: Price,
    ceiling: Price,
    policy: &NegotiationPolicy,
) -> ConsumerMove {
    if counter.same_terms(last) {
        return ConsumerMove::Agree(Offer { hard: false, ..*counter });
    }
    if counter.hard {
        return if counter.price_per_kwh <= ceiling {
            ConsumerMove::Agree(Offer { hard: false, ..*counter })
        } else {
            ConsumerMove::Reject
        };
    }
    let next = last.price_per_kwh.saturating_add(policy.step(list)).min(counter.price_per_kwh).min(ceiling);
    ConsumerMove::Propose(Offer::new(next.max(last.price_per_kwh), counter.amount_kwh))
}

/// Outcome of an in-memory negotiation between the two rule sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegotiationResult {
    pub agreed: Option<Offer>,
    pub rounds: u32,
}

/// Plays both sides without a network, for tests and quick what-ifs.
pub fn negotiate(
    list: Price,
    desired_kwh: f64,
    available_kwh: f64,
    ceiling: Price,
    policy: &NegotiationPolicy,
) -> NegotiationResult {
    let mut supplier = SupplierNegotiation::new(list, policy);
    let mut offer = Offer::new(policy.opening_price(list), desired_kwh);
    loop {
        let reply = supplier.respond(&offer, available_kwh, policy);
        let SupplierReply::Counter(counter) = reply else {
            return NegotiationResult { agreed: None, rounds: supplier.rounds };
        };
        match consumer_move(&offer, &counter, list, ceiling, policy) {
            ConsumerMove::Agree(o) => return NegotiationResult { agreed: Some(o), rounds: supplier.rounds },
            ConsumerMove::Reject => return NegotiationResult { agreed: None, rounds: supplier.rounds },
            ConsumerMove::Propose(o) => offer = o,
        }
    }
}

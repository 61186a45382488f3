//! Supplier state, offers and meeting proposals, plus the compact
//! `key=value;key=value` text used for Data payloads.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::geo::Point;
use crate::name::Ident;
use crate::price::Price;
use crate::sim::SimTime;

/// A free interval in a supplier's day, minutes-of-day, `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimeSlot {
    pub start: u32,
    pub end: u32,
}

impl TimeSlot {
    pub fn new(start: u32, end: u32) -> Option<Self> {
        (start <= end).then_some(Self { start, end })
    }

    pub fn overlaps(&self, start: u32, end: u32) -> bool {
        self.start <= end && start <= self.end
    }
}

impl fmt::Display for TimeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

pub(crate) fn parse_window(text: &str) -> Option<(u32, u32)> {
    let (a, b) = text.split_once('-')?;
    let a: u32 = a.parse().ok()?;
    let b: u32 = b.parse().ok()?;
    (a <= b).then_some((a, b))
}

/// What a selling vehicle advertises about itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplierProfile {
    pub pid: Ident,
    pub location: Point,
    pub price_per_kwh: Price,
    pub available_energy: f64,
    pub reputation: f64,
    pub free_slots: Vec<TimeSlot>,
    /// kWh left in the supplier's own battery.
    pub soc: f64,
    /// kWh per km.
    pub consumption_rate: f64,
    pub reserved_until: Option<SimTime>,
}

impl SupplierProfile {
    pub fn is_valid(&self) -> bool {
        let mut slots = self.free_slots.clone();
        slots.sort();
        let disjoint = slots.windows(2).all(|w| w[0].end < w[1].start);
        self.available_energy >= 0.0
            && self.soc >= 0.0
            && (0.0..=10.0).contains(&self.reputation)
            && self.consumption_rate > 0.0
            && disjoint
    }

    pub fn has_slot_overlapping(&self, start: u32, end: u32) -> bool {
        self.free_slots.iter().any(|s| s.overlaps(start, end))
    }

    pub fn to_payload(&self) -> String {
        let slots: Vec<String> = self.free_slots.iter().map(ToString::to_string).collect();
        let mut out = format!(
            "pid={};loc={};price={};energy={};rep={};slots={};soc={};rate={}",
            self.pid,
            self.location,
            self.price_per_kwh,
            self.available_energy,
            self.reputation,
            if slots.is_empty() { String::from("-") } else { slots.join("|") },
            self.soc,
            self.consumption_rate,
        );
        if let Some(t) = self.reserved_until {
            out.push_str(&format!(";reserved_until={}", t.as_ms()));
        }
        out
    }

    pub fn from_payload(payload: &str) -> Option<Self> {
        let f = Fields::parse(payload)?;
        let slots = match f.get("slots")? {
            "-" => Vec::new(),
            s => s
                .split('|')
                .map(|w| parse_window(w).and_then(|(a, b)| TimeSlot::new(a, b)))
                .collect::<Option<Vec<_>>>()?,
        };
        let reserved_until = match f.get("reserved_until") {
            Some(t) => Some(SimTime::from_ms(t.parse().ok()?)),
            None => None,
        };
        let profile = SupplierProfile {
            pid: Ident::new(f.get("pid")?).ok()?,
            location: Point::parse(f.get("loc")?)?,
            price_per_kwh: f.get("price")?.parse().ok()?,
            available_energy: f.num("energy")?,
            reputation: f.num("rep")?,
            free_slots: slots,
            soc: f.num("soc")?,
            consumption_rate: f.num("rate")?,
            reserved_until,
        };
        profile.is_valid().then_some(profile)
    }
}

/// A price/amount proposal exchanged during negotiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub price_per_kwh: Price,
    pub amount_kwh: f64,
    /// Final offer: accept or abort.
    pub hard: bool,
}

impl Offer {
    pub fn new(price_per_kwh: Price, amount_kwh: f64) -> Self {
        Self { price_per_kwh, amount_kwh, hard: false }
    }

    pub fn is_valid(&self) -> bool {
        self.price_per_kwh > Price::ZERO && self.amount_kwh > 0.0 && self.amount_kwh.is_finite()
    }

    pub fn same_terms(&self, other: &Offer) -> bool {
        self.price_per_kwh == other.price_per_kwh && self.amount_kwh == other.amount_kwh
    }
}

/// Time frame plus optional place for the energy transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeetingProposal {
    pub window_start: u32,
    pub window_end: u32,
    pub location: Option<Point>,
}

impl MeetingProposal {
    pub fn is_valid(&self) -> bool {
        self.window_start <= self.window_end
    }

    pub fn window(&self) -> String {
        format!("{}-{}", self.window_start, self.window_end)
    }
}

/// Parsed `key=value;key=value` payload.
#[derive(Debug, Clone, PartialEq)]
pub struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    pub fn parse(payload: &'a str) -> Option<Self> {
        let pairs = payload
            .split(';')
            .map(|kv| kv.split_once('='))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { pairs })
    }

    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        let v: f64 = self.get(key)?.parse().ok()?;
        v.is_finite().then_some(v)
    }
}

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::name::{Ident, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nonce(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct Interest {
    pub name: Name,
    pub nonce: Nonce,
    pub lifetime_ms: f64,
    /// Responders the consumer already knows; only meaningful for discovery.
    pub exclude: BTreeSet<Ident>,
}

impl Interest {
    pub fn new(name: Name, nonce: Nonce, lifetime_ms: f64) -> Self {
        assert!(lifetime_ms > 0.0, "interest lifetime must be positive");
        Self { name, nonce, lifetime_ms, exclude: BTreeSet::new() }
    }

    pub fn with_exclude(mut self, exclude: BTreeSet<Ident>) -> Self {
        self.exclude = exclude;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Data {
    pub name: Name,
    pub payload: Vec<u8>,
    pub signer: Ident,
    pub signature: String,
    pub freshness_ms: f64,
}

impl Data {
    /// Builds a Data packet signed with the stub scheme.
    pub fn signed(name: Name, payload: impl Into<Vec<u8>>, signer: Ident, freshness_ms: f64) -> Self {
        assert!(freshness_ms > 0.0, "freshness must be positive");
        let payload = payload.into();
        let signature = digest(&name, &payload, &signer);
        Self { name, payload, signer, signature, freshness_ms }
    }

    pub fn payload_str(&self) -> Option<&str> {
        core::str::from_utf8(&self.payload).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Packet {
    Interest(Interest),
    Data(Data),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }

    pub fn nonce(&self) -> Option<Nonce> {
        match self {
            Packet::Interest(i) => Some(i.nonce),
            Packet::Data(_) => None,
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Stub signature: FNV-1a over name, payload and signer, NUL separated.
/// Detects accidental or naive tampering only; not a trust model.
fn digest(name: &Name, payload: &[u8], signer: &Ident) -> String {
    let mut rendered = String::new();
    let _ = write!(rendered, "{name}");
    let mut h = fnv1a(FNV_OFFSET, rendered.as_bytes());
    h = fnv1a(h, &[0]);
    h = fnv1a(h, payload);
    h = fnv1a(h, &[0]);
    h = fnv1a(h, signer.as_str().as_bytes());
    let mut out = String::with_capacity(16);
    let _ = write!(out, "{h:016x}");
    out
}

pub fn verify_signature(data: &Data) -> bool {
    digest(&data.name, &data.payload, &data.signer) == data.signature
}

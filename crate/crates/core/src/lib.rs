//! Peer-to-peer electric-vehicle charging coordination over a named-data
//! forwarding plane.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that does not
//! touch the filesystem: the name grammar, the forwarder (PIT, content store,
//! aggregation, retransmission), a deterministic discrete-event kernel with a
//! broadcast wireless channel, the five-phase consumer/supplier state
//! machines, the central-coordinator baseline model and the statistics used
//! to summarise runs.

#![no_std]

extern crate alloc;

pub mod filter;
pub mod geo;
pub mod ip;
pub mod message;
pub mod metrics;
pub mod name;
pub mod ndn;
pub mod price;
pub mod profile;
pub mod protocol;
pub mod sim;
pub mod world;

pub use filter::{matches_filter, Area, DiscoveryFilter};
pub use geo::Point;
pub use message::{data_name_for, encode_name, parse_name, Message, Phase};
pub use name::{Ident, Name, NameError};
pub use price::Price;
pub use profile::{MeetingProposal, Offer, SupplierProfile, TimeSlot};
pub use sim::SimTime;
pub use world::{RunOutput, ScenarioParams, World};

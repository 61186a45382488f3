//! Named-data forwarding plane: packets, PIT, content store, forwarder and
//! the consumer-side retransmission table.

pub mod cs;
pub mod forwarder;
pub mod log;
pub mod packet;
pub mod pending;
pub mod pit;

pub use cs::ContentStore;
pub use forwarder::{Action, DropReason, FaceId, Forwarder, ForwarderConfig, ForwarderStats};
pub use log::{EventKind, EventRecord};
pub use packet::{verify_signature, Data, Interest, Nonce, Packet};
pub use pending::{PendingInterests, TimeoutOutcome, Token};
pub use pit::Pit;

use alloc::collections::BTreeSet;

use crate::name::{Ident, Name};

/// Whether `data_name` answers an interest for `interest_name`: exact match,
/// or a discovery reply (interest name plus one responder component) whose
/// responder is not excluded.
pub fn satisfies(interest_name: &Name, exclude: &BTreeSet<Ident>, data_name: &Name) -> bool {
    if interest_name == data_name {
        return true;
    }
    is_discovery_broadcast(interest_name)
        && data_name.len() == interest_name.len() + 1
        && interest_name.is_prefix_of(data_name)
        && !exclude.iter().any(|pid| pid.as_str() == data_name.last())
}

/// `/FastCharging/Discovery/<6 filter fields>/<ts>` without a responder.
pub fn is_discovery_broadcast(name: &Name) -> bool {
    name.len() == 9 && name.get(0) == Some(crate::message::ROOT) && name.get(1) == Some("Discovery")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn discovery_prefix_matching() {
        let i: Name = "/FastCharging/Discovery/-/-/-/-/-/-/0".parse().unwrap();
        let d: Name = "/FastCharging/Discovery/-/-/-/-/-/-/0/EV1".parse().unwrap();
        let none = BTreeSet::new();
        assert!(satisfies(&i, &none, &d));
        assert!(satisfies(&i, &none, &i));
        let ex: BTreeSet<Ident> = [Ident::new("EV1").unwrap()].into_iter().collect();
        assert!(!satisfies(&i, &ex, &d));
        let v: Name = "/FastCharging/EV1/Verification/5".parse().unwrap();
        let longer = v.child("x").unwrap();
        assert!(!satisfies(&v, &none, &longer));
    }
}

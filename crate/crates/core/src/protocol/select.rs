//! Choosing which discovered supplier to talk to.

use core::cmp::Ordering;

use crate::geo::Point;
use crate::name::Ident;
use crate::profile::SupplierProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Lower price first.
    Price,
    /// Closer first.
    Distance,
    /// Higher reputation first.
    Reputation,
}

/// Default ordering: cheapest, then closest, then most reputable.
pub const DEFAULT_CRITERIA: [Criterion; 3] = [Criterion::Price, Criterion::Distance, Criterion::Reputation];

fn compare(a: &SupplierProfile, b: &SupplierProfile, from: Point, criteria: &[Criterion]) -> Ordering {
    for c in criteria {
        let ord = match c {
            Criterion::Price => a.price_per_kwh.cmp(&b.price_per_kwh),
            Criterion::Distance => a.location.distance(&from).total_cmp(&b.location.distance(&from)),
            Criterion::Reputation => b.reputation.total_cmp(&a.reputation),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.pid.cmp(&b.pid)
}

/// Best candidate under the lexicographic `criteria` order, measured from
/// the consumer's position; remaining ties go to the smaller pid.
pub fn select_supplier<'a>(
    candidates: &'a [SupplierProfile],
    from: Point,
    criteria: &[Criterion],
) -> Option<&'a Ident> {
    candidates.iter().min_by(|a, b| compare(a, b, from, criteria)).map(|p| &p.pid)
}

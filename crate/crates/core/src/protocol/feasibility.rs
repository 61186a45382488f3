//! Range-anxiety checks for meeting points.

use crate::geo::Point;

/// Safety margin each party keeps in its battery by default, kWh.
pub const DEFAULT_RESERVE_KWH: f64 = 0.5;

/// Whether a vehicle with `soc` kWh, using `consumption_rate` kWh/km, can
/// drive from `from` to `to` and still hold `reserve_kwh`.
pub fn feasible_meeting(soc: f64, consumption_rate: f64, from: Point, to: Point, reserve_kwh: f64) -> bool {
    debug_assert!(consumption_rate > 0.0);
    from.distance(&to) / 1000.0 * consumption_rate <= soc - reserve_kwh
}

/// Whole minutes needed to cover `distance_m` at `speed_mps`, rounded up.
pub fn travel_minutes(distance_m: f64, speed_mps: f64) -> u32 {
    if distance_m <= 0.0 {
        return 0;
    }
    libm::ceil(distance_m / speed_mps / 60.0) as u32
}

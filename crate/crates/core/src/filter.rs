//! Discovery filters and their evaluation against supplier profiles.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::geo::Point;
use crate::price::Price;
use crate::profile::SupplierProfile;

/// Search disc around a position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub center: Point,
    /// Meters.
    pub radius: f64,
}

/// Optional bounds a consumer attaches to its discovery interest.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiscoveryFilter {
    pub area: Option<Area>,
    pub max_price_per_kwh: Option<Price>,
    pub min_energy: Option<f64>,
    pub min_reputation: Option<f64>,
    pub window_start: Option<u32>,
    pub window_end: Option<u32>,
}

impl DiscoveryFilter {
    pub fn is_valid(&self) -> bool {
        let non_neg = |v: Option<f64>| v.is_none_or(|v| v >= 0.0 && v.is_finite());
        let window_ok = match (self.window_start, self.window_end) {
            (Some(s), Some(e)) => s <= e,
            _ => true,
        };
        non_neg(self.area.map(|a| a.radius))
            && non_neg(self.min_energy)
            && non_neg(self.min_reputation)
            && window_ok
    }
}

/// True iff every bound present in `filter` holds for `profile`.
pub fn matches_filter(profile: &SupplierProfile, filter: &DiscoveryFilter) -> bool {
    if let Some(area) = filter.area {
        if profile.location.distance(&area.center) > area.radius {
            return false;
        }
    }
    if filter.max_price_per_kwh.is_some_and(|max| profile.price_per_kwh > max) {
        return false;
    }
    if filter.min_energy.is_some_and(|min| profile.available_energy < min) {
        return false;
    }
    if filter.min_reputation.is_some_and(|min| profile.reputation < min) {
        return false;
    }
    if filter.window_start.is_some() || filter.window_end.is_some() {
        let start = filter.window_start.unwrap_or(0);
        let end = filter.window_end.unwrap_or(u32::MAX);
        if !profile.has_slot_overlapping(start, end) {
            return false;
        }
    }
    true
}

impl fmt::Display for Area {
    /// `x,y+<radius>km`, the radius shifted textually so that it round-trips.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}km", self.center, meters_to_km_text(self.radius))
    }
}

impl Area {
    pub fn parse(text: &str) -> Option<Area> {
        let (center, radius) = text.split_once('+')?;
        let radius = radius.strip_suffix("km")?;
        let radius = km_text_to_meters(radius)?;
        Some(Area { center: Point::parse(center)?, radius })
    }
}

/// Renders a meter value in kilometers by moving the decimal point of its
/// shortest round-trip representation, so no binary rounding is introduced.
fn meters_to_km_text(meters: f64) -> String {
    let text = format!("{meters}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits = format!("{int}{frac}");
    let point = int.len() as isize - 3;
    let raw = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    tidy_decimal(&raw)
}

fn km_text_to_meters(km: &str) -> Option<f64> {
    if km.is_empty() || !km.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return None;
    }
    let (int, frac) = km.split_once('.').unwrap_or((km, ""));
    if int.is_empty() || frac.contains('.') {
        return None;
    }
    let mut frac = String::from(frac);
    while frac.len() < 3 {
        frac.push('0');
    }
    let (moved, rest) = frac.split_at(3);
    let text = if rest.is_empty() { format!("{int}{moved}") } else { format!("{int}{moved}.{rest}") };
    let v: f64 = tidy_decimal(&text).parse().ok()?;
    v.is_finite().then_some(v)
}

/// Strips redundant leading and trailing zeros from a plain decimal.
fn tidy_decimal(text: &str) -> String {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let int = int.trim_start_matches('0');
    let frac = frac.trim_end_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    if frac.is_empty() {
        String::from(int)
    } else {
        format!("{int}.{frac}")
    }
}

//! Exact decimal prices (currency per kWh).
//!
//! Prices travel inside names and are compared for equality during
//! negotiation and confirmation, so they are kept as integer micro-units
//! rather than floating point.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

const MICROS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Price(u64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid price {0:?}")]
pub struct PriceError(pub String);

impl Price {
    pub const ZERO: Price = Price(0);

    pub const fn from_micros(micros: u64) -> Self {
        Price(micros)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / MICROS as f64
    }

    /// Multiplies by a non-negative factor, rounding to the nearest micro-unit.
    pub fn scaled(self, factor: f64) -> Price {
        let v = libm::round(self.0 as f64 * factor.max(0.0));
        Price(v as u64)
    }

    /// Midpoint, rounded down to the micro-unit.
    pub fn midpoint(self, other: Price) -> Price {
        Price(self.0 / 2 + other.0 / 2 + (self.0 % 2 + other.0 % 2) / 2)
    }

    pub fn saturating_add(self, other: Price) -> Price {
        Price(self.0.saturating_add(other.0))
    }
}

impl fmt::Display for Price {
    /// At least two fraction digits, more only when needed: `0.10`, `0.095`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / MICROS;
        let mut frac = self.0 % MICROS;
        let mut digits = 6;
        while digits > 2 && frac.is_multiple_of(10) {
            frac /= 10;
            digits -= 1;
        }
        write!(f, "{whole}.{frac:0digits$}")
    }
}

impl FromStr for Price {
    type Err = PriceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PriceError(String::from(s));
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let digits_only = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if whole.is_empty() || !digits_only(whole) || !digits_only(frac) || frac.len() > 6 {
            return Err(err());
        }
        let whole: u64 = whole.parse().map_err(|_| err())?;
        let mut frac_micros = 0u64;
        for (i, b) in frac.bytes().enumerate() {
            frac_micros += u64::from(b - b'0') * 10u64.pow(5 - i as u32);
        }
        whole
            .checked_mul(MICROS)
            .and_then(|w| w.checked_add(frac_micros))
            .map(Price)
            .ok_or_else(err)
    }
}

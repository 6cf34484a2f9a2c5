//! Signed Q16.16 fixed point.
//!
//! Every neuron quantity in the simulator is a `Fix`. Spike accumulation is
//! done on raw `i64` values so that the sum of arriving weights does not
//! depend on the order in which spikes are delivered; the narrowing back to
//! Q16.16 happens once per neuron update.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const FRAC_BITS: u32 = 16;
pub const ONE_RAW: i32 = 1 << FRAC_BITS;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fix(i32);

impl Fix {
    pub const ZERO: Fix = Fix(0);
    pub const ONE: Fix = Fix(ONE_RAW);
    pub const MAX: Fix = Fix(i32::MAX);
    pub const MIN: Fix = Fix(i32::MIN);

    pub const fn from_raw(raw: i32) -> Self {
        Fix(raw)
    }

    pub const fn raw(self) -> i32 {
        self.0
    }

    pub const fn from_int(v: i32) -> Self {
        Fix(v << FRAC_BITS)
    }

    /// Nearest representable value; saturates outside the Q16.16 range.
    pub fn from_f64(v: f64) -> Self {
        let scaled = (v * f64::from(ONE_RAW)).round();
        if scaled >= f64::from(i32::MAX) {
            Fix::MAX
        } else if scaled <= f64::from(i32::MIN) {
            Fix::MIN
        } else {
            Fix(scaled as i32)
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / f64::from(ONE_RAW)
    }

    /// Narrow a wide raw value, reporting whether it had to be clamped.
    pub fn saturating_from_wide(raw: i128) -> (Self, bool) {
        if raw > i128::from(i32::MAX) {
            (Fix::MAX, true)
        } else if raw < i128::from(i32::MIN) {
            (Fix::MIN, true)
        } else {
            (Fix(raw as i32), false)
        }
    }
}

impl fmt::Display for Fix {
    /// Exact decimal expansion. 2^-16 has a finite decimal expansion, so the
    /// printed string parses back to the identical raw value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let raw = i64::from(self.0);
        let mag = raw.unsigned_abs();
        let int = mag >> FRAC_BITS;
        let frac = mag & (u64::from(ONE_RAW as u32) - 1);
        if raw < 0 {
            f.write_str("-")?;
        }
        if frac == 0 {
            return write!(f, "{int}");
        }
        // frac / 2^16 == frac * 5^16 / 10^16
        let digits = frac * 152_587_890_625;
        let s = format!("{digits:016}");
        write!(f, "{int}.{}", s.trim_end_matches('0'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid fixed-point literal {0:?}")]
pub struct ParseFixError(pub String);

impl FromStr for Fix {
    type Err = ParseFixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseFixError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 30
        {
            return Err(err());
        }
        let int: i128 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut raw = int.checked_shl(FRAC_BITS).ok_or_else(err)?;
        if !frac_part.is_empty() {
            let num: i128 = frac_part.parse().map_err(|_| err())?;
            let den = 10i128.pow(frac_part.len() as u32);
            // round half away from zero
            raw += (num * i128::from(ONE_RAW) * 2 + den) / (2 * den);
        }
        if neg {
            raw = -raw;
        }
        if raw > i128::from(i32::MAX) || raw < i128::from(i32::MIN) {
            return Err(err());
        }
        Ok(Fix(raw as i32))
    }
}

impl Serialize for Fix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_is_exact() {
        assert_eq!(Fix::from_int(3).to_string(), "3");
        assert_eq!(Fix::from_raw(ONE_RAW / 2).to_string(), "0.5");
        assert_eq!(Fix::from_raw(1).to_string(), "0.0000152587890625");
        assert_eq!(Fix::from_raw(-ONE_RAW - ONE_RAW / 4).to_string(), "-1.25");
        assert_eq!(Fix::MIN.to_string(), "-32768");
    }

    #[test]
    fn parse_rounds_to_nearest() {
        assert_eq!("1.5".parse::<Fix>().unwrap(), Fix::from_raw(ONE_RAW + ONE_RAW / 2));
        assert_eq!("-0.25".parse::<Fix>().unwrap(), Fix::from_raw(-ONE_RAW / 4));
        assert_eq!(".5".parse::<Fix>().unwrap(), Fix::from_raw(ONE_RAW / 2));
        assert_eq!("0.1".parse::<Fix>().unwrap(), Fix::from_raw(6554));
        assert!("1e3".parse::<Fix>().is_err());
        assert!("40000".parse::<Fix>().is_err());
        assert!("".parse::<Fix>().is_err());
        assert!("-".parse::<Fix>().is_err());
    }

    proptest! {
        #[test]
        fn decimal_round_trip(raw in any::<i32>()) {
            let f = Fix::from_raw(raw);
            prop_assert_eq!(f.to_string().parse::<Fix>().unwrap(), f);
        }
    }
}

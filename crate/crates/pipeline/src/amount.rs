//! Fixed-point USD amounts with six fractional digits.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Fractional digits kept, matching stablecoin token precision.
pub const DECIMALS: u32 = 6;
const SCALE: i128 = 1_000_000;

/// Signed amount in micro-units; arithmetic is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(i128);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseAmountError(String);

impl fmt::Display for ParseAmountError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid amount {:?}", self.0)
    }
}

impl std::error::Error for ParseAmountError {}

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_micros(micros: i128) -> Self {
        Amount(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Amount(units as i128 * SCALE)
    }

    pub const fn micros(self) -> i128 {
        self.0
    }

    /// Nearest representable amount.
    pub fn from_f64(x: f64) -> Self {
        Amount((x * SCALE as f64).round() as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl FromStr for Amount {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseAmountError(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if frac.len() > DECIMALS as usize
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let int_part: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        let mut frac_part: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
        frac_part *= 10i128.pow(DECIMALS - frac.len() as u32);
        let micros = int_part
            .checked_mul(SCALE)
            .and_then(|m| m.checked_add(frac_part))
            .ok_or_else(err)?;
        Ok(Amount(if negative { -micros } else { micros }))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u128;
        write!(f, "{sign}{}.{:06}", abs / scale, abs % scale)
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        Amount(self.0 - rhs.0)
    }
}

impl Neg for Amount {
    type Output = Amount;
    fn neg(self) -> Amount {
        Amount(-self.0)
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Amount {
    fn sub_assign(&mut self, rhs: Amount) {
        self.0 -= rhs.0;
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct AmountVisitor;

impl Visitor<'_> for AmountVisitor {
    type Value = Amount;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a decimal amount as a string or number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Amount, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Amount, E> {
        Ok(Amount(v as i128 * SCALE))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Amount, E> {
        Ok(Amount(v as i128 * SCALE))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Amount, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite amount"));
        }
        // Shortest round-trip text of the parsed number, never in exponent form.
        v.to_string().parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Amount, D::Error> {
        deserializer.deserialize_any(AmountVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_formats() {
        assert_eq!("1.5".parse::<Amount>().unwrap(), Amount::from_micros(1_500_000));
        assert_eq!("0.000001".parse::<Amount>().unwrap(), Amount::from_micros(1));
        assert_eq!(".25".parse::<Amount>().unwrap(), Amount::from_micros(250_000));
        assert_eq!("-3".parse::<Amount>().unwrap(), Amount::from_units(-3));
        assert_eq!(Amount::from_micros(1_500_000).to_string(), "1.500000");
        assert_eq!(Amount::from_micros(-1).to_string(), "-0.000001");
        for bad in ["", ".", "1.0000001", "1e3", "abc", "1.2.3", "+1"] {
            assert!(bad.parse::<Amount>().is_err(), "{bad}");
        }
    }

    #[test]
    fn json_number_or_string() {
        let a: Amount = serde_json::from_str("1234.123456").unwrap();
        assert_eq!(a, Amount::from_micros(1_234_123_456));
        let b: Amount = serde_json::from_str("\"1234.123456\"").unwrap();
        assert_eq!(a, b);
        let c: Amount = serde_json::from_str("7").unwrap();
        assert_eq!(c, Amount::from_units(7));
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"1234.123456\"");
    }

    proptest! {
        #[test]
        fn display_round_trips(m in -10i128.pow(20)..10i128.pow(20)) {
            let a = Amount::from_micros(m);
            prop_assert_eq!(a.to_string().parse::<Amount>().unwrap(), a);
        }
    }
}

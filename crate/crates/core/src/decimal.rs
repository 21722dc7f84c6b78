//! Exact decimal numbers for answer equality.
//!
//! Math-word answers are small integers or short decimals. Comparing them
//! through `f64` invites spurious mismatches ("28.0" vs "28", or values that
//! round differently), so answers are kept as canonical base-10 values:
//! an unsigned mantissa plus a power-of-ten scale, with trailing zeros
//! stripped so equal values have equal representations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Error parsing a decimal literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalParseError {
    #[error("empty decimal literal")]
    Empty,
    #[error("invalid character {0:?} in decimal literal")]
    InvalidChar(char),
    #[error("decimal literal has no digits")]
    NoDigits,
    #[error("decimal literal out of range")]
    Overflow,
}

/// An exact decimal: `(-1)^neg * mantissa / 10^scale`.
///
/// Canonical form: the mantissa has no trailing zeros while `scale > 0`,
/// and zero is always `+0 / 10^0`. Equality and hashing are therefore
/// plain field comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Decimal {
    neg: bool,
    mantissa: u128,
    scale: u8,
}

impl Decimal {
    /// Builds a canonical decimal from raw parts.
    pub fn new(neg: bool, mantissa: u128, scale: u8) -> Self {
        let mut d = Decimal {
            neg,
            mantissa,
            scale,
        };
        d.canonicalize();
        d
    }

    /// Convenience constructor for integer answers.
    pub fn from_int(value: i64) -> Self {
        Decimal::new(value < 0, value.unsigned_abs() as u128, 0)
    }

    fn canonicalize(&mut self) {
        while self.scale > 0 && self.mantissa.is_multiple_of(10) {
            self.mantissa /= 10;
            self.scale -= 1;
        }
        if self.mantissa == 0 {
            self.neg = false;
            self.scale = 0;
        }
    }

    /// Approximate `f64` value, for reporting only (never for equality).
    pub fn to_f64(&self) -> f64 {
        let mag = self.mantissa as f64 / 10f64.powi(self.scale as i32);
        if self.neg {
            -mag
        } else {
            mag
        }
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    /// Parses a plain decimal literal: optional sign, digits, optional
    /// fractional part. No exponents, no separators — callers strip
    /// currency symbols and thousands separators before parsing.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DecimalParseError::Empty);
        }
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut mantissa: u128 = 0;
        let mut scale: u8 = 0;
        let mut seen_dot = false;
        let mut seen_digit = false;
        for c in rest.chars() {
            match c {
                '0'..='9' => {
                    seen_digit = true;
                    mantissa = mantissa
                        .checked_mul(10)
                        .and_then(|m| m.checked_add((c as u8 - b'0') as u128))
                        .ok_or(DecimalParseError::Overflow)?;
                    if seen_dot {
                        scale = scale.checked_add(1).ok_or(DecimalParseError::Overflow)?;
                    }
                }
                '.' if !seen_dot => seen_dot = true,
                other => return Err(DecimalParseError::InvalidChar(other)),
            }
        }
        if !seen_digit {
            return Err(DecimalParseError::NoDigits);
        }
        Ok(Decimal::new(neg, mantissa, scale))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "-")?;
        }
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let digits = self.mantissa.to_string();
        let scale = self.scale as usize;
        if digits.len() > scale {
            let (int, frac) = digits.split_at(digits.len() - scale);
            write!(f, "{int}.{frac}")
        } else {
            write!(f, "0.{}{}", "0".repeat(scale - digits.len()), digits)
        }
    }
}

impl TryFrom<String> for Decimal {
    type Error = DecimalParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Decimal> for String {
    fn from(d: Decimal) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zeros_are_canonicalized() {
        let a: Decimal = "28".parse().unwrap();
        let b: Decimal = "28.0".parse().unwrap();
        let c: Decimal = "28.000".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a.to_string(), "28");
    }

    #[test]
    fn fractional_values_keep_significant_digits() {
        let a: Decimal = "3.50".parse().unwrap();
        assert_eq!(a.to_string(), "3.5");
        let b: Decimal = "0.125".parse().unwrap();
        assert_eq!(b.to_string(), "0.125");
        assert_ne!(a, b);
    }

    #[test]
    fn negative_zero_collapses_to_zero() {
        let a: Decimal = "-0.0".parse().unwrap();
        let b: Decimal = "0".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "0");
    }

    #[test]
    fn signs_matter() {
        let a: Decimal = "-3.5".parse().unwrap();
        let b: Decimal = "3.5".parse().unwrap();
        assert_ne!(a, b);
        assert_eq!(a.to_string(), "-3.5");
        assert_eq!(a.to_f64(), -3.5);
    }

    #[test]
    fn leading_dot_and_plus_sign_parse() {
        let a: Decimal = "+.5".parse().unwrap();
        assert_eq!(a, "0.5".parse().unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Decimal::from_str("").is_err());
        assert!(Decimal::from_str("abc").is_err());
        assert!(Decimal::from_str(".").is_err());
        assert!(Decimal::from_str("1.2.3").is_err());
        assert!(Decimal::from_str("1e5").is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "28", "-3.5", "0.125", "1000", "0.001"] {
            let d: Decimal = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
            let back: Decimal = d.to_string().parse().unwrap();
            assert_eq!(d, back);
        }
    }
}

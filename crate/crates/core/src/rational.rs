//! Exact rational numbers and their text forms.
//!
//! Distances, radii and every measured constant are exact rationals. The
//! canonical text form is always `p/q` (integers are written `n/1`), which is
//! what the JSON reports use.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

/// Exact rational with 64-bit numerator and denominator.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("number `{0}` does not fit in 64-bit rationals")]
    Overflow(String),
}

/// Parses an integer, a decimal (`1.25`, `-0.5`) or a fraction (`3/4`).
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    let overflow = || ParseRationalError::Overflow(s.to_string());

    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = parse_int(num.trim()).ok_or_else(malformed)?;
        let den: i64 = parse_int(den.trim()).ok_or_else(malformed)?;
        if den == 0 {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let mut num: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| overflow())?
    };
    let den = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(overflow)?;
    if negative {
        num = -num;
    }
    Ok(Rational::new(num, den))
}

fn parse_int(s: &str) -> Option<i64> {
    if s.is_empty() {
        return None;
    }
    s.parse().ok()
}

/// Canonical `p/q` rendering.
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Wrapper that displays a rational in canonical `p/q` form.
pub struct Pq<'a>(pub &'a Rational);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Largest integer `k` with `k <= r * scale`.
pub(crate) fn floor_scaled(r: &Rational, scale: i64) -> i64 {
    let num = *r.numer() as i128 * scale as i128;
    let den = *r.denom() as i128;
    Integer::div_floor(&num, &den) as i64
}

/// Smallest integer `k` with `k >= r * scale`.
pub(crate) fn ceil_scaled(r: &Rational, scale: i64) -> i64 {
    let num = *r.numer() as i128 * scale as i128;
    let den = *r.denom() as i128;
    Integer::div_ceil(&num, &den) as i64
}

/// Whether `r * scale` is an integer.
pub(crate) fn is_scaled_integral(r: &Rational, scale: i64) -> bool {
    (*r.numer() as i128 * scale as i128) % (*r.denom() as i128) == 0
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_pq {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_pq(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Same as [`serde_pq`] for optional values (`null` when absent).
pub mod serde_pq_opt {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&super::to_pq(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_rational("1.25").unwrap(), Rational::new(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), Rational::new(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("6/4").unwrap(), Rational::new(3, 2));
        assert_eq!(parse_rational(" 007 ").unwrap(), Rational::from_integer(7));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(matches!(parse_rational("a"), Err(ParseRationalError::Malformed(_))));
        assert!(matches!(parse_rational("1.2.3"), Err(ParseRationalError::Malformed(_))));
        assert!(matches!(parse_rational("."), Err(ParseRationalError::Malformed(_))));
        assert!(matches!(
            parse_rational("99999999999999999999"),
            Err(ParseRationalError::Overflow(_))
        ));
    }

    #[test]
    fn scaled_rounding() {
        let r = Rational::new(3, 4);
        assert_eq!(floor_scaled(&r, 2), 1);
        assert_eq!(ceil_scaled(&r, 2), 2);
        assert!(is_scaled_integral(&r, 4));
        assert_eq!(floor_scaled(&Rational::new(-1, 2), 1), -1);
    }

    proptest! {
        #[test]
        fn pq_round_trips(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let r = Rational::new(n, d);
            prop_assert_eq!(parse_rational(&to_pq(&r)).unwrap(), r);
        }
    }
}

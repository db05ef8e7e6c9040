//! Exact rational scalars.
//!
//! Every scalar in the crate is a [`Rational`], an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. Decimal input is
//! read as an exact decimal fraction; no binary floating point is involved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for `n / d` with machine-sized parts.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"7"`, `"-0.625"`, `".5"`, `"+3/8"` exactly.
///
/// Anything that is not an integer, a terminating decimal or a fraction of
/// two integers (for example `"0.333..."` or `"1e-3"`) is rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::InvalidNumber(text.to_string());
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(bad)?;
        let den = parse_integer(den.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_only = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !digits_only(whole) || !digits_only(frac) {
        return Err(bad());
    }
    let mut digits = String::with_capacity(whole.len() + frac.len());
    digits.push_str(whole);
    digits.push_str(frac);
    let mantissa: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10u32), frac.len());
    let value = Rational::new(mantissa, scale);
    Ok(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Renders a terminating decimal when the denominator is of the form
/// `2^a 5^b`, otherwise `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2u32), BigInt::from(5u32));
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return r.to_string();
    }
    let places = twos.max(fives);
    let scaled = (r * Rational::from_integer(num_traits::pow(BigInt::from(10u32), places)))
        .to_integer()
        .abs()
        .to_string();
    let padded = format!("{scaled:0>width$}", width = places + 1);
    let (head, tail) = padded.split_at(padded.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{head}.{tail}")
}

/// Least common multiple of the denominators; `1` for an empty input.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Serde adapters writing rationals as strings (`"7/1000"`, `"-2"`).
pub(crate) mod serde_str {
    use serde::Serializer;

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub mod vec {
        use serde::ser::{SerializeSeq, Serializer};

        use super::Rational;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_are_exact() {
        assert_eq!(parse_rational("0.007").unwrap(), rat(7, 1000));
        assert_eq!(parse_rational("-0.625").unwrap(), rat(-5, 8));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("3.").unwrap(), int(3));
        assert_eq!(parse_rational("+12").unwrap(), int(12));
        assert_eq!(parse_rational(" 0.4375 ").unwrap(), rat(7, 16));
    }

    #[test]
    fn fractions_are_reduced() {
        let r = parse_rational("6/-8").unwrap();
        assert_eq!(r, rat(-3, 4));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
    }

    #[test]
    fn rejects_inexact_or_malformed() {
        for bad in [
            "0.333...", "0.333…", "1e-3", "", "-", ".", "1/0", "a", "1.2.3", "--1", "1/2/3", "0x10",
        ] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn formats_terminating_decimals() {
        assert_eq!(format_rational(&rat(-7, 1000)), "-0.007");
        assert_eq!(format_rational(&rat(5, 8)), "0.625");
        assert_eq!(format_rational(&rat(7, 16)), "0.4375");
        assert_eq!(format_rational(&int(24)), "24");
        assert_eq!(format_rational(&rat(11, 24)), "11/24");
        assert_eq!(format_rational(&rat(-1, 3)), "-1/3");
        assert_eq!(format_rational(&rat(21, 2)), "10.5");
    }

    #[test]
    fn lcm_of_example_increments() {
        let incs = [rat(2, 24), rat(12, 24), rat(4, 24), rat(1, 24), rat(3, 24)];
        assert_eq!(lcm_of_denominators(&incs), BigInt::from(24));
        assert_eq!(lcm_of_denominators(&[]), BigInt::from(1));
    }

    proptest::proptest! {
        #[test]
        fn format_then_parse_roundtrips(n in -100_000i64..100_000, d in 1i64..5_000) {
            let r = rat(n, d);
            proptest::prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}

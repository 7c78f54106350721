//! Scalar abstraction shared by the floating and exact-rational code paths.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// An ordered field in which the curvature identities can be evaluated.
///
/// `f64` is the default; [`Rational`] gives machine-exact identities.
pub trait Field:
    nalgebra::Scalar
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_int(v: i64) -> Self;

    fn as_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    /// Whether the field is exact (equality tests need no tolerance).
    fn is_exact() -> bool;

    /// `|self - other| <= rel * scale`, or exact equality for exact fields.
    fn agrees(&self, other: &Self, scale: f64, rel: f64) -> bool;

    fn ratio(p: i64, q: i64) -> Self {
        Self::from_int(p) / Self::from_int(q)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Field for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        false
    }

    fn agrees(&self, other: &Self, scale: f64, rel: f64) -> bool {
        (self - other).abs() <= rel * scale
    }
}

impl Field for Rational {
    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        true
    }

    fn agrees(&self, other: &Self, _scale: f64, _rel: f64) -> bool {
        self == other
    }
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"` or `"1e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::domain("empty rational literal"));
    }
    if s.contains('/') {
        let r = Rational::from_str(s).map_err(|_| Error::domain(format!("malformed rational literal {s:?}")))?;
        return Ok(r);
    }
    parse_decimal(s).ok_or_else(|| Error::domain(format!("malformed number literal {s:?}")))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|ch| ch.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Exact value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::domain(format!("{x} is not finite")))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal_forms() {
        assert_eq!(parse_rational("1/4").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rational(-3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), rational(-3, 20));
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rational(&rational(6, 8)), "3/4");
        assert_eq!(format_rational(&int(-5)), "-5");
        assert_eq!(
            parse_rational(&format_rational(&rational(-17, 50))).unwrap(),
            rational(-17, 50)
        );
    }

    #[test]
    fn float_to_rational_is_exact() {
        let r = rational_from_f64(0.1).unwrap();
        assert_eq!(r.as_f64(), 0.1);
        assert_ne!(r, rational(1, 10));
    }
}

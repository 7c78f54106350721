//! Exact numbers of the form `p + q * sqrt(d)` with rational `p`, `q`, `d >= 0`.
//!
//! Only what the bound comparison needs: exact sign, subtraction of a
//! rational, differences of surds over a common radicand, and a float view.

use std::cmp::Ordering;
use std::fmt;

use num::{Signed, Zero};

use crate::scalar::{format_rational, Field, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    rational: Rational,
    coeff: Rational,
    radicand: Rational,
}

impl QuadraticSurd {
    /// `rational + coeff * sqrt(radicand)`. Panics on a negative radicand.
    pub fn new(rational: Rational, coeff: Rational, radicand: Rational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        Self {
            rational,
            coeff,
            radicand,
        }
    }

    pub fn from_rational(value: Rational) -> Self {
        Self::new(value, Rational::zero(), Rational::zero())
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    fn surd_is_zero(&self) -> bool {
        self.coeff.is_zero() || self.radicand.is_zero()
    }

    /// Exact sign as an ordering against zero.
    pub fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&Rational::zero());
        if self.surd_is_zero() {
            return a;
        }
        let b = self.coeff.cmp(&Rational::zero());
        if a == Ordering::Equal || a == b {
            return b;
        }
        // Opposite signs: compare magnitudes squared.
        let lhs = self.rational.square();
        let rhs = self.coeff.square() * self.radicand.clone();
        match lhs.cmp(&rhs) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn sub_rational(&self, value: &Rational) -> Self {
        Self {
            rational: self.rational.clone() - value.clone(),
            coeff: self.coeff.clone(),
            radicand: self.radicand.clone(),
        }
    }

    /// `self - other`, defined when both share the radicand (or one has no surd part).
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let radicand = if other.surd_is_zero() {
            self.radicand.clone()
        } else if self.surd_is_zero() || self.radicand == other.radicand {
            other.radicand.clone()
        } else {
            return None;
        };
        Some(Self {
            rational: self.rational.clone() - other.rational.clone(),
            coeff: self.coeff.clone() - other.coeff.clone(),
            radicand,
        })
    }

    /// Exact ordering against another surd with the same radicand.
    pub fn cmp_same_radicand(&self, other: &Self) -> Option<Ordering> {
        self.checked_sub(other).map(|d| d.signum())
    }

    pub fn to_f64(&self) -> f64 {
        self.rational.as_f64() + self.coeff.as_f64() * self.radicand.as_f64().sqrt()
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd_is_zero() {
            return write!(f, "{}", format_rational(&self.rational));
        }
        write!(
            f,
            "{} + ({})*sqrt({})",
            format_rational(&self.rational),
            format_rational(&self.coeff),
            format_rational(&self.radicand)
        )
    }
}

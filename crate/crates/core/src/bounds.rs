//! Ricci pinching bound functions and their comparison.
//!
//! * `phi(s) = s(n-s) / (s(n-2s) + n(s-1)(n-s))` on `[2, n/2]`
//! * `alpha(n,k,H,c) = (n - 1 - (n-2) phi(k)) (c + H²)`
//! * `b(n,k,H) = n(k-1)/k + n(k-1)H/(2k²) (nH + sqrt(n²H² + 4k(n-k)))`, unit sphere only
//! * `xu_gu(n,H,c) = n(n-1)/(n+2) (c + H²)`
//!
//! `b` carries a square root, so exact comparisons go through
//! [`QuadraticSurd`]; float comparisons refuse to decide inside a small band.

use std::cmp::Ordering;

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadratic::QuadraticSurd;
use crate::scalar::{int, Field, Rational};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct PhiValue<T: Field = f64> {
    pub s: T,
    pub value: T,
    pub derivative: T,
}

fn phi_denominator<T: Field>(n: i64, s: &T) -> T {
    let nt = T::from_int(n);
    let one = T::one();
    let two = T::from_int(2);
    s.clone() * (nt.clone() - two * s.clone()) + nt.clone() * (s.clone() - one) * (nt - s.clone())
}

/// `phi(s)` and `phi'(s) = -n²(n-2s) / denom²`, for `n >= 5`, `2 <= s <= n/2`.
pub fn phi<T: Field>(n: u32, s: &T) -> Result<PhiValue<T>> {
    if n < 5 {
        return Err(Error::domain(format!("phi needs n >= 5, got {n}")));
    }
    let n = n as i64;
    let nt = T::from_int(n);
    if *s < T::from_int(2) || T::from_int(2) * s.clone() > nt {
        return Err(Error::domain(format!(
            "phi argument {} outside [2, {}/2]",
            s.as_f64(),
            n
        )));
    }
    let denom = phi_denominator(n, s);
    if denom <= T::zero() {
        return Err(Error::domain("phi denominator is not positive"));
    }
    let value = s.clone() * (nt.clone() - s.clone()) / denom.clone();
    let derivative = -(nt.clone() * nt.clone()) * (nt - T::from_int(2) * s.clone()) / denom.square();
    Ok(PhiValue {
        s: s.clone(),
        value,
        derivative,
    })
}

fn check_nk(n: u32, k: u32, min_n: u32) -> Result<()> {
    if n < min_n {
        return Err(Error::domain(format!("n = {n} must be >= {min_n}")));
    }
    if k < 2 || k > n / 2 {
        return Err(Error::domain(format!("k = {k} must satisfy 2 <= k <= floor({n}/2)")));
    }
    Ok(())
}

/// `alpha / (c + H²) = n - 1 - (n-2) phi(k)`.
pub fn alpha_coefficient<T: Field>(n: u32, k: u32) -> Result<T> {
    check_nk(n, k, 5)?;
    let ph = phi(n, &T::from_int(k as i64))?.value;
    Ok(T::from_int(n as i64 - 1) - T::from_int(n as i64 - 2) * ph)
}

/// The pinching bound `alpha(n, k, H, c)`.
pub fn alpha<T: Field>(n: u32, k: u32, h: &T, c: &T) -> Result<T> {
    Ok(alpha_coefficient::<T>(n, k)? * (c.clone() + h.square()))
}

/// Same as [`alpha`] with `H²` supplied directly, for exact data whose `H` is irrational.
pub fn alpha_from_h_sq<T: Field>(n: u32, k: u32, h_sq: &T, c: &T) -> Result<T> {
    Ok(alpha_coefficient::<T>(n, k)? * (c.clone() + h_sq.clone()))
}

/// `gamma(k) = k(n-k) - n`.
pub fn gamma(n: u32, k: u32) -> i64 {
    let (n, k) = (n as i64, k as i64);
    k * (n - k) - n
}

fn b_parts(n: u32, k: u32, h: &Rational) -> Result<QuadraticSurd> {
    check_nk(n, k, 4)?;
    if h.is_negative() {
        return Err(Error::domain("b(n,k,H) needs H >= 0"));
    }
    let (n, k) = (n as i64, k as i64);
    let nq = int(n);
    let lead = Rational::ratio(n * (k - 1), k);
    let coeff = Rational::ratio(n * (k - 1), 2 * k * k) * h.clone();
    let rational = lead + coeff.clone() * nq.clone() * h.clone();
    let radicand = nq.square() * h.square() + int(4 * k * (n - k));
    Ok(QuadraticSurd::new(rational, coeff, radicand))
}

/// Exact `b(n, k, H)` as a quadratic surd.
pub fn b_vlachos_exact(n: u32, k: u32, h: &Rational) -> Result<QuadraticSurd> {
    b_parts(n, k, h)
}

pub fn b_vlachos(n: u32, k: u32, h: f64) -> Result<f64> {
    check_nk(n, k, 4)?;
    if !(h >= 0.0) {
        return Err(Error::domain("b(n,k,H) needs H >= 0"));
    }
    let (n, k) = (n as f64, k as f64);
    let root = (n * n * h * h + 4.0 * k * (n - k)).sqrt();
    Ok(n * (k - 1.0) / k + n * (k - 1.0) * h / (2.0 * k * k) * (n * h + root))
}

pub fn xu_gu_bound<T: Field>(n: u32, h: &T, c: &T) -> Result<T> {
    if n < 4 {
        return Err(Error::domain(format!("Xu-Gu bound needs n >= 4, got {n}")));
    }
    let n = n as i64;
    Ok(T::ratio(n * (n - 1), n + 2) * (c.clone() + h.square()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Comparison {
    AlphaGreater,
    Equal,
    BGreater,
}

impl Comparison {
    /// Classifies the sign of `b - alpha`.
    fn from_difference(sign: Ordering) -> Self {
        match sign {
            Ordering::Greater => Comparison::BGreater,
            Ordering::Equal => Comparison::Equal,
            Ordering::Less => Comparison::AlphaGreater,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Comparison::AlphaGreater => "ALPHA_GREATER",
            Comparison::Equal => "EQUAL",
            Comparison::BGreater => "B_GREATER",
        }
    }
}

/// Bounds at fixed `(n, k, H)` on the unit sphere (`c = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: u32,
    pub k: u32,
    pub h: Rational,
    pub c: Rational,
    pub alpha: Rational,
    pub b: QuadraticSurd,
    pub xu_gu: Rational,
    pub gamma_k: i64,
    pub comparison: Comparison,
    /// `b - alpha`, exact.
    pub difference: QuadraticSurd,
}

/// `b - alpha(n,k,H,1)` written through `gamma(k)`:
/// `n(k-1)/(2k²) H sqrt(n²H² + 4k(n-k)) + n(k-1)(n-2k)/(k((n+2)γ + 2n)) (n γ H²/(2k) - (n-k))`.
pub fn difference_gamma_form(n: u32, k: u32, h: &Rational) -> Result<QuadraticSurd> {
    check_nk(n, k, 5)?;
    let g = gamma(n, k);
    let (n, k) = (n as i64, k as i64);
    let outer = Rational::ratio(n * (k - 1) * (n - 2 * k), k * ((n + 2) * g + 2 * n));
    let inner = Rational::ratio(n * g, 2 * k) * h.square() - int(n - k);
    let coeff = Rational::ratio(n * (k - 1), 2 * k * k) * h.clone();
    let radicand = int(n * n) * h.square() + int(4 * k * (n - k));
    Ok(QuadraticSurd::new(outer * inner, coeff, radicand))
}

/// Compares `alpha(n,k,H,1)` with `b(n,k,H)` exactly. The difference is
/// computed by direct subtraction and through the `gamma(k)` form; the two
/// must agree exactly.
pub fn compare_alpha_b(n: u32, k: u32, h: &Rational) -> Result<BoundReport> {
    check_nk(n, k, 5)?;
    if h.is_negative() {
        return Err(Error::domain("comparison needs H >= 0"));
    }
    let c = Rational::from_int(1);
    let a = alpha(n, k, h, &c)?;
    let b = b_vlachos_exact(n, k, h)?;
    let direct = b.sub_rational(&a);
    let via_gamma = difference_gamma_form(n, k, h)?;
    if direct != via_gamma {
        return Err(Error::InternalInconsistency(format!(
            "b - alpha: direct {direct} vs gamma form {via_gamma}"
        )));
    }
    Ok(BoundReport {
        n,
        k,
        h: h.clone(),
        xu_gu: xu_gu_bound(n, h, &c)?,
        c,
        alpha: a,
        b,
        gamma_k: gamma(n, k),
        comparison: Comparison::from_difference(direct.signum()),
        difference: direct,
    })
}

/// Float comparison; refuses to classify when `|b - alpha| <= ambiguity * (1 + |b|)`.
pub fn compare_alpha_b_f64(n: u32, k: u32, h: f64, tol: &Tolerances) -> Result<(Comparison, f64)> {
    check_nk(n, k, 5)?;
    let a = alpha(n, k, &h, &1.0)?;
    let b = b_vlachos(n, k, h)?;
    let direct = b - a;
    let g = gamma(n, k) as f64;
    let (nf, kf) = (n as f64, k as f64);
    let via_gamma = nf * (kf - 1.0) / (2.0 * kf * kf) * h * (nf * nf * h * h + 4.0 * kf * (nf - kf)).sqrt()
        + nf * (kf - 1.0) * (nf - 2.0 * kf) / (kf * ((nf + 2.0) * g + 2.0 * nf))
            * (nf / (2.0 * kf) * g * h * h - (nf - kf));
    if (direct - via_gamma).abs() > 1e-9 * (1.0 + b.abs()) {
        return Err(Error::InternalInconsistency(format!(
            "b - alpha: direct {direct:e} vs gamma form {via_gamma:e}"
        )));
    }
    if direct.abs() <= tol.ambiguity * (1.0 + b.abs()) {
        return Err(Error::AmbiguousComparison { difference: direct });
    }
    let sign = if direct > 0.0 {
        Ordering::Greater
    } else {
        Ordering::Less
    };
    Ok((Comparison::from_difference(sign), direct))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RangeCheck {
    /// `(n-3)(c+H²) < alpha`
    pub lower_strict: bool,
    /// `alpha <= (n-2)(c+H²)`
    pub upper: bool,
    /// `alpha = (n-2)(c+H²)` exactly when `n = 2k`
    pub upper_equality_iff_2k: bool,
}

impl RangeCheck {
    pub fn all(&self) -> bool {
        self.lower_strict && self.upper && self.upper_equality_iff_2k
    }
}

/// Exact check of `(n-3)(c+H²) < alpha <= (n-2)(c+H²)` with equality iff
/// `n = 2k`. By homogeneity it suffices to test the coefficient.
pub fn alpha_range_check(n: u32, k: u32) -> Result<RangeCheck> {
    let coeff = alpha_coefficient::<Rational>(n, k)?;
    let lower = int(n as i64 - 3);
    let upper = int(n as i64 - 2);
    Ok(RangeCheck {
        lower_strict: lower < coeff,
        upper: coeff <= upper,
        upper_equality_iff_2k: (coeff == upper) == (n == 2 * k),
    })
}

/// Bracket `[lo, hi]` around the value `H*` past which `b > alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    pub lo: Rational,
    pub hi: Rational,
}

/// Locates the sign change of `b - alpha` in `H` by exact bisection.
///
/// At `n = 2k` the crossover is `H* = 0` (`lo = hi = 0`). Otherwise the
/// search starts from `[0, 1]`, doubling the upper end until `b > alpha`,
/// and halves the bracket `iterations` times.
pub fn crossover_h(n: u32, k: u32, iterations: u32) -> Result<Crossover> {
    check_nk(n, k, 5)?;
    let cmp = |h: &Rational| -> Result<Comparison> { Ok(compare_alpha_b(n, k, h)?.comparison) };
    let zero = Rational::zero();
    if cmp(&zero)? != Comparison::AlphaGreater {
        return Ok(Crossover {
            lo: zero.clone(),
            hi: zero,
        });
    }
    let mut lo = zero;
    let mut hi = int(1);
    let mut doublings = 0;
    while cmp(&hi)? != Comparison::BGreater {
        lo = hi.clone();
        hi = hi * int(2);
        doublings += 1;
        if doublings > 64 {
            return Err(Error::InternalInconsistency(
                "b never exceeds alpha while doubling H".into(),
            ));
        }
    }
    for _ in 0..iterations {
        let mid = (lo.clone() + hi.clone()) / int(2);
        if cmp(&mid)? == Comparison::BGreater {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Crossover { lo, hi })
}

/// Whether `alpha(n, ·, H, c)` is exactly strictly increasing over `2..=floor(n/2)`.
pub fn alpha_increasing_in_k(n: u32) -> Result<bool> {
    let coeffs = (2..=n / 2)
        .map(|k| alpha_coefficient::<Rational>(n, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(coeffs.windows(2).all(|w| w[0] < w[1]))
}

/// The odd-dimension coefficient `n - 2 - 4/(n³ - 2n² - n - 2)`.
pub fn odd_dimension_coefficient(n: u32) -> Rational {
    let n = n as i64;
    int(n - 2) - Rational::ratio(4, n * n * n - 2 * n * n - n - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn phi_at_midpoint() {
        let p = phi::<Rational>(6, &int(3)).unwrap();
        assert_eq!(p.value, rational(1, 4));
        assert_eq!(p.derivative, int(0));
        let pf = phi::<f64>(6, &3.0).unwrap();
        assert!((pf.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn phi_n5_s2() {
        // 2*3 / (2*1 + 5*1*3) = 6/17
        assert_eq!(phi::<Rational>(5, &int(2)).unwrap().value, rational(6, 17));
    }

    #[test]
    fn phi_decreasing_n10() {
        let s = [2.0, 2.5, 3.0, 4.0, 5.0];
        let vals: Vec<f64> = s.iter().map(|x| phi(10, x).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
        for x in &s[..4] {
            assert!(phi(10, x).unwrap().derivative < 0.0);
        }
        // dense scan agrees with the sign of the derivative
        let mut prev = phi::<Rational>(10, &int(2)).unwrap().value;
        for i in 1..=300 {
            let s = int(2) + rational(i, 100);
            let cur = phi::<Rational>(10, &s).unwrap();
            assert!(cur.value < prev);
            prev = cur.value;
        }
    }

    #[test]
    fn phi_derivative_matches_finite_difference() {
        let (n, s, h) = (11u32, 3.3f64, 1e-6);
        let d = (phi(n, &(s + h)).unwrap().value - phi(n, &(s - h)).unwrap().value) / (2.0 * h);
        assert!((d - phi(n, &s).unwrap().derivative).abs() < 1e-8);
    }

    #[test]
    fn phi_domain() {
        assert!(phi(4, &2.0).is_err());
        assert!(phi(9, &1.9).is_err());
        assert!(phi(9, &4.6).is_err());
        assert!(phi(9, &4.5).is_ok());
    }

    #[test]
    fn alpha_at_n_equals_2k() {
        for k in 3..10u32 {
            let a = alpha::<Rational>(2 * k, k, &rational(3, 7), &rational(1, 5)).unwrap();
            let expected = int(2 * k as i64 - 2) * (rational(1, 5) + rational(9, 49));
            assert_eq!(a, expected);
        }
    }

    #[test]
    fn alpha_n5_k2() {
        let coeff = alpha_coefficient::<Rational>(5, 2).unwrap();
        assert_eq!(coeff, rational(50, 17));
        assert_eq!(coeff, int(3) - rational(4, 68));
        assert_eq!(coeff, odd_dimension_coefficient(5));
    }

    #[test]
    fn alpha_monotone_in_k() {
        let a2 = alpha(7, 2, &0.4, &1.0).unwrap();
        let a3 = alpha(7, 3, &0.4, &1.0).unwrap();
        assert!(a2 < a3);
        for n in 5..30 {
            assert!(alpha_increasing_in_k(n).unwrap());
        }
    }

    #[test]
    fn alpha_domain() {
        assert!(alpha(7, 1, &0.0, &1.0).is_err());
        assert!(alpha(7, 4, &0.0, &1.0).is_err());
        assert!(alpha(4, 2, &0.0, &1.0).is_err());
    }

    #[test]
    fn b_at_h_zero() {
        for n in 4..12u32 {
            for k in 2..=n / 2 {
                let b = b_vlachos_exact(n, k, &int(0)).unwrap();
                assert_eq!(b.rational_part(), &rational((n * (k - 1)) as i64, k as i64));
                assert!(b.coeff().is_zero());
                assert!((b_vlachos(n, k, 0.0).unwrap() - (n * (k - 1)) as f64 / k as f64).abs() < 1e-14);
            }
        }
        // n = 2k, H = 0: b = n - 2 = alpha(n, k, 0, 1)
        let b = b_vlachos_exact(8, 4, &int(0)).unwrap();
        assert_eq!(b.signum(), Ordering::Greater);
        assert!(b.sub_rational(&alpha(8, 4, &int(0), &int(1)).unwrap()).is_zero());
    }

    #[test]
    fn b_n6_k2_h1_high_precision() {
        // 6/2 + (6/8)(6 + sqrt(36 + 32)) = 3 + 4.5 + 0.75 sqrt(68), evaluated to 50 digits:
        // sqrt(68) = 8.2462112512353210996428197119481540502943984507...
        let expected = 7.5 + 0.75 * 8.246_211_251_235_321_099_642_819_711_948_154_050_294_398_450_7;
        let b = b_vlachos_exact(6, 2, &int(1)).unwrap();
        assert_eq!(b.rational_part(), &rational(15, 2));
        assert_eq!(b.coeff(), &rational(3, 4));
        assert_eq!(b.radicand(), &int(68));
        assert!((b.to_f64() - expected).abs() < 1e-14);
        assert!((b_vlachos(6, 2, 1.0).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn b_is_not_homogeneous() {
        // alpha/(c+H²) depends on (n,k) only; b/(1+H²) does not.
        let r0 = b_vlachos(6, 2, 0.0).unwrap() / 1.0;
        let r1 = b_vlachos(6, 2, 1.0).unwrap() / 2.0;
        assert!((r0 - r1).abs() > 1e-3);
        let a0 = alpha(6, 2, &0.0, &1.0).unwrap() / 1.0;
        let a1 = alpha(6, 2, &1.0, &1.0).unwrap() / 2.0;
        assert!((a0 - a1).abs() < 1e-14);
    }

    #[test]
    fn xu_gu_values() {
        assert_eq!(xu_gu_bound::<Rational>(5, &int(0), &int(1)).unwrap(), rational(20, 7));
        assert_eq!(xu_gu_bound::<f64>(9, &0.0, &0.0).unwrap(), 0.0);
        for n in 5..40u32 {
            let xg = xu_gu_bound::<Rational>(n, &rational(1, 3), &int(1)).unwrap();
            let a = alpha::<Rational>(n, 2, &rational(1, 3), &int(1)).unwrap();
            assert!(xg < a, "n = {n}");
        }
        assert!(xu_gu_bound::<f64>(3, &0.0, &1.0).is_err());
    }

    #[test]
    fn trichotomy_examples() {
        assert_eq!(
            compare_alpha_b(7, 2, &int(0)).unwrap().comparison,
            Comparison::AlphaGreater
        );
        assert_eq!(compare_alpha_b(6, 3, &int(0)).unwrap().comparison, Comparison::Equal);
        assert_eq!(
            compare_alpha_b(6, 3, &rational(1, 100)).unwrap().comparison,
            Comparison::BGreater
        );
        assert_eq!(
            compare_alpha_b(7, 2, &int(100)).unwrap().comparison,
            Comparison::BGreater
        );
    }

    #[test]
    fn float_comparison_refuses_ties() {
        let tol = Tolerances::default();
        assert!(matches!(
            compare_alpha_b_f64(6, 3, 0.0, &tol),
            Err(Error::AmbiguousComparison { .. })
        ));
        assert_eq!(compare_alpha_b_f64(7, 2, 100.0, &tol).unwrap().0, Comparison::BGreater);
        assert_eq!(
            compare_alpha_b_f64(7, 2, 0.0, &tol).unwrap().0,
            Comparison::AlphaGreater
        );
    }

    #[test]
    fn crossover_brackets_sign_change() {
        let cr = crossover_h(7, 2, 40).unwrap();
        assert_eq!(compare_alpha_b(7, 2, &cr.hi).unwrap().comparison, Comparison::BGreater);
        assert_ne!(compare_alpha_b(7, 2, &cr.lo).unwrap().comparison, Comparison::BGreater);
        assert!((cr.hi.clone() - cr.lo.clone()).as_f64() < 1e-11);
        // near 0.215 per a coarse float scan
        assert!((cr.hi.as_f64() - 0.2155).abs() < 0.01);
        let cr = crossover_h(8, 4, 40).unwrap();
        assert!(cr.hi.is_zero());
    }

    #[test]
    fn range_check_cases() {
        assert!(alpha_range_check(6, 3).unwrap().all());
        assert_eq!(alpha_coefficient::<Rational>(6, 3).unwrap(), int(4));
        let r = alpha_range_check(9, 4).unwrap();
        assert!(r.all());
        assert!(alpha_coefficient::<Rational>(9, 4).unwrap() < int(7));
        assert!(alpha_range_check(9, 5).is_err());
    }
}

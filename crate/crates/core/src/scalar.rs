//! Minimal algebraic traits shared by every coefficient type.
//!
//! Elements carry their own context (number field, ring signature), so the
//! additive and multiplicative identities are produced from an existing
//! element rather than from a global constructor.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Commutative ring with decidable (or explicitly undecidable) zero test.
pub trait Ring: Clone + fmt::Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Zero test; truncated values may be undecidable.
    fn try_is_zero(&self) -> Result<bool>;
    /// Image of a rational number in this ring.
    fn from_rational_like(&self, q: &Rational) -> Self;
    /// Quotient when `divisor` divides `self` exactly; `None` when not
    /// supported or not divisible.
    fn div_exact(&self, _divisor: &Self) -> Option<Self> {
        None
    }

    fn pow_u(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.times(&base);
            }
        }
        acc
    }

    fn scale_rational(&self, q: &Rational) -> Self {
        self.times(&self.from_rational_like(q))
    }
}

/// Ring in which every non-zero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Result<Self>;

    fn divide(&self, other: &Self) -> Result<Self> {
        Ok(self.times(&other.inv()?))
    }
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn try_is_zero(&self) -> Result<bool> {
        Ok(self.is_zero())
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        q.clone()
    }
    fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            None
        } else {
            Some(self / divisor)
        }
    }
}

impl Field for Rational {
    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"p/q"` or a decimal integer string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Height used for deterministic enumeration: `|numerator| + denominator`.
pub fn height(q: &Rational) -> BigInt {
    q.numer().abs() + q.denom()
}

/// All rationals of height exactly `h`, ordered by denominator then sign
/// (positive first).
pub fn rationals_of_height(h: u64) -> Vec<Rational> {
    if h == 1 {
        return vec![Rational::zero()];
    }
    let mut out = Vec::new();
    for d in 1..h {
        let n = h - d;
        if n.gcd(&d) != 1 {
            continue;
        }
        let q = Rational::new(BigInt::from(n), BigInt::from(d));
        out.push(q.clone());
        out.push(-q);
    }
    out
}

/// Simplest rational strictly inside the open interval `(lo, hi)`, with
/// `None` meaning unbounded on that side.
pub fn simplest_between(lo: Option<&Rational>, hi: Option<&Rational>) -> Option<Rational> {
    if let (Some(l), Some(h)) = (lo, hi) {
        if l >= h {
            return None;
        }
    }
    let zero = Rational::zero();
    let inside = |q: &Rational| lo.is_none_or(|l| q > l) && hi.is_none_or(|h| q < h);
    if inside(&zero) {
        return Some(zero);
    }
    match (lo, hi) {
        (Some(l), None) => Some(Rational::from_integer(l.floor().to_integer() + 1)),
        (None, Some(h)) => Some(Rational::from_integer(h.ceil().to_integer() - 1)),
        (Some(l), Some(h)) => {
            if h <= &zero {
                // interval on the negative side: mirror
                let m = simplest_between(Some(&-h), Some(&-l))?;
                return Some(-m);
            }
            Some(stern_brocot(l, h))
        }
        (None, None) => Some(zero),
    }
}

fn stern_brocot(lo: &Rational, hi: &Rational) -> Rational {
    // lo >= 0, lo < hi; walk the Stern-Brocot tree
    let (mut a, mut b, mut c, mut d) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    loop {
        let n = &a + &c;
        let m = &b + &d;
        let mid = Rational::new(n.clone(), m.clone());
        if &mid <= lo {
            a = n;
            b = m;
        } else if &mid >= hi {
            c = n;
            d = m;
        } else {
            return mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_enumerate() {
        assert_eq!(rationals_of_height(1), vec![rint(0)]);
        assert_eq!(rationals_of_height(2), vec![rint(1), rint(-1)]);
        assert_eq!(rationals_of_height(3), vec![rint(2), rint(-2), rat(1, 2), rat(-1, 2)]);
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(Some(&rat(1, 3)), Some(&rat(1, 2))), Some(rat(2, 5)));
        assert_eq!(simplest_between(Some(&rint(-1)), Some(&rint(1))), Some(rint(0)));
        assert_eq!(simplest_between(Some(&rat(5, 2)), None), Some(rint(3)));
        assert_eq!(simplest_between(Some(&rint(-3)), Some(&rint(-2))), Some(rat(-5, 2)));
        assert_eq!(simplest_between(Some(&rint(2)), Some(&rint(1))), None);
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["0", "-3", "7/2", "-1/9"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert!(parse_rational("1/0").is_err());
    }
}

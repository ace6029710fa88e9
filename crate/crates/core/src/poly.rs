//! Dense univariate polynomials over any [`Ring`].

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Field, Rational, Ring};

/// Polynomial `c[0] + c[1] X + ...`, trailing exact zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Ring> {
    coeffs: Vec<S>,
    zero: S,
}

impl<S: Ring> Poly<S> {
    pub fn new(coeffs: Vec<S>, zero: S) -> Self {
        let zero = zero.zero_like();
        let mut p = Poly { coeffs, zero };
        p.trim();
        p
    }

    pub fn zero(proto: &S) -> Self {
        Poly { coeffs: Vec::new(), zero: proto.zero_like() }
    }

    pub fn constant(c: S) -> Self {
        let zero = c.zero_like();
        Poly::new(vec![c], zero)
    }

    /// The variable `X`.
    pub fn x(proto: &S) -> Self {
        Poly::new(vec![proto.zero_like(), proto.one_like()], proto.zero_like())
    }

    /// `c X^n`.
    pub fn monomial(c: S, n: usize) -> Self {
        let zero = c.zero_like();
        let mut v = vec![zero.clone(); n];
        v.push(c);
        Poly::new(v, zero)
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if matches!(last.try_is_zero(), Ok(true)) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn proto(&self) -> &S {
        &self.zero
    }

    /// Coefficient of `X^i` (zero past the end).
    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.zero.clone())
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero_poly(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn map<T: Ring>(&self, zero: &T, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(f).collect(), zero.clone())
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = self.zero.clone();
        for c in self.coeffs.iter().rev() {
            acc = acc.times(x).plus(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale_rational(&Rational::from_integer((i as i64).into())))
            .collect();
        Poly::new(v, self.zero.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|x| x.times(c)).collect(), self.zero.clone())
    }

    /// `p(X + shift)`.
    pub fn taylor_shift(&self, shift: &S) -> Self {
        // Horner in the polynomial ring
        let lin = Poly::new(vec![shift.clone(), shift.one_like()], self.zero.clone());
        let mut acc = Poly::zero(&self.zero);
        for c in self.coeffs.iter().rev() {
            acc = acc.times(&lin).plus(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Quotient and remainder by the monic linear factor `X - r`.
    pub fn divide_linear(&self, r: &S) -> (Self, S) {
        let n = self.coeffs.len();
        if n == 0 {
            return (self.clone(), self.zero.clone());
        }
        let mut q = vec![self.zero.clone(); n - 1];
        let mut carry = self.zero.clone();
        for i in (0..n).rev() {
            let cur = self.coeffs[i].plus(&carry.times(r));
            if i == 0 {
                return (Poly::new(q, self.zero.clone()), cur);
            }
            q[i - 1] = cur.clone();
            carry = cur;
        }
        unreachable!()
    }

    /// Multiplies out `prod (X - r_i)^{m_i}`.
    pub fn from_roots(roots: &[(S, usize)], proto: &S) -> Self {
        let mut acc = Poly::constant(proto.one_like());
        for (r, m) in roots {
            let lin = Poly::new(vec![r.negated(), proto.one_like()], proto.zero_like());
            for _ in 0..*m {
                acc = acc.times(&lin);
            }
        }
        acc
    }

    /// Largest `k` with `X^k` dividing `self` (exact zero test).
    pub fn x_adic_valuation(&self) -> Result<usize> {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.try_is_zero()? {
                return Ok(i);
            }
        }
        Err(Error::ZeroPolynomial)
    }
}

impl<S: Field> Poly<S> {
    /// Euclidean division over a field.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = d.leading().inv()?;
        let mut r = self.coeffs.clone();
        let n = r.len();
        if n <= dd {
            return Ok((Poly::zero(&self.zero), self.clone()));
        }
        let mut q = vec![self.zero.clone(); n - dd];
        for i in (dd..n).rev() {
            let c = r[i].times(&lc_inv);
            if !c.try_is_zero()? {
                for j in 0..=dd {
                    r[i - dd + j] = r[i - dd + j].minus(&c.times(&d.coeffs[j]));
                }
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(q, self.zero.clone()), Poly::new(r, self.zero.clone())))
    }

    pub fn monic(&self) -> Result<Self> {
        let inv = self.leading().inv()?;
        Ok(self.scale(&inv))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero_poly() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero_poly() {
            return Ok(a);
        }
        a.monic()
    }

    /// `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> Result<Self> {
        if self.is_zero_poly() {
            return Err(Error::ZeroPolynomial);
        }
        let g = self.gcd(&self.derivative())?;
        let (q, _) = self.div_rem(&g)?;
        q.monic()
    }
}

impl<S: Ring> Ring for Poly<S> {
    fn zero_like(&self) -> Self {
        Poly::zero(&self.zero)
    }
    fn one_like(&self) -> Self {
        Poly::constant(self.zero.one_like())
    }
    fn plus(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i).plus(&other.coeff(i))).collect(), self.zero.clone())
    }
    fn minus(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i).minus(&other.coeff(i))).collect(), self.zero.clone())
    }
    fn times(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return self.zero_like();
        }
        let mut v = vec![self.zero.clone(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if matches!(a.try_is_zero(), Ok(true)) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].plus(&a.times(b));
            }
        }
        Poly::new(v, self.zero.clone())
    }
    fn negated(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.negated()).collect(), self.zero.clone())
    }
    fn try_is_zero(&self) -> Result<bool> {
        for c in &self.coeffs {
            if !c.try_is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        Poly::constant(self.zero.from_rational_like(q))
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        let dd = d.degree()?;
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let n = r.len();
        if n == 0 {
            return Some(self.clone());
        }
        if n <= dd {
            return None;
        }
        let mut q = vec![self.zero.clone(); n - dd];
        for i in (dd..n).rev() {
            if r[i].try_is_zero().ok()? {
                continue;
            }
            let c = r[i].div_exact(&lead)?;
            for j in 0..=dd {
                r[i - dd + j] = r[i - dd + j].minus(&c.times(&d.coeffs[j]));
            }
            q[i - dd] = c;
        }
        for c in r.iter().take(dd) {
            if !c.try_is_zero().ok()? {
                return None;
            }
        }
        Some(Poly::new(q, self.zero.clone()))
    }
}

impl<S: Ring + fmt::Display> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, "X")
    }
}

impl<S: Ring + fmt::Display> Poly<S> {
    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        write!(f, "{}", self.render(var))
    }

    pub fn render(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if matches!(c.try_is_zero(), Ok(true)) {
                continue;
            }
            let cs = c.to_string();
            let cs = if has_top_level_sum(&cs) { format!("({cs})") } else { cs };
            let power = if i == 1 { var.to_string() } else { format!("{var}^{i}") };
            parts.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => power,
                (_, "-1") => format!("-{power}"),
                _ => format!("{cs}*{power}"),
            });
        }
        let mut out = String::new();
        for (k, p) in parts.iter().enumerate() {
            match (k, p.strip_prefix('-')) {
                (0, _) => out.push_str(p),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

/// True when `s` has a binary `+` or `-` outside parentheses.
fn has_top_level_sum(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > 0 && !s[..i].ends_with('^') && !s[..i].ends_with('(') => return true,
            _ => {}
        }
    }
    false
}

/// Sylvester-matrix resultant, computed by a division-free determinant.
pub fn resultant<S: Ring>(p: &Poly<S>, q: &Poly<S>) -> Result<S> {
    let (m, n) = match (p.degree(), q.degree()) {
        (Some(m), Some(n)) => (m, n),
        _ => return Err(Error::ZeroPolynomial),
    };
    let size = m + n;
    let zero = p.proto().zero_like();
    if size == 0 {
        return Ok(zero.one_like());
    }
    let mut rows = vec![vec![zero.clone(); size]; size];
    for (r, row) in rows.iter_mut().enumerate().take(n) {
        for i in 0..=m {
            row[r + i] = p.coeff(m - i);
        }
    }
    for r in 0..m {
        for i in 0..=n {
            rows[n + r][r + i] = q.coeff(n - i);
        }
    }
    let mat = crate::matrix::Matrix::from_rows(rows, &zero)?;
    mat.det_division_free()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rint;

    fn p(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&c| rint(c)).collect(), rint(0))
    }

    #[test]
    fn squarefree_strips_repeated_factor() {
        // X^2 (X^3 - 729)
        let f = p(&[0, 0, -729, 0, 0, 1]);
        assert_eq!(f.squarefree_part().unwrap(), p(&[0, -729, 0, 0, 1]));
    }

    #[test]
    fn linear_division() {
        let f = p(&[-1, 0, 1]);
        let (q, r) = f.divide_linear(&rint(1));
        assert_eq!(q, p(&[1, 1]));
        assert_eq!(r, rint(0));
    }

    #[test]
    fn resultant_of_linear_pair() {
        // Res(X - 3, X + 3) = -6 - 0 ... = (3) - (-3) sign convention: det [[1,-3],[1,3]] = 6
        assert_eq!(resultant(&p(&[-3, 1]), &p(&[3, 1])).unwrap(), rint(6));
    }

    #[test]
    fn exact_division() {
        let a = p(&[-1, 0, 1]);
        assert_eq!(a.div_exact(&p(&[1, 1])), Some(p(&[-1, 1])));
        assert_eq!(a.div_exact(&p(&[2, 1])), None);
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let f = p(&[5, -3, 0, 2]);
        let g = f.taylor_shift(&rint(4));
        for x in -3..4 {
            assert_eq!(g.eval(&rint(x)), f.eval(&rint(x + 4)));
        }
    }
}

impl<S: Ring> Poly<S> {
    /// Pseudo-division: `lc(d)^(deg self - deg d + 1) * self = q * d + r`.
    pub fn pseudo_div(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let Some(n) = self.degree() else { return Ok((self.zero_like(), self.clone())) };
        if n < dd {
            return Ok((self.zero_like(), self.clone()));
        }
        let lead = d.leading();
        let mut r = self.clone();
        let mut q = self.zero_like();
        for _ in 0..=(n - dd) {
            let k = r.coeffs.len();
            let top = if k > dd { r.coeff(k - 1) } else { self.zero.clone() };
            q = q.scale(&lead);
            r = r.scale(&lead);
            if k > dd && !top.try_is_zero()? {
                let shift = Poly::monomial(top, k - 1 - dd);
                q = q.plus(&shift);
                r = r.minus(&shift.times(d));
            }
        }
        Ok((q, r))
    }

    /// A greatest common divisor up to a ring scalar, by the subresultant
    /// remainder sequence (exact divisions only).
    pub fn subresultant_gcd(&self, other: &Self) -> Result<Self> {
        let (mut a, mut b) = match (self.degree(), other.degree()) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(m), Some(n)) if m >= n => (self.clone(), other.clone()),
            _ => (other.clone(), self.clone()),
        };
        let one = self.zero.one_like();
        let mut g = one.clone();
        let mut h = one.clone();
        loop {
            let delta = a.degree().expect("non-zero") - b.degree().expect("non-zero");
            let (_, r) = a.pseudo_div(&b)?;
            if r.try_is_zero()? {
                return Ok(b);
            }
            if r.degree() == Some(0) {
                return Ok(Poly::constant(one));
            }
            let divisor = g.times(&h.pow_u(delta as u64));
            let next = Poly::new(
                r.coeffs
                    .iter()
                    .map(|c| c.div_exact(&divisor).ok_or_else(|| Error::PrecisionExhausted("inexact subresultant step".into())))
                    .collect::<Result<_>>()?,
                self.zero.clone(),
            );
            a = b;
            b = next;
            g = a.leading();
            h = if delta == 0 {
                h
            } else {
                g.pow_u(delta as u64)
                    .div_exact(&h.pow_u(delta as u64 - 1))
                    .ok_or_else(|| Error::PrecisionExhausted("inexact subresultant step".into()))?
            };
        }
    }

    /// `p / gcd(p, p')` up to a ring scalar, without inverting coefficients.
    pub fn squarefree_part_exact(&self) -> Result<Self> {
        if self.is_zero_poly() {
            return Err(Error::ZeroPolynomial);
        }
        let g = self.subresultant_gcd(&self.derivative())?;
        if g.degree() == Some(0) {
            return Ok(self.clone());
        }
        let (q, r) = self.pseudo_div(&g)?;
        if !r.try_is_zero()? {
            return Err(Error::PrecisionExhausted("gcd does not divide the polynomial".into()));
        }
        Ok(q)
    }
}

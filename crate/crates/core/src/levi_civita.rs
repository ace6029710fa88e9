//! The Levi-Civita field `F_K = K((a^Q))` and the graded ring `S = F_K[b, 1/b]`.
//!
//! Elements are finite sums `sum x_q a^q` with an optional truncation order:
//! when present, everything at exponent `>= trunc` is unknown.  The absolute
//! value is `|x| = 2^{-val(x)}`; all comparisons happen on exact rational
//! valuations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number_field::{same_field, NFElem, NumberField};
use crate::scalar::{fmt_rational, rint, Field, Rational, Ring};

/// Default truncation order for inverses and infinite sums.
pub const DEFAULT_TRUNCATION: i64 = 24;

/// Truncation order in force: `QH_TRUNC` when set to a rational, else 24.
pub fn default_truncation() -> Rational {
    static ORDER: OnceLock<Rational> = OnceLock::new();
    ORDER
        .get_or_init(|| {
            std::env::var("QH_TRUNC")
                .ok()
                .and_then(|s| crate::scalar::parse_rational(&s).ok())
                .filter(|q| q.is_positive())
                .unwrap_or_else(|| rint(DEFAULT_TRUNCATION))
        })
        .clone()
}

#[derive(Clone)]
pub struct LCNumber {
    field: Arc<NumberField>,
    /// Strictly increasing exponents, non-zero coefficients.
    terms: Vec<(Rational, NFElem)>,
    trunc: Option<Rational>,
}

/// Logarithmic absolute value `log2 |x|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsLog {
    /// `x = 0` exactly.
    Zero,
    /// `log2 |x| = value`.
    Exact(Rational),
    /// Only known that `log2 |x| < value` (all stored terms vanished).
    Below(Rational),
}

impl LCNumber {
    pub fn zero(field: &Arc<NumberField>) -> Self {
        LCNumber { field: field.clone(), terms: Vec::new(), trunc: None }
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        LCNumber::constant(NFElem::one(field))
    }

    pub fn constant(c: NFElem) -> Self {
        LCNumber::monomial(c, Rational::zero())
    }

    pub fn from_rational(field: &Arc<NumberField>, q: Rational) -> Self {
        LCNumber::constant(NFElem::from_rational(field, q))
    }

    /// `c a^e`.
    pub fn monomial(c: NFElem, e: Rational) -> Self {
        let field = c.field().clone();
        let terms = if c.is_zero() { Vec::new() } else { vec![(e, c)] };
        LCNumber { field, terms, trunc: None }
    }

    /// The uniformizer `a`.
    pub fn a(field: &Arc<NumberField>) -> Self {
        LCNumber::monomial(NFElem::one(field), Rational::one())
    }

    /// `a^e` for rational `e`.
    pub fn a_pow(field: &Arc<NumberField>, e: Rational) -> Self {
        LCNumber::monomial(NFElem::one(field), e)
    }

    /// Builds from arbitrary `(exponent, coefficient)` pairs, merging equal
    /// exponents and dropping anything at or above `trunc`.
    pub fn from_terms(field: &Arc<NumberField>, terms: Vec<(Rational, NFElem)>, trunc: Option<Rational>) -> Result<Self> {
        let mut map: BTreeMap<Rational, NFElem> = BTreeMap::new();
        for (e, c) in terms {
            if !same_field(c.field(), field) {
                return Err(Error::FieldMismatch);
            }
            let entry = map.entry(e).or_insert_with(|| NFElem::zero(field));
            *entry = entry.plus(&c);
        }
        Ok(LCNumber::from_map(field, map, trunc))
    }

    fn from_map(field: &Arc<NumberField>, map: BTreeMap<Rational, NFElem>, trunc: Option<Rational>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(e, c)| !c.is_zero() && trunc.as_ref().is_none_or(|t| e < t))
            .collect();
        LCNumber { field: field.clone(), terms, trunc }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn terms(&self) -> &[(Rational, NFElem)] {
        &self.terms
    }

    pub fn trunc(&self) -> Option<&Rational> {
        self.trunc.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// Drops terms at or above `order` and records the truncation.
    pub fn truncate(&self, order: &Rational) -> Self {
        let t = match &self.trunc {
            Some(t) if t < order => t.clone(),
            _ => order.clone(),
        };
        let terms = self.terms.iter().filter(|(e, _)| e < &t).cloned().collect();
        LCNumber { field: self.field.clone(), terms, trunc: Some(t) }
    }

    /// Valuation: `Ok(None)` for exact zero.
    pub fn valuation(&self) -> Result<Option<Rational>> {
        match (self.terms.first(), &self.trunc) {
            (Some((e, _)), _) => Ok(Some(e.clone())),
            (None, None) => Ok(None),
            (None, Some(t)) => Err(Error::UndecidableAtTruncation { order: fmt_rational(t) }),
        }
    }

    /// Certified lower bound on the valuation (`None` means exact zero).
    pub fn valuation_lower_bound(&self) -> Option<Rational> {
        match (self.terms.first(), &self.trunc) {
            (Some((e, _)), _) => Some(e.clone()),
            (None, None) => None,
            (None, Some(t)) => Some(t.clone()),
        }
    }

    /// `log2 |x|`, i.e. minus the valuation.
    pub fn lc_abs(&self) -> Result<AbsLog> {
        match (self.terms.first(), &self.trunc) {
            (Some((e, _)), _) => Ok(AbsLog::Exact(-e.clone())),
            (None, None) => Ok(AbsLog::Zero),
            (None, Some(t)) if t.is_positive() => Ok(AbsLog::Below(-t.clone())),
            (None, Some(t)) => Err(Error::UndecidableAtTruncation { order: fmt_rational(t) }),
        }
    }

    /// Leading coefficient and exponent.
    pub fn leading(&self) -> Result<Option<(Rational, NFElem)>> {
        match (self.terms.first(), &self.trunc) {
            (Some(t), _) => Ok(Some(t.clone())),
            (None, None) => Ok(None),
            (None, Some(t)) => Err(Error::UndecidableAtTruncation { order: fmt_rational(t) }),
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.trunc.is_none() && self.terms.len() == 1
    }

    /// Coefficient of `a^e` (zero when absent; undecidable past truncation).
    pub fn coeff(&self, e: &Rational) -> Result<NFElem> {
        if let Some(t) = &self.trunc {
            if e >= t {
                return Err(Error::UndecidableAtTruncation { order: fmt_rational(t) });
            }
        }
        Ok(self.terms.iter().find(|(x, _)| x == e).map_or_else(|| NFElem::zero(&self.field), |(_, c)| c.clone()))
    }

    /// Largest stored exponent.
    pub fn top_exponent(&self) -> Option<&Rational> {
        self.terms.last().map(|(e, _)| e)
    }

    fn combine_trunc(a: Option<&Rational>, b: Option<&Rational>) -> Option<Rational> {
        match (a, b) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (Some(x), Some(y)) => Some(x.min(y).clone()),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        let trunc = Self::combine_trunc(self.trunc.as_ref(), other.trunc.as_ref());
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take = match (self.terms.get(i), other.terms.get(j)) {
                (Some((e1, _)), Some((e2, _))) => e1.cmp(e2),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match take {
                std::cmp::Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = self.terms[i].1.plus(&other.terms[j].1);
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        if let Some(t) = &trunc {
            out.retain(|(e, _)| e < t);
        }
        Ok(LCNumber { field: self.field.clone(), terms: out, trunc })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        // exact zero absorbs everything
        if (self.terms.is_empty() && self.trunc.is_none()) || (other.terms.is_empty() && other.trunc.is_none()) {
            return Ok(LCNumber::zero(&self.field));
        }
        let trunc = match (&self.trunc, &other.trunc) {
            (None, None) => None,
            _ => {
                let v1 = self.valuation_lower_bound().expect("non-zero");
                let v2 = other.valuation_lower_bound().expect("non-zero");
                let a = other.trunc.as_ref().map(|t| &v1 + t);
                let b = self.trunc.as_ref().map(|t| &v2 + t);
                Self::combine_trunc(a.as_ref(), b.as_ref())
            }
        };
        if self.terms.len() == 1 {
            return Ok(other.mul_monomial(&self.terms[0].1, &self.terms[0].0).with_trunc(trunc));
        }
        if other.terms.len() == 1 {
            return Ok(self.mul_monomial(&other.terms[0].1, &other.terms[0].0).with_trunc(trunc));
        }
        let mut map: BTreeMap<Rational, NFElem> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if trunc.as_ref().is_some_and(|t| &e >= t) {
                    continue;
                }
                let p = c1.times(c2);
                match map.get_mut(&e) {
                    Some(v) => *v = v.plus(&p),
                    None => {
                        map.insert(e, p);
                    }
                }
            }
        }
        Ok(LCNumber::from_map(&self.field, map, trunc))
    }

    fn with_trunc(mut self, trunc: Option<Rational>) -> Self {
        if let Some(t) = &trunc {
            self.terms.retain(|(e, _)| e < t);
        }
        self.trunc = trunc;
        self
    }

    /// `self * c a^e`, exact in the monomial.
    pub fn mul_monomial(&self, c: &NFElem, e: &Rational) -> Self {
        if c.is_zero() {
            return LCNumber::zero(&self.field);
        }
        LCNumber {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(x, y)| (x + e, y.times(c))).collect(),
            trunc: self.trunc.as_ref().map(|t| t + e),
        }
    }

    /// Inverse expanded to absolute exponent `order` when not a monomial.
    pub fn inv_to(&self, order: &Rational) -> Result<Self> {
        let (p, c) = match self.leading()? {
            Some(l) => l,
            None => return Err(Error::DivisionByZero),
        };
        let cinv = c.try_inv()?;
        let minus_p = -p.clone();
        if self.is_monomial() {
            return Ok(LCNumber::monomial(cinv, minus_p));
        }
        // x = c a^p (1 + u), val(u) > 0
        let normalized = self.mul_monomial(&cinv, &minus_p);
        let u = normalized.try_add(&LCNumber::one(&self.field).negated())?;
        let mut target = order + &p;
        if let Some(t) = &self.trunc {
            // relative precision of x carries over to its inverse
            let rel = t - &p;
            if rel < target {
                target = rel;
            }
        }
        let m = u.valuation_lower_bound().expect("u is non-zero when x is not a monomial");
        let neg_u = u.negated().truncate(&target);
        let mut sum = LCNumber::one(&self.field);
        let mut power = LCNumber::one(&self.field);
        let mut n = Rational::zero();
        loop {
            n += Rational::one();
            if &n * &m >= target {
                break;
            }
            power = power.try_mul(&neg_u)?.truncate(&target);
            sum = sum.try_add(&power)?;
        }
        let sum = sum.truncate(&target);
        Ok(sum.mul_monomial(&cinv, &minus_p))
    }

    /// Exact division of finite-support elements, by long division from the
    /// top exponent.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (dp, dc) = d.leading().ok()??;
        if d.is_monomial() {
            let inv = dc.try_inv().ok()?;
            return Some(self.mul_monomial(&inv, &-dp));
        }
        if !self.is_exact() || !d.is_exact() {
            return None;
        }
        if self.terms.is_empty() {
            return Some(self.clone());
        }
        let (dtop_e, dtop_c) = d.terms.last().cloned()?;
        let dtop_inv = dtop_c.try_inv().ok()?;
        let floor = &self.terms[0].0 - &dp;
        let mut rem = self.clone();
        let mut q: Vec<(Rational, NFElem)> = Vec::new();
        while let Some((e, c)) = rem.terms.last().cloned() {
            let qe = &e - &dtop_e;
            if qe < floor {
                return None;
            }
            let qc = c.times(&dtop_inv);
            rem = rem.try_add(&d.mul_monomial(&qc, &qe).negated()).ok()?;
            q.push((qe, qc));
        }
        q.reverse();
        Some(LCNumber { field: self.field.clone(), terms: q, trunc: None })
    }

    /// Substitutes `a -> a^scale` (`scale > 0`).
    pub fn rescale_exponents(&self, scale: &Rational) -> Self {
        LCNumber {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e * scale, c.clone())).collect(),
            trunc: self.trunc.as_ref().map(|t| t * scale),
        }
    }

    /// Moves coefficients into a larger field through `embed`.
    pub fn map_coeffs(&self, field: &Arc<NumberField>, embed: impl Fn(&NFElem) -> NFElem) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), embed(c))).filter(|(_, c)| !c.is_zero()).collect();
        LCNumber { field: field.clone(), terms, trunc: self.trunc.clone() }
    }

    /// Same series with coefficients moved into `target` (rational
    /// coefficients always move; others only between equal fields).
    pub fn coerce_into(&self, target: &Arc<NumberField>) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((e.clone(), c.coerce_into(target)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LCNumber { field: target.clone(), terms, trunc: self.trunc.clone() })
    }

    /// Exact integer power (negative exponents only for monomials or to the
    /// default truncation).
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            return Ok(self.pow_u(e as u64));
        }
        Ok(self.inv_to(&default_truncation())?.pow_u(e.unsigned_abs()))
    }

    /// `k`-th root of a monomial `c a^p` when `c` has a root in `K`.
    pub fn monomial_root(&self, k: u32) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (p, c) = &self.terms[0];
        let r = c.nth_root(k)?;
        Some(LCNumber::monomial(r, p / rint(k as i64)))
    }
}

/// Field operation selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcOp {
    Add,
    Mul,
    Inv,
}

/// Field arithmetic; `y` is ignored for `Inv`, which expands to the default
/// truncation order.
pub fn lc_arith(x: &LCNumber, y: &LCNumber, op: LcOp) -> Result<LCNumber> {
    match op {
        LcOp::Add => x.try_add(y),
        LcOp::Mul => x.try_mul(y),
        LcOp::Inv => x.inv_to(&default_truncation()),
    }
}

pub fn lc_abs(x: &LCNumber) -> Result<AbsLog> {
    x.lc_abs()
}

/// A group of family members sharing one certified valuation bound.
#[derive(Clone, Debug)]
pub struct FamilyGroup {
    pub weight: u64,
    pub members: Vec<LCNumber>,
}

/// Sums a family grouped by weight `N`, given a certified lower bound
/// `w(N)` on the valuation of every member of group `N`.
///
/// The bound must tend to infinity (probed on a doubling sequence past the
/// supplied groups) and must hold on every supplied member; otherwise the
/// family is rejected with [`Error::DivergenceCertificate`].  When
/// `finite` is false the supplied groups are a prefix of an infinite family
/// and the result is truncated at the bound of the first missing group.
pub fn lc_sum_family(
    field: &Arc<NumberField>,
    groups: &[FamilyGroup],
    bound: impl Fn(u64) -> Rational,
    finite: bool,
    order: Option<&Rational>,
) -> Result<LCNumber> {
    let mut sorted: Vec<&FamilyGroup> = groups.iter().collect();
    sorted.sort_by_key(|g| g.weight);
    for g in &sorted {
        let w = bound(g.weight);
        for (i, x) in g.members.iter().enumerate() {
            if let Some(v) = x.valuation_lower_bound() {
                if v < w {
                    return Err(Error::DivergenceCertificate(format!(
                        "member {i} of group {} has valuation {} below the certified bound {}",
                        g.weight,
                        fmt_rational(&v),
                        fmt_rational(&w)
                    )));
                }
            }
        }
    }
    let last = sorted.last().map_or(0, |g| g.weight);
    let mut probe = last.max(1);
    let mut prev = bound(probe);
    let start = prev.clone();
    for _ in 0..8 {
        let next_n = probe.saturating_mul(2);
        let next = bound(next_n);
        if next <= prev {
            return Err(Error::DivergenceCertificate(format!(
                "certified bound does not increase: w({probe}) = {}, w({next_n}) = {}",
                fmt_rational(&prev),
                fmt_rational(&next)
            )));
        }
        probe = next_n;
        prev = next;
    }
    if prev <= start {
        return Err(Error::DivergenceCertificate("certified bound stays bounded".into()));
    }
    let mut sum = LCNumber::zero(field);
    for g in &sorted {
        for x in &g.members {
            sum = sum.try_add(x)?;
        }
    }
    let mut trunc = if finite { None } else { Some(bound(last + 1)) };
    if let Some(o) = order {
        trunc = Some(match trunc {
            Some(t) if &t < o => t,
            _ => o.clone(),
        });
    }
    Ok(match trunc {
        Some(t) => sum.truncate(&t),
        None => sum,
    })
}

impl PartialEq for LCNumber {
    fn eq(&self, other: &Self) -> bool {
        same_field(&self.field, &other.field) && self.terms == other.terms && self.trunc == other.trunc
    }
}

impl fmt::Debug for LCNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub(crate) fn fmt_power(var: &str, e: &Rational) -> String {
    if e.is_one() {
        var.to_string()
    } else if e.is_integer() && !e.is_negative() {
        format!("{var}^{}", e.numer())
    } else {
        format!("{var}^({})", fmt_rational(e))
    }
}

impl fmt::Display for LCNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in &self.terms {
            let cs = c.to_string();
            let compound = cs.contains(" + ") || cs.contains(" - ");
            if e.is_zero() {
                parts.push(if compound { format!("({cs})") } else { cs });
                continue;
            }
            let m = fmt_power("a", e);
            parts.push(match cs.as_str() {
                "1" => m,
                "-1" => format!("-{m}"),
                _ if compound => format!("({cs})*{m}"),
                _ => format!("{cs}*{m}"),
            });
        }
        if let Some(t) = &self.trunc {
            parts.push(format!("O({})", fmt_power("a", t)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
        }
    }
}

impl Ring for LCNumber {
    fn zero_like(&self) -> Self {
        LCNumber::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        LCNumber::one(&self.field)
    }
    fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("number field mismatch")
    }
    fn minus(&self, other: &Self) -> Self {
        self.try_add(&other.negated()).expect("number field mismatch")
    }
    fn times(&self, other: &Self) -> Self {
        self.try_mul(other).expect("number field mismatch")
    }
    fn negated(&self) -> Self {
        LCNumber {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.negated())).collect(),
            trunc: self.trunc.clone(),
        }
    }
    fn try_is_zero(&self) -> Result<bool> {
        match (&self.terms.is_empty(), &self.trunc) {
            (false, _) => Ok(false),
            (true, None) => Ok(true),
            (true, Some(t)) => Err(Error::UndecidableAtTruncation { order: fmt_rational(t) }),
        }
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        LCNumber::from_rational(&self.field, q.clone())
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        self.exact_div(d)
    }
    fn scale_rational(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return LCNumber { field: self.field.clone(), terms: Vec::new(), trunc: self.trunc.clone() };
        }
        LCNumber {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.scale_rational(q))).collect(),
            trunc: self.trunc.clone(),
        }
    }
}

impl Field for LCNumber {
    fn inv(&self) -> Result<Self> {
        self.inv_to(&default_truncation())
    }
}

/// Element of `S = F_K[b, 1/b]`: a finite map from `b`-power to coefficient.
#[derive(Clone, PartialEq)]
pub struct SElem {
    field: Arc<NumberField>,
    components: BTreeMap<i64, LCNumber>,
}

impl SElem {
    pub fn zero(field: &Arc<NumberField>) -> Self {
        SElem { field: field.clone(), components: BTreeMap::new() }
    }

    /// `x b^k`.
    pub fn homogeneous(x: LCNumber, k: i64) -> Self {
        let field = x.field().clone();
        let mut components = BTreeMap::new();
        if !matches!(x.try_is_zero(), Ok(true)) {
            components.insert(k, x);
        }
        SElem { field, components }
    }

    pub fn b_power(field: &Arc<NumberField>, k: i64) -> Self {
        SElem::homogeneous(LCNumber::one(field), k)
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn components(&self) -> &BTreeMap<i64, LCNumber> {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// The unique `b`-power of a homogeneous non-zero element.
    pub fn degree(&self) -> Result<Option<i64>> {
        match self.components.len() {
            0 => Ok(None),
            1 => Ok(self.components.keys().next().copied()),
            _ => Err(Error::DegreeMismatch {
                expected: "a homogeneous element".into(),
                found: format!("b-powers {:?}", self.components.keys().collect::<Vec<_>>()),
            }),
        }
    }

    /// Coefficient of `b^k`, checking that nothing else is present.
    pub fn coefficient_in_degree(&self, k: i64) -> Result<LCNumber> {
        match self.degree()? {
            None => Ok(LCNumber::zero(&self.field)),
            Some(d) if d == k => Ok(self.components[&k].clone()),
            Some(d) => Err(Error::DegreeMismatch { expected: k.to_string(), found: d.to_string() }),
        }
    }

    /// `log2 |x|` of a homogeneous element (`|b| = 1`).
    pub fn abs(&self) -> Result<AbsLog> {
        match self.degree()? {
            None => Ok(AbsLog::Zero),
            Some(d) => self.components[&d].lc_abs(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        let mut out = self.components.clone();
        for (k, v) in &other.components {
            let s = match out.get(k) {
                Some(x) => x.try_add(v)?,
                None => v.clone(),
            };
            if matches!(s.try_is_zero(), Ok(true)) {
                out.remove(k);
            } else {
                out.insert(*k, s);
            }
        }
        Ok(SElem { field: self.field.clone(), components: out })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        let mut out = SElem::zero(&self.field);
        for (k1, v1) in &self.components {
            for (k2, v2) in &other.components {
                out = out.try_add(&SElem::homogeneous(v1.try_mul(v2)?, k1 + k2))?;
            }
        }
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        SElem {
            field: self.field.clone(),
            components: self.components.iter().map(|(k, v)| (*k, v.negated())).collect(),
        }
    }
}

impl Ring for SElem {
    fn zero_like(&self) -> Self {
        SElem::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        SElem::b_power(&self.field, 0)
    }
    fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("number field mismatch")
    }
    fn minus(&self, other: &Self) -> Self {
        self.try_add(&other.negated()).expect("number field mismatch")
    }
    fn times(&self, other: &Self) -> Self {
        self.try_mul(other).expect("number field mismatch")
    }
    fn negated(&self) -> Self {
        SElem::negated(self)
    }
    fn try_is_zero(&self) -> Result<bool> {
        for v in self.components.values() {
            if !v.try_is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        SElem::homogeneous(LCNumber::from_rational(&self.field, q.clone()), 0)
    }
}

impl fmt::Debug for SElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(k, v)| {
                let vs = v.to_string();
                let bs = fmt_power("b", &rint(*k));
                match (*k, vs.as_str()) {
                    (0, _) => vs,
                    (_, "1") => bs,
                    _ if v.terms.len() > 1 || v.trunc.is_some() => format!("({vs})*{bs}"),
                    _ => format!("{vs}*{bs}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q() -> Arc<NumberField> {
        NumberField::rationals()
    }

    fn lc(field: &Arc<NumberField>, terms: &[(i64, i64, i64)]) -> LCNumber {
        LCNumber::from_terms(
            field,
            terms.iter().map(|&(n, d, c)| (rat(n, d), NFElem::from_int(field, c))).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn absolute_values() {
        let k = q();
        assert_eq!(lc(&k, &[(3, 1, 1)]).lc_abs().unwrap(), AbsLog::Exact(rint(-3)));
        assert_eq!(LCNumber::zero(&k).lc_abs().unwrap(), AbsLog::Zero);
        assert_eq!(lc(&k, &[(0, 1, 5), (1, 1, 1)]).lc_abs().unwrap(), AbsLog::Exact(rint(0)));
        let hidden = LCNumber::zero(&k).truncate(&rint(0));
        assert!(matches!(hidden.lc_abs(), Err(Error::UndecidableAtTruncation { .. })));
    }

    #[test]
    fn arithmetic_examples() {
        let k = q();
        let p = lc(&k, &[(0, 1, 1), (1, 1, 1)]).times(&lc(&k, &[(0, 1, 1), (1, 1, -1)]));
        assert_eq!(p, lc(&k, &[(0, 1, 1), (2, 1, -1)]));
        let inv = lc(&k, &[(0, 1, 1), (1, 1, -1)]).inv_to(&rint(3)).unwrap();
        assert_eq!(inv, lc(&k, &[(0, 1, 1), (1, 1, 1), (2, 1, 1)]).truncate(&rint(3)));
        let m = lc(&k, &[(1, 2, 1)]).times(&lc(&k, &[(1, 3, 1)]));
        assert_eq!(m, lc(&k, &[(5, 6, 1)]));
    }

    #[test]
    fn truncated_product_order() {
        let k = q();
        let x = lc(&k, &[(1, 1, 1)]).truncate(&rint(4));
        let y = lc(&k, &[(2, 1, 1)]).truncate(&rint(3));
        // min(1 + 3, 2 + 4) = 4
        assert_eq!(x.times(&y).trunc(), Some(&rint(4)));
    }

    #[test]
    fn exact_division_recovers_factor() {
        let k = q();
        let x = lc(&k, &[(0, 1, 1), (1, 1, 1)]);
        let y = lc(&k, &[(0, 1, 2), (1, 2, -3), (3, 1, 1)]);
        assert_eq!(x.times(&y).exact_div(&x), Some(y.clone()));
        assert_eq!(y.exact_div(&x), None);
    }

    #[test]
    fn family_sums() {
        let k = q();
        let groups: Vec<FamilyGroup> =
            (0..=20).map(|n| FamilyGroup { weight: n, members: vec![LCNumber::a_pow(&k, rint(n as i64))] }).collect();
        let s = lc_sum_family(&k, &groups, |n| rint(n as i64), false, None).unwrap();
        let expect = lc(&k, &[(0, 1, 1), (1, 1, -1)]).inv_to(&rint(21)).unwrap();
        assert_eq!(s, expect);
        let halves: Vec<FamilyGroup> = (0..=20)
            .map(|n| FamilyGroup { weight: n, members: vec![LCNumber::from_rational(&k, rat(1, 1 << n))] })
            .collect();
        assert!(matches!(
            lc_sum_family(&k, &halves, |_| rint(0), false, None),
            Err(Error::DivergenceCertificate(_))
        ));
        assert!(matches!(
            lc_sum_family(&k, &halves, |n| rint(n as i64), false, None),
            Err(Error::DivergenceCertificate(_))
        ));
        assert_eq!(lc_sum_family(&k, &[], |n| rint(n as i64), true, None).unwrap(), LCNumber::zero(&k));
    }
}

//! Graded monomial algebras over a curve cone (Novikov variables `Q^beta`,
//! the blow-up variable `q`, formal parameters `T_k`) and evaluation maps
//! into `S = F_K[b, 1/b]`.
//!
//! An evaluation map is stored through the `F_K`-parts of its generator
//! images: degree-zero homogeneity forces the `b`-power of `ev(x)` to be
//! `deg(x)`, so only the coefficient needs to be recorded.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::levi_civita::{default_truncation, lc_sum_family, FamilyGroup, LCNumber, SElem};
use crate::matrix::Matrix;
use crate::number_field::{same_field, NFElem, NumberField};
use crate::poly::Poly;
use crate::scalar::{fmt_rational, rint, simplest_between, Rational, Ring};

/// Generators of the effective curve monoid with their numerical data.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveCone {
    labels: Vec<String>,
    c1_pairing: Vec<i64>,
    omega: Vec<Rational>,
    /// `divisor_pairing[g][i]`: integral of basis class `i` over generator
    /// `g` (only meaningful for degree-2 classes; may be empty).
    divisor_pairing: Vec<Vec<Rational>>,
}

impl CurveCone {
    pub fn new(labels: Vec<String>, c1_pairing: Vec<i64>, omega: Vec<Rational>) -> Result<Self> {
        if labels.len() != c1_pairing.len() || labels.len() != omega.len() {
            return Err(Error::Shape("curve cone data of unequal lengths".into()));
        }
        if let Some(i) = omega.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidFrame(format!("symplectic area of `{}` must be positive", labels[i])));
        }
        Ok(CurveCone { labels, c1_pairing, omega, divisor_pairing: Vec::new() })
    }

    pub fn empty() -> Self {
        CurveCone { labels: Vec::new(), c1_pairing: Vec::new(), omega: Vec::new(), divisor_pairing: Vec::new() }
    }

    pub fn with_divisor_pairing(mut self, pairing: Vec<Vec<Rational>>) -> Result<Self> {
        if pairing.len() != self.labels.len() {
            return Err(Error::Shape("divisor pairing needs one row per curve generator".into()));
        }
        self.divisor_pairing = pairing;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn c1_pairing(&self) -> &[i64] {
        &self.c1_pairing
    }

    pub fn omega(&self) -> &[Rational] {
        &self.omega
    }

    pub fn divisor_pairing(&self) -> &[Vec<Rational>] {
        &self.divisor_pairing
    }

    /// Integral of basis class `class` over the curve `curve`.
    pub fn integrate_divisor(&self, curve: &[u32], class: usize) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (g, n) in curve.iter().enumerate() {
            if *n == 0 {
                continue;
            }
            let row = self
                .divisor_pairing
                .get(g)
                .ok_or_else(|| Error::InvalidFrame("curve pairing with divisors is not declared".into()))?;
            let v = row.get(class).cloned().unwrap_or_else(Rational::zero);
            acc += v * rint(*n as i64);
        }
        Ok(acc)
    }

    /// `int_beta c_1`.
    pub fn c1_of(&self, curve: &[u32]) -> i64 {
        curve.iter().zip(&self.c1_pairing).map(|(n, c)| *n as i64 * c).sum()
    }

    /// `int_beta omega`.
    pub fn omega_of(&self, curve: &[u32]) -> Rational {
        curve.iter().zip(&self.omega).fold(Rational::zero(), |acc, (n, w)| acc + w * rint(*n as i64))
    }

    /// All curve classes of symplectic area at most `max_area`, zero first.
    pub fn enumerate(&self, max_area: &Rational) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.len()];
        self.enumerate_from(0, &Rational::zero(), max_area, &mut cur, &mut out);
        out.sort_by(|a, b| self.omega_of(a).cmp(&self.omega_of(b)).then_with(|| a.cmp(b)));
        out
    }

    fn enumerate_from(&self, g: usize, used: &Rational, max: &Rational, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if g == self.len() {
            out.push(cur.clone());
            return;
        }
        let mut n = 0u32;
        let mut area = used.clone();
        while &area <= max {
            cur[g] = n;
            self.enumerate_from(g + 1, &area, max, cur, out);
            n += 1;
            area += &self.omega[g];
        }
        cur[g] = 0;
    }
}

/// `s` for a blow-up along a centre of codimension `r`.
pub fn blowup_denominator(codim: u32) -> u32 {
    if codim % 2 == 1 {
        2 * (codim - 1)
    } else {
        codim - 1
    }
}

/// The exceptional variable `q` of a blow-up ring, of degree `2(r-1)`, with
/// exponents in `(1/s) Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QVariable {
    codim: u32,
}

impl QVariable {
    pub fn new(codim: u32) -> Result<Self> {
        if codim < 2 {
            return Err(Error::InvalidFrame(format!("blow-up centre codimension {codim} is below 2")));
        }
        Ok(QVariable { codim })
    }

    pub fn codim(&self) -> u32 {
        self.codim
    }

    pub fn denominator(&self) -> u32 {
        blowup_denominator(self.codim)
    }

    pub fn degree(&self) -> i64 {
        2 * (self.codim as i64 - 1)
    }

    /// Degree of `q^{1/s}`.
    pub fn unit_degree(&self) -> i64 {
        self.degree() / self.denominator() as i64
    }
}

/// Variables and degrees of a graded monomial algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct RingSignature {
    cone: CurveCone,
    /// `deg T_k = 2 - deg alpha_k`.
    t_degrees: Vec<i64>,
    q: Option<QVariable>,
}

impl RingSignature {
    pub fn new(cone: CurveCone, t_degrees: Vec<i64>, q: Option<QVariable>) -> Arc<Self> {
        Arc::new(RingSignature { cone, t_degrees, q })
    }

    pub fn cone(&self) -> &CurveCone {
        &self.cone
    }

    pub fn t_degrees(&self) -> &[i64] {
        &self.t_degrees
    }

    pub fn q(&self) -> Option<&QVariable> {
        self.q.as_ref()
    }

    pub fn degree(&self, m: &Monomial) -> i64 {
        let curve = 2 * self.cone.c1_of(&m.curve);
        let q = self.q.map_or(0, |q| m.q * q.unit_degree());
        let t: i64 = m.t.iter().zip(&self.t_degrees).map(|(n, d)| *n as i64 * d).sum();
        curve + q + t
    }

    /// Filtration weight: symplectic area of the curve part.
    pub fn weight(&self, m: &Monomial) -> Rational {
        self.cone.omega_of(&m.curve)
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.curve.len() != self.cone.len() || m.t.len() != self.t_degrees.len() {
            return Err(Error::Shape("monomial does not match the ring signature".into()));
        }
        if m.q != 0 && self.q.is_none() {
            return Err(Error::Shape("ring has no blow-up variable".into()));
        }
        Ok(())
    }
}

/// `Q^curve * q^{q/s} * prod T_k^{t_k}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub curve: Vec<u32>,
    pub q: i64,
    pub t: Vec<u32>,
}

impl Monomial {
    pub fn one(sig: &RingSignature) -> Self {
        Monomial { curve: vec![0; sig.cone.len()], q: 0, t: vec![0; sig.t_degrees.len()] }
    }

    pub fn is_one(&self) -> bool {
        self.q == 0 && self.curve.iter().all(|n| *n == 0) && self.t.iter().all(|n| *n == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial {
            curve: self.curve.iter().zip(&other.curve).map(|(a, b)| a + b).collect(),
            q: self.q + other.q,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        let curve: Option<Vec<u32>> = self.curve.iter().zip(&other.curve).map(|(a, b)| a.checked_sub(*b)).collect();
        let t: Option<Vec<u32>> = self.t.iter().zip(&other.t).map(|(a, b)| a.checked_sub(*b)).collect();
        Some(Monomial { curve: curve?, q: self.q - other.q, t: t? })
    }

    /// Number of Novikov and formal-parameter factors.
    pub fn count(&self) -> u64 {
        self.curve.iter().chain(&self.t).map(|n| *n as u64).sum()
    }
}

/// Element of a graded monomial algebra: finitely many terms, plus an
/// optional weight truncation (terms of weight at or above it are unknown).
#[derive(Clone)]
pub struct GradedSeries {
    sig: Arc<RingSignature>,
    field: Arc<NumberField>,
    terms: BTreeMap<Monomial, NFElem>,
    trunc: Option<Rational>,
}

impl GradedSeries {
    pub fn zero(sig: &Arc<RingSignature>, field: &Arc<NumberField>) -> Self {
        GradedSeries { sig: sig.clone(), field: field.clone(), terms: BTreeMap::new(), trunc: None }
    }

    pub fn constant(sig: &Arc<RingSignature>, c: NFElem) -> Self {
        GradedSeries::term(sig, Monomial::one(sig), c).expect("unit monomial fits every signature")
    }

    pub fn from_rational(sig: &Arc<RingSignature>, field: &Arc<NumberField>, q: Rational) -> Self {
        GradedSeries::constant(sig, NFElem::from_rational(field, q))
    }

    /// `c * m`.
    pub fn term(sig: &Arc<RingSignature>, m: Monomial, c: NFElem) -> Result<Self> {
        sig.check_monomial(&m)?;
        let field = c.field().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Ok(GradedSeries { sig: sig.clone(), field, terms, trunc: None })
    }

    /// `Q^{beta_g}`.
    pub fn curve_generator(sig: &Arc<RingSignature>, field: &Arc<NumberField>, g: usize) -> Self {
        let mut m = Monomial::one(sig);
        m.curve[g] = 1;
        GradedSeries::term(sig, m, NFElem::one(field)).expect("valid generator")
    }

    /// `T_k`.
    pub fn t_variable(sig: &Arc<RingSignature>, field: &Arc<NumberField>, k: usize) -> Self {
        let mut m = Monomial::one(sig);
        m.t[k] = 1;
        GradedSeries::term(sig, m, NFElem::one(field)).expect("valid generator")
    }

    /// `q^{units/s}`.
    pub fn q_power(sig: &Arc<RingSignature>, field: &Arc<NumberField>, units: i64) -> Result<Self> {
        let mut m = Monomial::one(sig);
        m.q = units;
        GradedSeries::term(sig, m, NFElem::one(field))
    }

    pub fn from_terms(
        sig: &Arc<RingSignature>,
        field: &Arc<NumberField>,
        terms: Vec<(Monomial, NFElem)>,
        trunc: Option<Rational>,
    ) -> Result<Self> {
        let mut out = GradedSeries::zero(sig, field);
        for (m, c) in terms {
            out = out.try_add(&GradedSeries::term(sig, m, c.coerce_into(field)?)?)?;
        }
        if let Some(t) = trunc {
            out = out.truncate(&t);
        }
        Ok(out)
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.sig
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, NFElem> {
        &self.terms
    }

    pub fn trunc(&self) -> Option<&Rational> {
        self.trunc.as_ref()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.trunc.is_none()
    }

    /// Drops terms of weight at or above `w`.
    pub fn truncate(&self, w: &Rational) -> Self {
        let t = match &self.trunc {
            Some(t) if t < w => t.clone(),
            _ => w.clone(),
        };
        let terms = self.terms.iter().filter(|(m, _)| self.sig.weight(m) < t).map(|(m, c)| (m.clone(), c.clone())).collect();
        GradedSeries { sig: self.sig.clone(), field: self.field.clone(), terms, trunc: Some(t) }
    }

    /// Coefficient of the unit monomial.
    pub fn constant_term(&self) -> NFElem {
        self.terms.get(&Monomial::one(&self.sig)).cloned().unwrap_or_else(|| NFElem::zero(&self.field))
    }

    /// Degree of a homogeneous element (`None` for zero).
    pub fn homogeneous_degree(&self) -> Result<Option<i64>> {
        let mut degs = self.terms.keys().map(|m| self.sig.degree(m));
        let Some(d) = degs.next() else { return Ok(None) };
        for e in degs {
            if e != d {
                return Err(Error::DegreeMismatch { expected: d.to_string(), found: e.to_string() });
            }
        }
        Ok(Some(d))
    }

    /// Smallest and largest degree among stored terms.
    pub fn degree_band(&self) -> Option<(i64, i64)> {
        let degs: Vec<i64> = self.terms.keys().map(|m| self.sig.degree(m)).collect();
        Some((*degs.iter().min()?, *degs.iter().max()?))
    }

    fn low_weight(&self) -> Option<Rational> {
        let w = self.terms.keys().map(|m| self.sig.weight(m)).min();
        match (w, &self.trunc) {
            (Some(w), _) => Some(w),
            (None, t) => t.clone(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.sig, &other.sig) && self.sig != other.sig {
            return Err(Error::Shape("series over different ring signatures".into()));
        }
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let v = match terms.get(m) {
                Some(x) => x.plus(c),
                None => c.clone(),
            };
            if v.is_zero() {
                terms.remove(m);
            } else {
                terms.insert(m.clone(), v);
            }
        }
        let out = GradedSeries { sig: self.sig.clone(), field: self.field.clone(), terms, trunc: None };
        Ok(match min_opt(self.trunc.as_ref(), other.trunc.as_ref()) {
            Some(t) => out.truncate(&t),
            None => out,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(GradedSeries::zero(&self.sig, &self.field));
        }
        let trunc = match (&self.trunc, &other.trunc) {
            (None, None) => None,
            _ => {
                let a = other.trunc.as_ref().map(|t| self.low_weight().expect("non-zero") + t);
                let b = self.trunc.as_ref().map(|t| other.low_weight().expect("non-zero") + t);
                min_opt(a.as_ref(), b.as_ref())
            }
        };
        let mut terms: BTreeMap<Monomial, NFElem> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let p = c1.times(c2);
                match terms.get_mut(&m) {
                    Some(v) => *v = v.plus(&p),
                    None => {
                        terms.insert(m, p);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let out = GradedSeries { sig: self.sig.clone(), field: self.field.clone(), terms, trunc: None };
        Ok(match trunc {
            Some(t) => out.truncate(&t),
            None => out,
        })
    }

    pub fn scale(&self, c: &NFElem) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            for (m, x) in &self.terms {
                terms.insert(m.clone(), x.times(c));
            }
        }
        GradedSeries { sig: self.sig.clone(), field: self.field.clone(), terms, trunc: self.trunc.clone() }
    }

    /// Replaces every variable through `subst` (a ring morphism determined
    /// on monomials).
    pub fn map_monomials(&self, subst: impl Fn(&Monomial, &NFElem) -> Result<GradedSeries>) -> Result<Self> {
        let mut acc = GradedSeries::zero(&self.sig, &self.field);
        for (m, c) in &self.terms {
            acc = acc.try_add(&subst(m, c)?)?;
        }
        if let Some(t) = &self.trunc {
            acc = acc.truncate(t);
        }
        Ok(acc)
    }

    fn render_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        let single = self.sig.cone.len() == 1;
        for (g, n) in m.curve.iter().enumerate() {
            if *n == 0 {
                continue;
            }
            let base = if single { "Q".to_string() } else { format!("Q[{}]", self.sig.cone.labels[g]) };
            parts.push(if *n == 1 { base } else { format!("{base}^{n}") });
        }
        if m.q != 0 {
            let s = self.sig.q.map_or(1, |q| q.denominator() as i64);
            let e = Rational::new(m.q.into(), s.into());
            parts.push(if e.is_one() { "q".into() } else { format!("q^({})", fmt_rational(&e)) });
        }
        for (k, n) in m.t.iter().enumerate() {
            if *n > 0 {
                parts.push(if *n == 1 { format!("T{k}") } else { format!("T{k}^{n}") });
            }
        }
        parts.join("*")
    }
}

fn min_opt(a: Option<&Rational>, b: Option<&Rational>) -> Option<Rational> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => Some(x.min(y).clone()),
    }
}

impl PartialEq for GradedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.trunc == other.trunc && same_field(&self.field, &other.field)
    }
}

impl fmt::Debug for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let cs = c.to_string();
            let compound = cs.contains(" + ") || cs.contains(" - ");
            if m.is_one() {
                parts.push(if compound { format!("({cs})") } else { cs });
                continue;
            }
            let ms = self.render_monomial(m);
            parts.push(match cs.as_str() {
                "1" => ms,
                "-1" => format!("-{ms}"),
                _ if compound => format!("({cs})*{ms}"),
                _ => format!("{cs}*{ms}"),
            });
        }
        if let Some(t) = &self.trunc {
            parts.push(format!("O(weight {})", fmt_rational(t)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
        }
    }
}

impl Ring for GradedSeries {
    fn zero_like(&self) -> Self {
        GradedSeries::zero(&self.sig, &self.field)
    }
    fn one_like(&self) -> Self {
        GradedSeries::constant(&self.sig, NFElem::one(&self.field))
    }
    fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("incompatible series")
    }
    fn minus(&self, other: &Self) -> Self {
        self.try_add(&other.negated()).expect("incompatible series")
    }
    fn times(&self, other: &Self) -> Self {
        self.try_mul(other).expect("incompatible series")
    }
    fn negated(&self) -> Self {
        self.scale(&NFElem::from_int(&self.field, -1))
    }
    fn try_is_zero(&self) -> Result<bool> {
        match (self.terms.is_empty(), &self.trunc) {
            (false, _) => Ok(false),
            (true, None) => Ok(true),
            (true, Some(t)) => Err(Error::UndecidableAtTruncation { order: fmt_rational(t) }),
        }
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        GradedSeries::from_rational(&self.sig, &self.field, q.clone())
    }
    /// Exact division by a single term.
    fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.terms.len() != 1 || d.trunc.is_some() {
            return None;
        }
        let (dm, dc) = d.terms.iter().next()?;
        let inv = dc.try_inv().ok()?;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.div(dm)?, c.times(&inv));
        }
        let trunc = self.trunc.as_ref().map(|t| t - self.sig.weight(dm));
        Some(GradedSeries { sig: self.sig.clone(), field: self.field.clone(), terms, trunc })
    }
}

/// Ring morphism from graded series into a coefficient ring, determined on
/// monomials.
pub trait Evaluator {
    type Target: Ring;
    fn zero(&self) -> Self::Target;
    fn scalar(&self, c: &NFElem) -> Result<Self::Target>;
    fn monomial(&self, m: &Monomial) -> Result<Self::Target>;

    /// Image of a finite series; truncated series need a convergence-aware
    /// evaluator.
    fn series(&self, x: &GradedSeries) -> Result<Self::Target> {
        if let Some(t) = x.trunc() {
            return Err(Error::PrecisionExhausted(format!("series truncated at weight {}", fmt_rational(t))));
        }
        let mut acc = self.zero();
        for (m, c) in x.terms() {
            acc = acc.plus(&self.scalar(c)?.times(&self.monomial(m)?));
        }
        Ok(acc)
    }
}

/// Entrywise image of a matrix of series.
pub fn evaluate_matrix<E: Evaluator>(ev: &E, m: &Matrix<GradedSeries>) -> Result<Matrix<E::Target>> {
    let zero = ev.zero();
    m.try_map(&zero, |x| ev.series(x))
}

/// Named generator of a ring signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Q,
    Curve(usize),
    T(usize),
}

/// Evaluation map with values in `S_K`, stored as `F_K`-parts.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationMap {
    sig: Arc<RingSignature>,
    field: Arc<NumberField>,
    /// `F`-part of `ev(q^{1/s})`.
    q_unit: Option<LCNumber>,
    curves: Vec<LCNumber>,
    t_vars: Vec<LCNumber>,
}

/// Result of [`EvaluationMap::check_normalizable`].
#[derive(Clone, Debug)]
pub struct Normalization {
    pub lambda: LCNumber,
    /// Valuation of `lambda`.
    pub scale_exponent: Rational,
    /// The threshold base `epsilon` (always 1/2 here).
    pub epsilon: Rational,
    pub normalized: EvaluationMap,
}

impl EvaluationMap {
    /// Builds from `F`-parts.
    pub fn new(
        sig: &Arc<RingSignature>,
        field: &Arc<NumberField>,
        q_unit: Option<LCNumber>,
        curves: Vec<LCNumber>,
        t_vars: Vec<LCNumber>,
    ) -> Result<Self> {
        if curves.len() != sig.cone.len() || t_vars.len() != sig.t_degrees.len() {
            return Err(Error::Shape("evaluation map does not match the ring signature".into()));
        }
        if q_unit.is_some() != sig.q.is_some() {
            return Err(Error::Shape("blow-up variable assignment does not match the ring".into()));
        }
        let coerce = |x: LCNumber| x.coerce_into(field);
        Ok(EvaluationMap {
            sig: sig.clone(),
            field: field.clone(),
            q_unit: q_unit.map(coerce).transpose()?,
            curves: curves.into_iter().map(coerce).collect::<Result<_>>()?,
            t_vars: t_vars.into_iter().map(coerce).collect::<Result<_>>()?,
        })
    }

    /// Builds from full `S_K` values, checking degree-zero homogeneity.
    pub fn from_selems(
        sig: &Arc<RingSignature>,
        field: &Arc<NumberField>,
        q_unit: Option<SElem>,
        curves: Vec<SElem>,
        t_vars: Vec<SElem>,
    ) -> Result<Self> {
        let part = |x: &SElem, d: i64| x.coefficient_in_degree(d);
        let q = match (q_unit, sig.q) {
            (Some(x), Some(q)) => Some(part(&x, q.unit_degree())?),
            (None, None) => None,
            _ => return Err(Error::Shape("blow-up variable assignment does not match the ring".into())),
        };
        if curves.len() != sig.cone.len() || t_vars.len() != sig.t_degrees.len() {
            return Err(Error::Shape("evaluation map does not match the ring signature".into()));
        }
        let c = curves.iter().enumerate().map(|(g, x)| part(x, 2 * sig.cone.c1_pairing[g])).collect::<Result<_>>()?;
        let t = t_vars.iter().zip(&sig.t_degrees).map(|(x, d)| part(x, *d)).collect::<Result<_>>()?;
        EvaluationMap::new(sig, field, q, c, t)
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.sig
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn generator_degree(&self, g: Generator) -> i64 {
        match g {
            Generator::Q => self.sig.q.map_or(0, |q| q.unit_degree()),
            Generator::Curve(i) => 2 * self.sig.cone.c1_pairing[i],
            Generator::T(k) => self.sig.t_degrees[k],
        }
    }

    /// `F`-part of the image of a generator.
    pub fn f_part(&self, g: Generator) -> Option<&LCNumber> {
        match g {
            Generator::Q => self.q_unit.as_ref(),
            Generator::Curve(i) => self.curves.get(i),
            Generator::T(k) => self.t_vars.get(k),
        }
    }

    /// Full image `ev(g)` in `S_K`.
    pub fn value(&self, g: Generator) -> Option<SElem> {
        self.f_part(g).map(|x| SElem::homogeneous(x.clone(), self.generator_degree(g)))
    }

    pub fn generator_label(&self, g: Generator) -> String {
        match g {
            Generator::Q => "q".into(),
            Generator::Curve(i) => format!("Q[{}]", self.sig.cone.labels[i]),
            Generator::T(k) => format!("T{k}"),
        }
    }

    fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        if self.q_unit.is_some() {
            out.push(Generator::Q);
        }
        out.extend((0..self.curves.len()).map(Generator::Curve));
        out.extend((0..self.t_vars.len()).map(Generator::T));
        out
    }

    /// True when every Novikov generator is sent to zero.
    pub fn vanishes_on_q(&self) -> bool {
        !self.curves.is_empty() && self.curves.iter().all(|x| matches!(x.try_is_zero(), Ok(true)))
    }

    /// `(lambda ev)(x) = lambda^{deg x} ev(x)`.
    pub fn rescale(&self, lambda: &LCNumber) -> Result<Self> {
        let mut out = self.clone();
        for g in self.generators() {
            let d = self.generator_degree(g);
            let factor = lambda.powi(d)?;
            let slot = match g {
                Generator::Q => out.q_unit.as_mut().expect("present"),
                Generator::Curve(i) => &mut out.curves[i],
                Generator::T(k) => &mut out.t_vars[k],
            };
            *slot = slot.try_mul(&factor)?;
        }
        Ok(out)
    }

    /// `ev + f_0 1_X`: adds `f_0` to the image of `T_0`.
    pub fn shift_by_unit(&self, f0: &SElem) -> Result<Self> {
        if self.sig.t_degrees.first() != Some(&2) {
            return Err(Error::DegreeMismatch {
                expected: "T0 of degree 2 paired with the unit class".into(),
                found: format!("{:?}", self.sig.t_degrees.first()),
            });
        }
        let part = f0.coefficient_in_degree(2)?;
        let mut out = self.clone();
        out.t_vars[0] = out.t_vars[0].try_add(&part.coerce_into(&self.field)?)?;
        Ok(out)
    }

    /// Finds `lambda` with `lambda ev` normalized for `epsilon = 1/2`:
    /// `val > int_beta omega` on Novikov generators, `val > 0` on formal
    /// parameters, and `ev(q) = b^{deg q}` exactly when a blow-up variable
    /// is present.
    pub fn check_normalizable(&self) -> Result<Normalization> {
        let mut lower: Option<(Rational, String)> = None;
        let mut upper: Option<(Rational, String)> = None;
        let mut constraints: Vec<(String, i64, Rational, Rational)> = Vec::new();
        for g in self.generators() {
            if g == Generator::Q {
                continue;
            }
            let x = self.f_part(g).expect("listed generator");
            let Some(v) = x.valuation_lower_bound() else { continue };
            let threshold = match g {
                Generator::Curve(i) => self.sig.cone.omega[i].clone(),
                _ => Rational::zero(),
            };
            let label = self.generator_label(g);
            let d = self.generator_degree(g);
            constraints.push((label.clone(), d, v.clone(), threshold.clone()));
            match d.signum() {
                0 => {
                    if v <= threshold {
                        return Err(Error::NotNormalizable { lower: label.clone(), upper: label });
                    }
                }
                1 => {
                    let b = (&threshold - &v) / rint(d);
                    if lower.as_ref().is_none_or(|(l, _)| &b > l) {
                        lower = Some((b, label));
                    }
                }
                _ => {
                    let b = (&threshold - &v) / rint(d);
                    if upper.as_ref().is_none_or(|(u, _)| &b < u) {
                        upper = Some((b, label));
                    }
                }
            }
        }
        let (mu, unit) = if let Some(qx) = &self.q_unit {
            let d = self.generator_degree(Generator::Q);
            if !qx.is_monomial() || d == 0 {
                return Err(Error::NotNormalizable { lower: "q".into(), upper: "q".into() });
            }
            let (v, c) = qx.leading()?.expect("monomial");
            let mu = -v / rint(d);
            let unit = c.try_inv()?.nth_root(d.unsigned_abs() as u32).ok_or_else(|| Error::NotNormalizable {
                lower: "q".into(),
                upper: format!("no root of degree {d} in the coefficient field"),
            })?;
            for (label, dg, v, thr) in &constraints {
                if &(&mu * rint(*dg) + v) <= thr {
                    return Err(Error::NotNormalizable { lower: label.clone(), upper: "q".into() });
                }
            }
            (mu, unit)
        } else {
            let lo = lower.as_ref().map(|(l, _)| l);
            let hi = upper.as_ref().map(|(u, _)| u);
            let mu = simplest_between(lo, hi).ok_or_else(|| Error::NotNormalizable {
                lower: lower.as_ref().map(|(_, s)| s.clone()).unwrap_or_default(),
                upper: upper.as_ref().map(|(_, s)| s.clone()).unwrap_or_default(),
            })?;
            (mu, NFElem::one(&self.field))
        };
        let lambda = LCNumber::monomial(unit, mu.clone());
        let normalized = self.rescale(&lambda)?;
        Ok(Normalization { lambda, scale_exponent: mu, epsilon: Rational::new(1.into(), 2.into()), normalized })
    }

    /// `F`-part of the image of a monomial.
    pub fn monomial_value(&self, m: &Monomial) -> Result<LCNumber> {
        let mut acc = LCNumber::one(&self.field);
        for (g, n) in m.curve.iter().enumerate() {
            if *n > 0 {
                acc = acc.try_mul(&self.curves[g].pow_u(*n as u64))?;
            }
        }
        for (k, n) in m.t.iter().enumerate() {
            if *n > 0 {
                acc = acc.try_mul(&self.t_vars[k].pow_u(*n as u64))?;
            }
        }
        if m.q != 0 {
            let q = self.q_unit.as_ref().ok_or_else(|| Error::Shape("ring has no blow-up variable".into()))?;
            acc = acc.try_mul(&q.powi(m.q)?)?;
        }
        Ok(acc)
    }

    /// Sums the images of all terms of `x`, one `b`-power per degree, with
    /// the per-group valuation bound derived from the degree band of `x`.
    pub fn evaluate_series(&self, x: &GradedSeries, order: Option<&Rational>) -> Result<SElem> {
        let mut by_degree: BTreeMap<i64, BTreeMap<u64, Vec<LCNumber>>> = BTreeMap::new();
        for (m, c) in x.terms() {
            let v = self.monomial_value(m)?.try_mul(&LCNumber::constant(c.coerce_into(&self.field)?))?;
            by_degree.entry(self.sig.degree(m)).or_default().entry(m.count()).or_default().push(v);
        }
        let band = x.degree_band().map_or(0, |(lo, hi)| lo.abs().max(hi.abs()));
        let bound = self.group_bound(band)?;
        let tail = match x.trunc() {
            Some(w) => Some(self.tail_valuation(w)?),
            None => None,
        };
        let cap = min_opt(tail.as_ref(), order);
        let mut out = SElem::zero(&self.field);
        for (d, groups) in by_degree {
            let groups: Vec<FamilyGroup> =
                groups.into_iter().map(|(weight, members)| FamilyGroup { weight, members }).collect();
            let sum = lc_sum_family(&self.field, &groups, &bound, true, cap.as_ref())?;
            out = out.try_add(&SElem::homogeneous(sum, d))?;
        }
        Ok(out)
    }

    /// `w(N)`: lower bound on the valuation of any monomial with `N`
    /// Novikov/parameter factors inside the degree band `[-band, band]`.
    fn group_bound(&self, band: i64) -> Result<impl Fn(u64) -> Rational> {
        let slope = self
            .curves
            .iter()
            .chain(&self.t_vars)
            .filter_map(|x| x.valuation_lower_bound())
            .min()
            .unwrap_or_else(Rational::one);
        let (q_val, q_deg) = match (&self.q_unit, self.sig.q) {
            (Some(x), Some(q)) => (x.valuation_lower_bound().unwrap_or_else(Rational::zero).abs(), q.unit_degree()),
            _ => (Rational::zero(), 1),
        };
        let c_max = self
            .sig
            .cone
            .c1_pairing
            .iter()
            .map(|c| 2 * c.abs())
            .chain(self.sig.t_degrees.iter().map(|d| d.abs()))
            .max()
            .unwrap_or(0);
        Ok(move |n: u64| {
            let n = rint(n as i64);
            let q_range = (rint(band) + &n * rint(c_max)) / rint(q_deg.abs().max(1));
            &n * &slope - &q_val * q_range
        })
    }

    /// Valuation bound on everything of weight at least `w`.
    fn tail_valuation(&self, w: &Rational) -> Result<Rational> {
        if let Some(q) = &self.q_unit {
            if q.valuation_lower_bound().is_some_and(|v| !v.is_zero()) {
                return Err(Error::PrecisionExhausted("truncated series under an unnormalized blow-up variable".into()));
            }
        }
        let mut theta: Option<Rational> = None;
        for (g, x) in self.curves.iter().enumerate() {
            if let Some(v) = x.valuation_lower_bound() {
                let r = v / &self.sig.cone.omega[g];
                theta = Some(theta.map_or(r.clone(), |t: Rational| t.min(r)));
            }
        }
        if self.t_vars.iter().any(|x| x.valuation_lower_bound().is_some_and(|v| v.is_negative())) {
            return Err(Error::PrecisionExhausted("formal parameter image outside the unit ball".into()));
        }
        let theta = theta.unwrap_or_else(Rational::one);
        if !theta.is_positive() {
            return Err(Error::DivergenceCertificate("generator images do not lie in the open unit ball".into()));
        }
        Ok(theta * w)
    }
}

impl Evaluator for EvaluationMap {
    type Target = LCNumber;

    fn zero(&self) -> LCNumber {
        LCNumber::zero(&self.field)
    }

    fn scalar(&self, c: &NFElem) -> Result<LCNumber> {
        Ok(LCNumber::constant(c.coerce_into(&self.field)?))
    }

    fn monomial(&self, m: &Monomial) -> Result<LCNumber> {
        self.monomial_value(m)
    }

    /// Homogeneous series only; truncated input goes through the convergence
    /// bookkeeping of [`EvaluationMap::evaluate_series`].
    fn series(&self, x: &GradedSeries) -> Result<LCNumber> {
        let Some(d) = x.homogeneous_degree()? else {
            return match x.trunc() {
                None => Ok(LCNumber::zero(&self.field)),
                Some(w) => Ok(LCNumber::zero(&self.field).truncate(&self.tail_valuation(w)?)),
            };
        };
        if x.trunc().is_none() {
            let mut acc = LCNumber::zero(&self.field);
            for (m, c) in x.terms() {
                acc = acc.try_add(&self.scalar(c)?.try_mul(&self.monomial_value(m)?)?)?;
            }
            return Ok(acc);
        }
        self.evaluate_series(x, Some(&default_truncation()))?.coefficient_in_degree(d)
    }
}

/// Evaluation map depending polynomially on one parameter `t`: values in
/// `F_K[t]`.
#[derive(Clone, Debug)]
pub struct ParametricEvaluation {
    sig: Arc<RingSignature>,
    field: Arc<NumberField>,
    q_unit: Option<Poly<LCNumber>>,
    curves: Vec<Poly<LCNumber>>,
    t_vars: Vec<Poly<LCNumber>>,
}

impl ParametricEvaluation {
    pub fn new(
        sig: &Arc<RingSignature>,
        field: &Arc<NumberField>,
        q_unit: Option<Poly<LCNumber>>,
        curves: Vec<Poly<LCNumber>>,
        t_vars: Vec<Poly<LCNumber>>,
    ) -> Result<Self> {
        if curves.len() != sig.cone.len() || t_vars.len() != sig.t_degrees.len() || q_unit.is_some() != sig.q.is_some()
        {
            return Err(Error::Shape("parametric evaluation does not match the ring signature".into()));
        }
        Ok(ParametricEvaluation { sig: sig.clone(), field: field.clone(), q_unit, curves, t_vars })
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn curves(&self) -> &[Poly<LCNumber>] {
        &self.curves
    }

    /// The member of the family at `t = zeta`.
    pub fn specialize(&self, zeta: &LCNumber) -> Result<EvaluationMap> {
        let at = |p: &Poly<LCNumber>| p.eval(zeta);
        EvaluationMap::new(
            &self.sig,
            &self.field,
            self.q_unit.as_ref().map(at),
            self.curves.iter().map(at).collect(),
            self.t_vars.iter().map(at).collect(),
        )
    }
}

impl Evaluator for ParametricEvaluation {
    type Target = Poly<LCNumber>;

    fn zero(&self) -> Poly<LCNumber> {
        Poly::zero(&LCNumber::zero(&self.field))
    }

    fn scalar(&self, c: &NFElem) -> Result<Poly<LCNumber>> {
        Ok(Poly::constant(LCNumber::constant(c.coerce_into(&self.field)?)))
    }

    fn monomial(&self, m: &Monomial) -> Result<Poly<LCNumber>> {
        let mut acc = Poly::constant(LCNumber::one(&self.field));
        for (g, n) in m.curve.iter().enumerate() {
            if *n > 0 {
                acc = acc.times(&self.curves[g].pow_u(*n as u64));
            }
        }
        for (k, n) in m.t.iter().enumerate() {
            if *n > 0 {
                acc = acc.times(&self.t_vars[k].pow_u(*n as u64));
            }
        }
        if m.q != 0 {
            let q = self.q_unit.as_ref().ok_or_else(|| Error::Shape("ring has no blow-up variable".into()))?;
            let base = if m.q > 0 {
                q.clone()
            } else {
                match q.degree() {
                    Some(0) => Poly::constant(crate::scalar::Field::inv(&q.coeff(0))?),
                    _ => return Err(Error::NonPolynomialParameter(format!("negative power of {}", q.render("t")))),
                }
            };
            acc = acc.times(&base.pow_u(m.q.unsigned_abs()));
        }
        Ok(acc)
    }
}

/// The continuous morphism `g` absorbing constant parts of degree-2
/// parameters into exponential factors on the Novikov variables.
#[derive(Clone, Debug)]
pub struct VariableChange {
    sig: Arc<RingSignature>,
    /// `g(T_k)`: the image with its constant part removed.
    t_images: Vec<GradedSeries>,
    /// Per curve generator, `exp(sum_k lambda_k int_beta alpha_k)`.
    exponentials: Vec<NFElem>,
}

/// Builds `g` from `f(T_k)` and the exponential scalars per curve generator.
pub fn change_of_variables(
    sig: &Arc<RingSignature>,
    field: &Arc<NumberField>,
    images: Vec<GradedSeries>,
    exponentials: &BTreeMap<usize, NFElem>,
) -> Result<VariableChange> {
    if images.len() != sig.t_degrees.len() {
        return Err(Error::Shape("one image per formal parameter is required".into()));
    }
    let mut any_constant = false;
    let mut t_images = Vec::with_capacity(images.len());
    for (k, f) in images.into_iter().enumerate() {
        let c = f.constant_term();
        let deg_alpha = 2 - sig.t_degrees[k];
        if !c.is_zero() {
            if deg_alpha != 2 {
                return Err(Error::NonZeroConstantInWrongDegree { index: k, degree: deg_alpha });
            }
            any_constant = true;
        }
        let stripped = f.try_add(&GradedSeries::constant(sig, c.negated()))?;
        if let Some(d) = stripped.homogeneous_degree()? {
            if d != sig.t_degrees[k] {
                return Err(Error::DegreeMismatch { expected: sig.t_degrees[k].to_string(), found: d.to_string() });
            }
        }
        t_images.push(stripped);
    }
    let mut exps = Vec::with_capacity(sig.cone.len());
    for g in 0..sig.cone.len() {
        match exponentials.get(&g) {
            Some(e) => exps.push(e.coerce_into(field)?),
            None if any_constant => return Err(Error::MissingExponential(sig.cone.labels[g].clone())),
            None => exps.push(NFElem::one(field)),
        }
    }
    Ok(VariableChange { sig: sig.clone(), t_images, exponentials: exps })
}

impl VariableChange {
    pub fn apply(&self, x: &GradedSeries) -> Result<GradedSeries> {
        x.map_monomials(|m, c| {
            let mut coeff = c.clone();
            for (g, n) in m.curve.iter().enumerate() {
                coeff = coeff.times(&self.exponentials[g].pow_u(*n as u64));
            }
            let base = Monomial { curve: m.curve.clone(), q: m.q, t: vec![0; m.t.len()] };
            let mut acc = GradedSeries::term(&self.sig, base, coeff)?;
            for (k, n) in m.t.iter().enumerate() {
                if *n > 0 {
                    acc = acc.try_mul(&self.t_images[k].pow_u(*n as u64))?;
                }
            }
            Ok(acc)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn cubic_like() -> (Arc<RingSignature>, Arc<NumberField>) {
        let cone = CurveCone::new(vec!["line".into()], vec![3], vec![rint(1)]).unwrap();
        (RingSignature::new(cone, vec![2, 0, -2], None), NumberField::rationals())
    }

    #[test]
    fn cubic_map_is_already_normalized() {
        let (sig, k) = cubic_like();
        let zeta = LCNumber::a(&k);
        let ev = EvaluationMap::new(&sig, &k, None, vec![zeta.pow_u(3)], vec![LCNumber::zero(&k); 3]).unwrap();
        let n = ev.check_normalizable().unwrap();
        assert_eq!(n.scale_exponent, rint(0));
        assert_eq!(n.normalized, ev);
    }

    #[test]
    fn unit_absolute_value_is_rescaled() {
        let (sig, k) = cubic_like();
        let ev = EvaluationMap::new(&sig, &k, None, vec![LCNumber::one(&k)], vec![LCNumber::zero(&k); 3]).unwrap();
        let n = ev.check_normalizable().unwrap();
        assert!(n.scale_exponent.is_positive());
        let v = n.normalized.f_part(Generator::Curve(0)).unwrap().valuation().unwrap().unwrap();
        assert!(v > rint(1));
    }

    #[test]
    fn opposite_degrees_cannot_be_normalized() {
        let cone = CurveCone::new(vec!["up".into(), "down".into()], vec![1, -1], vec![rint(1), rint(1)]).unwrap();
        let sig = RingSignature::new(cone, vec![], None);
        let k = NumberField::rationals();
        let ev = EvaluationMap::new(&sig, &k, None, vec![LCNumber::one(&k), LCNumber::one(&k)], vec![]).unwrap();
        assert!(matches!(ev.check_normalizable(), Err(Error::NotNormalizable { .. })));
    }

    #[test]
    fn geometric_series_matches_inverse() {
        let cone = CurveCone::new(vec!["c".into()], vec![0], vec![rint(1)]).unwrap();
        let sig = RingSignature::new(cone, vec![], None);
        let k = NumberField::rationals();
        let terms: Vec<(Monomial, NFElem)> =
            (0..=20).map(|n| (Monomial { curve: vec![n], q: 0, t: vec![] }, NFElem::one(&k))).collect();
        let x = GradedSeries::from_terms(&sig, &k, terms, Some(rint(21))).unwrap();
        let ev = EvaluationMap::new(&sig, &k, None, vec![LCNumber::a(&k)], vec![]).unwrap();
        let s = ev.evaluate_series(&x, None).unwrap();
        let one_minus_a = LCNumber::one(&k).minus(&LCNumber::a(&k));
        assert_eq!(s.coefficient_in_degree(0).unwrap(), one_minus_a.inv_to(&rint(21)).unwrap());
    }

    #[test]
    fn single_monomial_and_homogeneity() {
        let (sig, k) = cubic_like();
        let ev = EvaluationMap::new(&sig, &k, None, vec![LCNumber::a_pow(&k, rint(3))], vec![LCNumber::zero(&k); 3])
            .unwrap();
        let q = GradedSeries::curve_generator(&sig, &k, 0);
        let s = ev.evaluate_series(&q, None).unwrap();
        assert_eq!(s, SElem::homogeneous(LCNumber::a_pow(&k, rint(3)), 6));
    }

    #[test]
    fn shift_round_trip() {
        let (sig, k) = cubic_like();
        let ev = EvaluationMap::new(&sig, &k, None, vec![LCNumber::a(&k)], vec![LCNumber::zero(&k); 3]).unwrap();
        let f0 = SElem::homogeneous(LCNumber::a_pow(&k, rat(1, 2)), 2);
        let back = ev.shift_by_unit(&f0).unwrap().shift_by_unit(&f0.negated()).unwrap();
        assert_eq!(back, ev);
        assert!(ev.shift_by_unit(&SElem::homogeneous(LCNumber::a(&k), 4)).is_err());
    }

    #[test]
    fn exponential_rescaling_of_novikov_variable() {
        let (sig, _) = cubic_like();
        let k = NumberField::eisenstein();
        let w = NFElem::theta(&k);
        let images: Vec<GradedSeries> = (0..3)
            .map(|i| {
                let t = GradedSeries::t_variable(&sig, &k, i);
                if i == 1 {
                    t.try_add(&GradedSeries::from_rational(&sig, &k, rint(2))).unwrap()
                } else {
                    t
                }
            })
            .collect();
        let mut exps = BTreeMap::new();
        assert!(matches!(
            change_of_variables(&sig, &k, images.clone(), &exps),
            Err(Error::MissingExponential(_))
        ));
        exps.insert(0, w.clone());
        let g = change_of_variables(&sig, &k, images, &exps).unwrap();
        let q = GradedSeries::curve_generator(&sig, &k, 0);
        assert_eq!(g.apply(&q).unwrap(), q.scale(&w));
        let t1 = GradedSeries::t_variable(&sig, &k, 1);
        assert_eq!(g.apply(&t1).unwrap(), t1);
    }

    #[test]
    fn constant_on_wrong_degree_rejected() {
        let (sig, k) = cubic_like();
        let images: Vec<GradedSeries> = (0..3)
            .map(|i| {
                let t = GradedSeries::t_variable(&sig, &k, i);
                if i == 2 {
                    t.try_add(&GradedSeries::from_rational(&sig, &k, rint(1))).unwrap()
                } else {
                    t
                }
            })
            .collect();
        assert!(matches!(
            change_of_variables(&sig, &k, images, &BTreeMap::new()),
            Err(Error::NonZeroConstantInWrongDegree { index: 2, degree: 4 })
        ));
    }

    #[test]
    fn cone_enumeration_is_bounded() {
        let cone = CurveCone::new(vec!["a".into(), "b".into()], vec![1, 1], vec![rint(1), rint(2)]).unwrap();
        let all = cone.enumerate(&rint(3));
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
    }
}

//! Number fields `Q(theta)` given by a monic minimal polynomial.

mod embedding;
mod irreducible;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::scalar::{fmt_rational, Field, Rational, Ring};

pub use irreducible::IRREDUCIBILITY_CHECK_LIMIT;

/// `K = Q[X]/(minpoly)` with a declared Q-basis used for span decompositions.
#[derive(Debug)]
pub struct NumberField {
    /// Monic minimal polynomial, coefficients from degree 0 upwards.
    minpoly: Vec<Rational>,
    /// Declared Q-basis, each element in power-basis coordinates.
    qbasis: Vec<Vec<Rational>>,
    /// Inverse of the matrix whose columns are the `qbasis` vectors.
    qbasis_inverse: Matrix<Rational>,
    generators: BTreeMap<String, Vec<Rational>>,
    var: String,
    embeddings: OnceLock<Vec<Complex64>>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly
    }
}

/// Element of a [`NumberField`] in power-basis coordinates.
#[derive(Clone)]
pub struct NFElem {
    field: Arc<NumberField>,
    coeffs: Vec<Rational>,
}

/// Builder-style description of a field.
#[derive(Clone, Debug, Default)]
pub struct FieldSpec {
    pub minpoly: Vec<Rational>,
    pub qbasis: Option<Vec<Vec<Rational>>>,
    pub generators: BTreeMap<String, Vec<Rational>>,
    pub var: Option<String>,
    /// Skip the irreducibility check (required above the check limit).
    pub attest_irreducible: bool,
}

impl NumberField {
    pub fn new(spec: FieldSpec) -> Result<Arc<Self>> {
        let mut minpoly = spec.minpoly;
        while minpoly.last().is_some_and(|c| c.is_zero()) {
            minpoly.pop();
        }
        let n = minpoly.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
            Error::InvalidField("minimal polynomial must have positive degree".into())
        })?;
        let lead = minpoly[n].clone();
        if !lead.is_one() {
            for c in &mut minpoly {
                *c = &*c / &lead;
            }
        }
        if !spec.attest_irreducible {
            if n > IRREDUCIBILITY_CHECK_LIMIT {
                return Err(Error::InvalidField(format!(
                    "degree {n} exceeds the checked range; irreducibility must be attested"
                )));
            }
            irreducible::check(&minpoly)?;
        }
        let qbasis = match spec.qbasis {
            Some(b) => b,
            None => (0..n).map(|i| unit(n, i)).collect(),
        };
        if qbasis.len() != n || qbasis.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidField(format!("Q-basis must consist of {n} vectors of length {n}")));
        }
        let zero = Rational::zero();
        let basis_matrix = Matrix::from_fn(n, n, &zero, |i, j| qbasis[j][i].clone());
        let qbasis_inverse =
            basis_matrix.inverse().map_err(|_| Error::InvalidField("declared Q-basis is not linearly independent".into()))?;
        for (name, g) in &spec.generators {
            if g.len() != n {
                return Err(Error::InvalidField(format!("generator `{name}` has {} coordinates, expected {n}", g.len())));
            }
        }
        Ok(Arc::new(NumberField {
            minpoly,
            qbasis,
            qbasis_inverse,
            generators: spec.generators,
            var: spec.var.unwrap_or_else(|| "θ".into()),
            embeddings: OnceLock::new(),
        }))
    }

    /// The field of rational numbers, presented as `Q[X]/(X)`.
    pub fn rationals() -> Arc<Self> {
        NumberField::new(FieldSpec { minpoly: vec![Rational::zero(), Rational::one()], ..Default::default() })
            .expect("Q is a field")
    }

    /// `Q(i)` with `i^2 = -1`.
    pub fn gaussian() -> Arc<Self> {
        let mut generators = BTreeMap::new();
        generators.insert("i".to_string(), vec![Rational::zero(), Rational::one()]);
        NumberField::new(FieldSpec {
            minpoly: vec![Rational::one(), Rational::zero(), Rational::one()],
            var: Some("i".into()),
            generators,
            ..Default::default()
        })
        .expect("X^2+1 is irreducible")
    }

    /// `Q(w)` with `w^2 + w + 1 = 0`, a primitive cube root of unity.
    pub fn eisenstein() -> Arc<Self> {
        let mut generators = BTreeMap::new();
        generators.insert("w".to_string(), vec![Rational::zero(), Rational::one()]);
        NumberField::new(FieldSpec {
            minpoly: vec![Rational::one(), Rational::one(), Rational::one()],
            var: Some("w".into()),
            generators,
            ..Default::default()
        })
        .expect("X^2+X+1 is irreducible")
    }

    /// `Q(z)` with `z` a primitive `p`-th root of unity, `p` an odd prime.
    pub fn cyclotomic(p: u32) -> Result<Arc<Self>> {
        if p < 3 || (2..p).any(|d| p % d == 0) {
            return Err(Error::InvalidField(format!("cyclotomic fields are offered for odd primes, got {p}")));
        }
        let mut generators = BTreeMap::new();
        let mut z = vec![Rational::zero(); p as usize - 1];
        z[1] = Rational::one();
        generators.insert("z".to_string(), z);
        NumberField::new(FieldSpec {
            minpoly: vec![Rational::one(); p as usize],
            var: Some("z".into()),
            generators,
            ..Default::default()
        })
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> &[Rational] {
        &self.minpoly
    }

    pub fn qbasis(&self) -> &[Vec<Rational>] {
        &self.qbasis
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn generator_names(&self) -> impl Iterator<Item = &str> {
        self.generators.keys().map(|s| s.as_str())
    }

    /// Complex images of the primitive element, one per embedding.
    pub fn embeddings(&self) -> &[Complex64] {
        self.embeddings.get_or_init(|| {
            let coeffs: Vec<Complex64> =
                self.minpoly.iter().map(|c| Complex64::new(c.to_f64().unwrap_or(0.0), 0.0)).collect();
            embedding::complex_roots(&coeffs)
        })
    }
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()
}

pub fn same_field(a: &Arc<NumberField>, b: &Arc<NumberField>) -> bool {
    Arc::ptr_eq(a, b) || a.minpoly == b.minpoly
}

impl NFElem {
    pub fn new(field: &Arc<NumberField>, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != field.degree() {
            return Err(Error::Shape(format!("{} coordinates for a degree {} field", coeffs.len(), field.degree())));
        }
        Ok(NFElem { field: field.clone(), coeffs })
    }

    pub fn from_rational(field: &Arc<NumberField>, q: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); field.degree()];
        coeffs[0] = q;
        NFElem { field: field.clone(), coeffs }
    }

    pub fn from_int(field: &Arc<NumberField>, n: i64) -> Self {
        NFElem::from_rational(field, Rational::from_integer(n.into()))
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        NFElem::from_rational(field, Rational::zero())
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        NFElem::from_rational(field, Rational::one())
    }

    /// The primitive element `theta`.
    pub fn theta(field: &Arc<NumberField>) -> Self {
        let n = field.degree();
        if n == 1 {
            // Q presented by X: theta = 0
            return NFElem::zero(field);
        }
        NFElem { field: field.clone(), coeffs: unit(n, 1) }
    }

    pub fn generator(field: &Arc<NumberField>, name: &str) -> Option<Self> {
        field.generators.get(name).map(|c| NFElem { field: field.clone(), coeffs: c.clone() })
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_field(&self.field, &other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        NFElem { field: self.field.clone(), coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.field.degree();
        if n == 1 {
            return Ok(NFElem { field: self.field.clone(), coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] });
        }
        let mut prod = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(NFElem { field: self.field.clone(), coeffs: reduce_mod(prod, &self.field.minpoly) })
    }

    /// Inverse via the Bezout identity against the minimal polynomial.
    pub fn try_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let zero = Rational::zero();
        let f = Poly::new(self.coeffs.clone(), zero.clone());
        let m = Poly::new(self.field.minpoly.clone(), zero.clone());
        // extended Euclid: track s with s*f = r (mod m)
        let (mut r0, mut r1) = (m, f);
        let (mut s0, mut s1) = (Poly::zero(&zero), Poly::constant(Rational::one()));
        while !r1.is_zero_poly() {
            let (q, r) = r0.div_rem(&r1)?;
            let s = s0.minus(&q.times(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 is a non-zero constant since minpoly is irreducible
        if r0.degree() != Some(0) {
            return Err(Error::Reducible("element shares a factor with the minimal polynomial".into()));
        }
        let c = r0.coeff(0);
        let mut coeffs: Vec<Rational> = (0..self.field.degree()).map(|i| s0.coeff(i) / &c).collect();
        coeffs = reduce_mod(coeffs, &self.field.minpoly);
        Ok(NFElem { field: self.field.clone(), coeffs })
    }

    /// Coordinates in the declared Q-basis: the unique `x` with
    /// `self = sum_k s_k x_k`.
    pub fn span_decompose(&self) -> Vec<Rational> {
        self.field.qbasis_inverse.apply(&self.coeffs).expect("square basis matrix")
    }

    /// Inverse of [`span_decompose`](Self::span_decompose).
    pub fn span_recompose(field: &Arc<NumberField>, coords: &[Rational]) -> Result<Self> {
        let n = field.degree();
        if coords.len() != n {
            return Err(Error::Shape(format!("{} span coordinates for degree {n}", coords.len())));
        }
        let mut coeffs = vec![Rational::zero(); n];
        for (k, x) in coords.iter().enumerate() {
            for (i, s) in field.qbasis[k].iter().enumerate() {
                coeffs[i] += x * s;
            }
        }
        Ok(NFElem { field: field.clone(), coeffs })
    }

    /// Complex image under the `j`-th embedding.
    pub fn embed(&self, j: usize) -> Complex64 {
        let theta = if self.field.degree() == 1 { Complex64::new(0.0, 0.0) } else { self.field.embeddings()[j] };
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * theta + Complex64::new(c.to_f64().unwrap_or(0.0), 0.0);
        }
        acc
    }

    /// Integer power, negative exponents through the inverse.
    pub fn powi(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.try_inv()? } else { self.clone() };
        Ok(base.pow_u(e.unsigned_abs()))
    }

    /// Exact `k`-th root when one exists among the candidate roots of
    /// `X^k - self`.
    pub fn nth_root(&self, k: u32) -> Option<Self> {
        if k == 1 {
            return Some(self.clone());
        }
        let one = NFElem::one(&self.field);
        let mut coeffs = vec![self.negated()];
        coeffs.extend((1..k).map(|_| NFElem::zero(&self.field)));
        coeffs.push(one);
        let p = Poly::new(coeffs, NFElem::zero(&self.field));
        let mut roots = roots_in_field(&p, &[]).ok()?;
        roots.sort_by(|a, b| root_order(a, b));
        roots.into_iter().next()
    }

    /// The same element seen in `target`: identity on equal fields, the
    /// canonical inclusion for rational elements.
    pub fn coerce_into(&self, target: &Arc<NumberField>) -> Result<Self> {
        if same_field(&self.field, target) {
            return Ok(NFElem { field: target.clone(), coeffs: self.coeffs.clone() });
        }
        match self.as_rational() {
            Some(q) => Ok(NFElem::from_rational(target, q)),
            None => Err(Error::FieldMismatch),
        }
    }
}

/// Deterministic order on candidate roots: positive rational roots first,
/// then by coordinates.
pub(crate) fn root_order(a: &NFElem, b: &NFElem) -> std::cmp::Ordering {
    let key = |x: &NFElem| (x.as_rational().map_or(2, |q| if q.is_positive() { 0 } else { 1 }), x.coeffs.clone());
    key(a).cmp(&key(b))
}

fn reduce_mod(mut v: Vec<Rational>, minpoly: &[Rational]) -> Vec<Rational> {
    let n = minpoly.len() - 1;
    while v.len() > n {
        let top = v.pop().expect("non-empty");
        if top.is_zero() {
            continue;
        }
        let shift = v.len() - n;
        for (i, m) in minpoly.iter().enumerate().take(n) {
            v[shift + i] -= &top * m;
        }
    }
    v.resize(n, Rational::zero());
    v
}

impl fmt::Debug for NFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = &self.field.var;
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = fmt_rational(c);
            parts.push(match i {
                0 => cs,
                _ => {
                    let v = if i == 1 { var.clone() } else { format!("{var}^{i}") };
                    match cs.as_str() {
                        "1" => v,
                        "-1" => format!("-{v}"),
                        _ => format!("{cs}*{v}"),
                    }
                }
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
        }
    }
}

impl PartialEq for NFElem {
    fn eq(&self, other: &Self) -> bool {
        same_field(&self.field, &other.field) && self.coeffs == other.coeffs
    }
}

impl Eq for NFElem {}

impl Ring for NFElem {
    fn zero_like(&self) -> Self {
        NFElem::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        NFElem::one(&self.field)
    }
    fn plus(&self, other: &Self) -> Self {
        self.try_add(other).expect("number field mismatch")
    }
    fn minus(&self, other: &Self) -> Self {
        self.try_sub(other).expect("number field mismatch")
    }
    fn times(&self, other: &Self) -> Self {
        self.try_mul(other).expect("number field mismatch")
    }
    fn negated(&self) -> Self {
        NFElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
    fn try_is_zero(&self) -> Result<bool> {
        Ok(self.is_zero())
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        NFElem::from_rational(&self.field, q.clone())
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        d.try_inv().ok().map(|i| self.times(&i))
    }
    fn scale_rational(&self, q: &Rational) -> Self {
        NFElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }
}

impl Field for NFElem {
    fn inv(&self) -> Result<Self> {
        self.try_inv()
    }
}

/// The field operation selector of the arithmetic entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfOp {
    Add,
    Mul,
    Inv,
}

/// Exact field arithmetic; `y` is ignored for `Inv`.
pub fn nf_arith(x: &NFElem, y: &NFElem, op: NfOp) -> Result<NFElem> {
    match op {
        NfOp::Add => x.try_add(y),
        NfOp::Mul => x.try_mul(y),
        NfOp::Inv => x.try_inv(),
    }
}

/// Distinct roots in `K` of a polynomial over `K`.
///
/// Candidates come from `hints` and from complex root isolation in every
/// embedding followed by rational reconstruction; each candidate is accepted
/// only after exact verification, so the answer never depends on floating
/// point beyond possibly missing a root.
pub fn roots_in_field(p: &Poly<NFElem>, hints: &[NFElem]) -> Result<Vec<NFElem>> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    let field = p.proto().field().clone();
    let mut found: Vec<NFElem> = Vec::new();
    let push = |c: NFElem, found: &mut Vec<NFElem>| {
        if !found.contains(&c) && p.eval(&c).is_zero() {
            found.push(c);
        }
    };
    for h in hints {
        if same_field(h.field(), &field) {
            push(h.clone(), &mut found);
        }
    }
    if deg == 0 {
        return Ok(found);
    }
    let sqf = p.squarefree_part()?;
    if sqf.degree() == Some(1) {
        let c = sqf.coeff(0).negated().divide(&sqf.coeff(1))?;
        push(c, &mut found);
        return Ok(found);
    }
    for c in embedding::candidates(&sqf, &field) {
        push(c, &mut found);
        if found.len() >= sqf.degree().unwrap_or(0) {
            break;
        }
    }
    found.sort_by(root_order);
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint};

    #[test]
    fn defining_relations() {
        let k = NumberField::gaussian();
        let i = NFElem::theta(&k);
        assert_eq!(i.times(&i), NFElem::from_int(&k, -1));
        let q = NumberField::eisenstein();
        let w = NFElem::theta(&q);
        assert_eq!(w.times(&w), NFElem::new(&q, vec![rint(-1), rint(-1)]).unwrap());
    }

    #[test]
    fn sqrt2_inverse() {
        let k = NumberField::new(FieldSpec { minpoly: vec![rint(-2), rint(0), rint(1)], ..Default::default() }).unwrap();
        let r = NFElem::theta(&k);
        let inv = nf_arith(&r, &r, NfOp::Inv).unwrap();
        assert_eq!(inv, NFElem::new(&k, vec![rint(0), rat(1, 2)]).unwrap());
    }

    #[test]
    fn span_decomposition_in_declared_basis() {
        let k = NumberField::new(FieldSpec {
            minpoly: vec![rint(1), rint(0), rint(1)],
            qbasis: Some(vec![vec![rint(1), rint(1)], vec![rint(1), rint(-1)]]),
            ..Default::default()
        })
        .unwrap();
        let two = NFElem::from_int(&k, 2);
        assert_eq!(two.span_decompose(), vec![rint(1), rint(1)]);
        assert_eq!(NFElem::zero(&k).span_decompose(), vec![rint(0), rint(0)]);
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = NFElem::one(&NumberField::gaussian());
        let b = NFElem::one(&NumberField::eisenstein());
        assert_eq!(a.try_add(&b), Err(Error::FieldMismatch));
    }

    #[test]
    fn reducible_polynomial_rejected() {
        let r = NumberField::new(FieldSpec { minpoly: vec![rint(-1), rint(0), rint(1)], ..Default::default() });
        assert!(matches!(r, Err(Error::Reducible(_))));
        let r = NumberField::new(FieldSpec { minpoly: vec![rint(1), rint(0), rint(0), rint(0), rint(1)], ..Default::default() });
        assert!(r.is_ok(), "X^4+1 is irreducible");
        // (X^2+1)(X^2+2)
        let r = NumberField::new(FieldSpec { minpoly: vec![rint(2), rint(0), rint(3), rint(0), rint(1)], ..Default::default() });
        assert!(matches!(r, Err(Error::Reducible(_))));
    }

    #[test]
    fn cube_roots_of_729_over_eisenstein() {
        let k = NumberField::eisenstein();
        let z = NFElem::zero(&k);
        let mut c = vec![NFElem::from_int(&k, -729)];
        c.extend([z.clone(), z.clone(), NFElem::one(&k)]);
        let roots = roots_in_field(&Poly::new(c, z), &[]).unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots[0], NFElem::from_int(&k, 9));
    }
}

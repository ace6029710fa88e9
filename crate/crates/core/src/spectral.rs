//! Exact spectral analysis of evaluated `kappa` matrices over `F_K`, and its
//! one-parameter version over `F_K[t]`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graded_ring::{EvaluationMap, Evaluator, ParametricEvaluation};
use crate::levi_civita::{default_truncation, LCNumber, SElem};
use crate::matrix::Matrix;
use crate::number_field::{root_order, roots_in_field, NFElem, NumberField};
use crate::poly::{resultant, Poly};
use crate::quantum_model::Kappa;
use crate::scalar::{fmt_rational, rint, Field, Rational, Ring};

/// Degree-2 homogeneous matrix over `S_K` in its `b`-normalized view: with
/// `psi_i = phi_i b^(-deg phi_i)` the matrix is `b^2 X` with `X` over `F_K`.
/// Only `X` is stored; an eigenvalue `c` of `X` is the eigenvalue `c b^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BMatrix {
    matrix: Matrix<LCNumber>,
    degrees: Vec<i64>,
}

impl BMatrix {
    pub fn new(matrix: Matrix<LCNumber>, degrees: Vec<i64>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != degrees.len() {
            return Err(Error::Shape("b-matrix must be square with one degree per basis vector".into()));
        }
        Ok(BMatrix { matrix, degrees })
    }

    /// `ev(kappa)`, checking the degree of every symbolic entry.
    pub fn from_kappa(kappa: &Kappa, ev: &EvaluationMap) -> Result<Self> {
        let n = kappa.degrees.len();
        let zero = LCNumber::zero(ev.field());
        let mut m = Matrix::zeros(n, n, &zero);
        for row in 0..n {
            for col in 0..n {
                let x = kappa.matrix.get(row, col);
                if x.is_exact_zero() {
                    continue;
                }
                let expected = kappa.expected_degree(row, col);
                if let Some(d) = x.homogeneous_degree()? {
                    if d != expected {
                        return Err(Error::DegreeMismatch { expected: expected.to_string(), found: d.to_string() });
                    }
                }
                m.set(row, col, ev.series(x)?);
            }
        }
        BMatrix::new(m, kappa.degrees.clone())
    }

    /// From full `S_K` entries; fails unless entry `(i, j)` is homogeneous of
    /// degree `deg_j + 2 - deg_i`.
    pub fn from_selems(rows: &[Vec<SElem>], degrees: Vec<i64>, field: &Arc<NumberField>) -> Result<Self> {
        let n = degrees.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("b-matrix must be square with one degree per basis vector".into()));
        }
        let mut m = Matrix::zeros(n, n, &LCNumber::zero(field));
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expected = degrees[j] + 2 - degrees[i];
                if let Some(d) = x.degree()? {
                    if d != expected {
                        return Err(Error::DegreeMismatch { expected: expected.to_string(), found: d.to_string() });
                    }
                }
                m.set(i, j, x.coefficient_in_degree(expected)?.coerce_into(field)?);
            }
        }
        BMatrix::new(m, degrees)
    }

    pub fn to_selems(&self) -> Vec<Vec<SElem>> {
        let n = self.size();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| SElem::homogeneous(self.matrix.get(i, j).clone(), self.degrees[j] + 2 - self.degrees[i]))
                    .collect()
            })
            .collect()
    }

    pub fn matrix(&self) -> &Matrix<LCNumber> {
        &self.matrix
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn size(&self) -> usize {
        self.degrees.len()
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.matrix.proto().field()
    }

    pub fn coerce_into(&self, field: &Arc<NumberField>) -> Result<Self> {
        let zero = LCNumber::zero(field);
        Ok(BMatrix { matrix: self.matrix.try_map(&zero, |x| x.coerce_into(field))?, degrees: self.degrees.clone() })
    }

    pub fn block(&self, idx: &[usize]) -> Self {
        BMatrix { matrix: self.matrix.principal(idx), degrees: idx.iter().map(|&i| self.degrees[i]).collect() }
    }

    /// `X + f I`, i.e. `ev(kappa) + f b^2`.
    pub fn shifted(&self, f: &LCNumber) -> Result<Self> {
        Ok(BMatrix { matrix: self.matrix.minus_scalar(&f.negated())?, degrees: self.degrees.clone() })
    }
}

impl fmt::Display for BMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size() {
            let row: Vec<String> = (0..self.size()).map(|j| self.matrix.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `det(X I - A)` in the `b`-normalized view.
pub fn char_poly(a: &BMatrix) -> Result<Poly<LCNumber>> {
    a.matrix.charpoly()
}

/// Square-free part and its discriminant-type certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct Squarefree<S: Ring> {
    /// `p / gcd(p, p')` up to a non-zero scalar.
    pub part: Poly<S>,
    /// `Res(P, P')`, non-zero.
    pub certificate: S,
}

pub fn squarefree_and_resultants<S: Ring>(p: &Poly<S>) -> Result<Squarefree<S>> {
    let part = p.squarefree_part_exact()?;
    let certificate = if part.degree() == Some(0) { part.leading() } else { resultant(&part, &part.derivative())? };
    Ok(Squarefree { part, certificate })
}

fn checked_valuation(x: &LCNumber) -> Result<Option<Rational>> {
    x.valuation()
}

/// Edges of the lower Newton polygon of `p` as `(i, j, slope)` with root
/// valuation `(v_i - v_j) / (j - i)`.
fn newton_edges(p: &Poly<LCNumber>) -> Result<Vec<(usize, usize, Rational)>> {
    let mut pts: Vec<(usize, Rational)> = Vec::new();
    for (i, c) in p.coeffs().iter().enumerate() {
        if let Some(v) = checked_valuation(c)? {
            pts.push((i, v));
        }
    }
    let mut hull: Vec<(usize, Rational)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (i1, v1) = &hull[hull.len() - 2];
            let (i2, v2) = &hull[hull.len() - 1];
            // drop the middle point if it lies on or above the segment
            let lhs = (v2 - v1) * rint((pt.0 - i1) as i64);
            let rhs = (&pt.1 - v1) * rint((i2 - i1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    Ok(hull
        .windows(2)
        .map(|w| {
            let ((i, vi), (j, vj)) = (&w[0], &w[1]);
            (*i, *j, (vi - vj) / rint((j - i) as i64))
        })
        .collect())
}

/// Leading coefficients `c` of roots of valuation `e` on the given edge.
fn residual_roots(p: &Poly<LCNumber>, edge: &(usize, usize, Rational), hints: &[NFElem]) -> Result<Vec<NFElem>> {
    let (i, j, e) = edge;
    let field = p.proto().field().clone();
    let base = checked_valuation(&p.coeff(*i))?.expect("hull vertex") + &(e * rint(*i as i64));
    let mut coeffs = vec![NFElem::zero(&field); j - i + 1];
    for k in *i..=*j {
        let c = p.coeff(k);
        if let Some(v) = checked_valuation(&c)? {
            if v + e * rint(k as i64) == base {
                coeffs[k - i] = c.leading()?.expect("non-zero").1;
            }
        }
    }
    let residual = Poly::new(coeffs, NFElem::zero(&field));
    Ok(roots_in_field(&residual, hints)?.into_iter().filter(|c| !c.is_zero()).collect())
}

const ROOT_SEARCH_DEPTH: usize = 64;

/// One root of `p` that is a finite sum of monomials, by Newton-Puiseux
/// steps whose exponents strictly increase.
fn find_finite_root(
    p: &Poly<LCNumber>,
    above: Option<&Rational>,
    limit: &Rational,
    hints: &[NFElem],
    depth: usize,
) -> Result<Option<LCNumber>> {
    let field = p.proto().field().clone();
    if p.coeff(0).try_is_zero()? {
        return Ok(Some(LCNumber::zero(&field)));
    }
    if depth == 0 {
        return Ok(None);
    }
    for edge in newton_edges(p)? {
        let e = &edge.2;
        if above.is_some_and(|a| e <= a) || e > limit {
            continue;
        }
        for c in residual_roots(p, &edge, hints)? {
            let term = LCNumber::monomial(c, e.clone());
            let shifted = p.taylor_shift(&term);
            if let Some(rest) = find_finite_root(&shifted, Some(e), limit, hints, depth - 1)? {
                return Ok(Some(term.try_add(&rest)?));
            }
        }
    }
    Ok(None)
}

/// Strips the root `r` as often as it divides `p`.
fn deflate<S: Ring>(p: &Poly<S>, r: &S) -> Result<(Poly<S>, usize)> {
    let mut cur = p.clone();
    let mut m = 0;
    loop {
        let (q, rem) = cur.divide_linear(r);
        if cur.degree().unwrap_or(0) == 0 || !rem.try_is_zero()? {
            return Ok((cur, m));
        }
        cur = q;
        m += 1;
    }
}

/// Total order on Levi-Civita numbers used for reports: zero first, then
/// by valuation, then coefficient by coefficient.
pub fn lc_order(a: &LCNumber, b: &LCNumber) -> Ordering {
    let ta = a.terms();
    let tb = b.terms();
    match (ta.is_empty(), tb.is_empty()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    for ((ea, ca), (eb, cb)) in ta.iter().zip(tb) {
        let o = ea.cmp(eb).then_with(|| root_order(ca, cb));
        if o != Ordering::Equal {
            return o;
        }
    }
    ta.len().cmp(&tb.len())
}

/// Complete factorization of `p` into linear factors over `F_K`, roots
/// being finite Levi-Civita numbers; otherwise [`Error::SplitFailure`]
/// naming the residual factor.
pub fn lc_roots(p: &Poly<LCNumber>, hints: &[NFElem]) -> Result<Vec<(LCNumber, usize)>> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    let field = p.proto().field().clone();
    let top = p
        .coeffs()
        .iter()
        .filter_map(|c| c.top_exponent().cloned())
        .chain(p.coeffs().iter().filter_map(|c| c.valuation_lower_bound()))
        .map(|e| e.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let limit = top + default_truncation();
    let mut roots: Vec<(LCNumber, usize)> = Vec::new();
    let mut cur = p.clone();
    if deg == 0 {
        return Ok(roots);
    }
    let v = cur.x_adic_valuation()?;
    if v > 0 {
        roots.push((LCNumber::zero(&field), v));
        cur = Poly::new(cur.coeffs()[v..].to_vec(), cur.proto().clone());
    }
    while cur.degree().unwrap_or(0) > 0 {
        let Some(r) = find_finite_root(&cur, None, &limit, hints, ROOT_SEARCH_DEPTH)? else {
            let d = cur.degree().unwrap_or(0);
            return Err(Error::SplitFailure { residual: cur.render("X"), degree: d });
        };
        let (next, m) = deflate(&cur, &r)?;
        if m == 0 {
            return Err(Error::PrecisionExhausted(format!("root {r} failed exact verification")));
        }
        roots.push((r, m));
        cur = next;
    }
    roots.sort_by(|a, b| lc_order(&a.0, &b.0));
    Ok(roots)
}

/// Generalized eigenspace data of one eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenData<S: Ring> {
    pub value: S,
    pub multiplicity: usize,
    /// `dim ker (A - value)`.
    pub geometric: usize,
    /// Minimal `m` with `ker (A - value)^m` stable.
    pub index: usize,
    /// `dim ker (A - value)^m` for `m = 1..=index`.
    pub kernel_dims: Vec<usize>,
    /// Basis of the generalized eigenspace in full coordinates.
    pub basis: Vec<Vec<S>>,
    /// Non-zero pivot products certifying each rank used.
    pub certificates: Vec<S>,
}

/// Kernel chain of `(B - r)^m` on one block until it stabilizes.
fn block_chain<S: Ring>(b: &Matrix<S>, r: &S) -> Result<(Vec<usize>, Vec<Vec<S>>, Vec<S>)> {
    let n = b.rows();
    if n == 1 {
        let d = b.get(0, 0).minus(r);
        return Ok(if d.try_is_zero()? {
            (vec![1], vec![vec![r.one_like()]], Vec::new())
        } else {
            (vec![0], Vec::new(), vec![d])
        });
    }
    let shifted = b.minus_scalar(r)?;
    let mut power = shifted.clone();
    let mut dims = Vec::new();
    let mut certs = Vec::new();
    let mut basis = Vec::new();
    for _ in 0..n {
        let red = power.reduce()?;
        let dim = n - red.rank();
        if red.rank() > 0 {
            certs.push(red.certificate());
        }
        if dims.last() == Some(&dim) {
            break;
        }
        dims.push(dim);
        basis = power.kernel()?;
        if dim == 0 || dim == n {
            break;
        }
        power = power.times(&shifted)?;
    }
    if dims.last() == Some(&0) {
        dims.clear();
        dims.push(0);
    }
    Ok((dims, basis, certs))
}

/// Eigenspace data for each supplied root, computed block by block.
pub fn eigen_data<S: Ring>(a: &Matrix<S>, roots: &[(S, usize)]) -> Result<Vec<EigenData<S>>> {
    let n = a.rows();
    let blocks = a.block_components();
    let zero = a.proto().zero_like();
    let mut out = Vec::with_capacity(roots.len());
    for (r, mult) in roots {
        let mut total_dims: Vec<usize> = Vec::new();
        let mut chains: Vec<Vec<usize>> = Vec::new();
        let mut basis: Vec<Vec<S>> = Vec::new();
        let mut certificates = Vec::new();
        for idx in &blocks {
            let (dims, vecs, certs) = block_chain(&a.principal(idx), r)?;
            certificates.extend(certs);
            for v in vecs {
                let mut full = vec![zero.clone(); n];
                for (k, &i) in idx.iter().enumerate() {
                    full[i] = v[k].clone();
                }
                basis.push(full);
            }
            chains.push(dims);
        }
        let index = chains.iter().filter(|c| c.last() != Some(&0)).map(|c| c.len()).max().unwrap_or(0);
        for m in 0..index {
            total_dims.push(chains.iter().map(|c| c.get(m).or(c.last()).copied().unwrap_or(0)).sum());
        }
        let dim = basis.len();
        if dim != *mult {
            return Err(Error::PrecisionExhausted(format!(
                "generalized eigenspace of dimension {dim} for a root of multiplicity {mult}"
            )));
        }
        out.push(EigenData {
            value: r.clone(),
            multiplicity: *mult,
            geometric: total_dims.first().copied().unwrap_or(0),
            index,
            kernel_dims: total_dims,
            basis,
            certificates,
        });
    }
    Ok(out)
}

/// Spectrum of an evaluated matrix over a splitting field `K'`.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub field: Arc<NumberField>,
    pub degrees: Vec<i64>,
    pub char_poly: Poly<LCNumber>,
    pub squarefree: Poly<LCNumber>,
    /// The `b`-normalized matrix over `K'`.
    pub matrix: Matrix<LCNumber>,
    /// Eigenvalues as `F`-parts: the eigenvalue in `S` is `value * b^2`.
    pub eigen: Vec<EigenData<LCNumber>>,
}

impl SpectrumReport {
    pub fn size(&self) -> usize {
        self.degrees.len()
    }

    pub fn values(&self) -> Vec<SElem> {
        self.eigen.iter().map(|e| SElem::homogeneous(e.value.clone(), 2)).collect()
    }

    pub fn find(&self, value: &LCNumber) -> Option<&EigenData<LCNumber>> {
        self.eigen.iter().find(|e| &e.value == value)
    }

    /// Eigenvalues and multiplicities as display strings.
    pub fn summary(&self) -> Vec<(String, usize)> {
        self.values().iter().zip(&self.eigen).map(|(v, e)| (v.to_string(), e.multiplicity)).collect()
    }
}

/// Spectrum of `a` over `field`, which must contain the entries' field and
/// every coefficient of every eigenvalue.
pub fn spectrum(a: &BMatrix, field: &Arc<NumberField>, hints: &[NFElem]) -> Result<SpectrumReport> {
    let a = a.coerce_into(field)?;
    let blocks = a.matrix.block_components();
    let one = LCNumber::one(field);
    let mut char_poly = Poly::constant(one.clone());
    let mut roots: Vec<(LCNumber, usize)> = Vec::new();
    for idx in &blocks {
        let cp = a.matrix.principal(idx).charpoly()?;
        char_poly = char_poly.times(&cp);
        for (r, m) in lc_roots(&cp, hints)? {
            match roots.iter_mut().find(|(x, _)| x == &r) {
                Some(slot) => slot.1 += m,
                None => roots.push((r, m)),
            }
        }
    }
    roots.sort_by(|x, y| lc_order(&x.0, &y.0));
    let squarefree = Poly::from_roots(&roots.iter().map(|(r, _)| (r.clone(), 1)).collect::<Vec<_>>(), &one);
    let eigen = eigen_data(&a.matrix, &roots)?;
    Ok(SpectrumReport { field: field.clone(), degrees: a.degrees, char_poly, squarefree, matrix: a.matrix, eigen })
}

/// Power-series root of `P(t, X)` near a simple root.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedRoot<S: Ring> {
    /// `alpha_0, alpha_1, ...` with `alpha(t) = sum alpha_n (t - zeta_0)^n`.
    pub coeffs: Vec<S>,
    /// Coefficient of `t` in `P(zeta_0 + t, alpha_0 + X)`.
    pub c10: S,
    /// Coefficient of `X`, non-zero.
    pub c01: S,
    /// `t`-adic valuation of `P(t, alpha(t))`; `None` when it vanishes.
    pub residual_valuation: Option<usize>,
}

impl LiftedRoot<LCNumber> {
    /// Valuation `v` of `c01`; the series converges for `|t - zeta_0| < 2^(-v)`.
    pub fn radius_valuation(&self) -> Result<Rational> {
        Ok(self.c01.valuation()?.expect("non-zero derivative"))
    }
}

fn truncate_poly<S: Ring>(p: &Poly<S>, order: usize) -> Poly<S> {
    Poly::new(p.coeffs().iter().take(order + 1).cloned().collect(), p.proto().clone())
}

/// Lifts the simple root `alpha0` of `P(zeta0, X)` to a power series in
/// `t - zeta0` with `order + 1` coefficients. `P` is a polynomial in `X`
/// whose coefficients are polynomials in `t`.
pub fn lift_root<S: Field>(p: &Poly<Poly<S>>, zeta0: &S, alpha0: &S, order: usize) -> Result<LiftedRoot<S>> {
    let zero = alpha0.zero_like();
    let inner_zero = Poly::zero(&zero);
    let shifted_t = Poly::new(p.coeffs().iter().map(|c| c.taylor_shift(zeta0)).collect(), inner_zero.clone());
    let local = shifted_t.taylor_shift(&Poly::constant(alpha0.clone()));
    let c00 = local.coeff(0).coeff(0);
    if !c00.try_is_zero()? {
        return Err(Error::NotARoot(format!("P(zeta0, alpha0) = {c00:?}")));
    }
    let c01 = local.coeff(1).coeff(0);
    if c01.try_is_zero()? {
        return Err(Error::NotASimpleRoot);
    }
    let c10 = local.coeff(0).coeff(1);
    let eval_trunc = |series: &Poly<S>, n: usize| -> Poly<S> {
        let mut acc = inner_zero.clone();
        for c in local.coeffs().iter().rev() {
            acc = truncate_poly(&acc.times(series), n).plus(&truncate_poly(c, n));
        }
        acc
    };
    let mut alpha = vec![zero.clone()];
    for n in 1..=order {
        let series = Poly::new(alpha.clone(), zero.clone());
        let r = eval_trunc(&series, n);
        alpha.push(r.coeff(n).negated().divide(&c01)?);
    }
    let series = Poly::new(alpha.clone(), zero.clone());
    let mut residual = inner_zero.clone();
    for c in local.coeffs().iter().rev() {
        residual = residual.times(&series).plus(c);
    }
    let residual_valuation = match residual.x_adic_valuation() {
        Ok(v) => Some(v),
        Err(Error::ZeroPolynomial) => None,
        Err(e) => return Err(e),
    };
    if residual_valuation.is_some_and(|v| v <= order) {
        return Err(Error::PrecisionExhausted(format!("residual valuation {residual_valuation:?} at order {order}")));
    }
    alpha[0] = alpha0.clone();
    Ok(LiftedRoot { coeffs: alpha, c10, c01, residual_valuation })
}

/// A generic eigenvalue `c t^m` of a one-parameter family.
#[derive(Clone, Debug)]
pub struct GenericEigen {
    pub coefficient: LCNumber,
    pub t_power: usize,
    pub data: EigenData<Poly<LCNumber>>,
    /// `dim (E cap H_i)` for each supplied subspace.
    pub intersections: Vec<usize>,
    /// `rank (A - alpha)` on `E`.
    pub gamma: usize,
}

impl GenericEigen {
    pub fn describe(&self) -> String {
        let c = self.coefficient.to_string();
        match (self.t_power, c.as_str()) {
            (0, _) => c,
            (_, "0") => "0".into(),
            (1, "1") => "t".into(),
            (m, "1") => format!("t^{m}"),
            (1, _) => format!("{c}*t"),
            (m, _) => format!("{c}*t^{m}"),
        }
    }
}

/// Generic spectrum of `A(t)` over `F_K(t)` with exceptional-set
/// certificates.
#[derive(Clone, Debug)]
pub struct GenericSpectrum {
    pub char_poly: Poly<Poly<LCNumber>>,
    pub eigen: Vec<GenericEigen>,
    /// Non-zero polynomials in `t`; outside their common zero set every
    /// rank and multiplicity equals its generic value.
    pub certificates: Vec<Poly<LCNumber>>,
    /// The zeros of the certificates in `F_K`, when they all split.
    pub exceptional: Option<Vec<LCNumber>>,
}

impl GenericSpectrum {
    /// True when every certificate vanishes at most at `t = 0`.
    pub fn exceptional_only_at_origin(&self) -> bool {
        self.exceptional.as_ref().is_some_and(|pts| pts.iter().all(|p| p.terms().is_empty()))
    }
}

fn t_order(p: &Poly<LCNumber>) -> Result<Option<usize>> {
    match p.x_adic_valuation() {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroPolynomial) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Roots `c t^m` of a polynomial over `F_K[t]`.
fn monomial_t_roots(p: &Poly<Poly<LCNumber>>, hints: &[NFElem]) -> Result<Vec<(LCNumber, usize, usize)>> {
    let field = p.proto().proto().field().clone();
    let lc0 = LCNumber::zero(&field);
    let mut cur = p.clone();
    let mut out: Vec<(LCNumber, usize, usize)> = Vec::new();
    let v = cur.x_adic_valuation()?;
    if v > 0 {
        out.push((lc0.clone(), 0, v));
        cur = Poly::new(cur.coeffs()[v..].to_vec(), cur.proto().clone());
    }
    while cur.degree().unwrap_or(0) > 0 {
        let mut pts: Vec<(usize, usize)> = Vec::new();
        for (i, c) in cur.coeffs().iter().enumerate() {
            if let Some(o) = t_order(c)? {
                pts.push((i, o));
            }
        }
        let mut found = None;
        'edges: for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let ((i, oi), (j, oj)) = (pts[a], pts[b]);
                if oi < oj || (oi - oj) % (j - i) != 0 {
                    continue;
                }
                let m = (oi - oj) / (j - i);
                let base = oi + i * m;
                if pts.iter().any(|&(k, ok)| ok + k * m < base) {
                    continue;
                }
                let residual = Poly::new(
                    (0..cur.coeffs().len())
                        .map(|k| {
                            let c = cur.coeff(k);
                            if k * m <= base && base - k * m < c.coeffs().len() {
                                c.coeff(base - k * m)
                            } else {
                                lc0.clone()
                            }
                        })
                        .collect(),
                    lc0.clone(),
                );
                let candidates = match lc_roots(&residual, hints) {
                    Ok(r) => r,
                    Err(Error::SplitFailure { .. }) => continue,
                    Err(e) => return Err(e),
                };
                for (c, _) in candidates {
                    if c.terms().is_empty() {
                        continue;
                    }
                    let root = Poly::monomial(c.clone(), m);
                    let (next, mult) = deflate(&cur, &root)?;
                    if mult > 0 {
                        found = Some((c, m, mult, next));
                        break 'edges;
                    }
                }
            }
        }
        let Some((c, m, mult, next)) = found else {
            let d = cur.degree().unwrap_or(0);
            return Err(Error::SplitFailure { residual: cur.render("X"), degree: d });
        };
        out.push((c, m, mult));
        cur = next;
    }
    out.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| lc_order(&x.0, &y.0)));
    Ok(out)
}

/// Rank of the columns `vecs` together with a certificate.
fn column_rank<S: Ring>(vecs: &[Vec<S>], n: usize, zero: &S) -> Result<(usize, Option<S>)> {
    if vecs.is_empty() {
        return Ok((0, None));
    }
    let red = Matrix::from_columns(vecs, n, zero).reduce()?;
    let cert = (red.rank() > 0).then(|| red.certificate());
    Ok((red.rank(), cert))
}

/// `dim (E cap H) = dim E + dim H - rank [E | H]`, plus certificates.
pub fn intersection_dim<S: Ring>(e: &[Vec<S>], h: &[Vec<S>], n: usize, zero: &S) -> Result<(usize, Vec<S>)> {
    let (re, ce) = column_rank(e, n, zero)?;
    let (rh, ch) = column_rank(h, n, zero)?;
    let mut both = e.to_vec();
    both.extend(h.iter().cloned());
    let (rb, cb) = column_rank(&both, n, zero)?;
    Ok((re + rh - rb, [ce, ch, cb].into_iter().flatten().collect()))
}

/// `rank (A - value)` restricted to the span of `basis`.
pub fn restricted_rank<S: Ring>(a: &Matrix<S>, value: &S, basis: &[Vec<S>]) -> Result<(usize, Option<S>)> {
    let shifted = a.minus_scalar(value)?;
    let images: Vec<Vec<S>> = basis.iter().map(|v| shifted.apply(v)).collect::<Result<_>>()?;
    column_rank(&images, a.rows(), a.proto())
}

/// Evaluates `kappa` under a one-parameter family: entries in `F_K[t]`.
pub fn parametric_matrix(kappa: &Kappa, family: &ParametricEvaluation) -> Result<Matrix<Poly<LCNumber>>> {
    let zero = family.zero();
    kappa.matrix.try_map(&zero, |x| family.series(x))
}

/// Generic eigenvalues, their eigenspace ranks against `subspaces`, and
/// certificates bounding the exceptional parameters.
pub fn generic_invariants(
    a: &Matrix<Poly<LCNumber>>,
    subspaces: &[Vec<Vec<NFElem>>],
    hints: &[NFElem],
) -> Result<GenericSpectrum> {
    let field = a.proto().proto().field().clone();
    let lc0 = LCNumber::zero(&field);
    let n = a.rows();
    let pzero = Poly::zero(&lc0);
    let blocks = a.block_components();
    let mut char_poly = Poly::constant(Poly::constant(LCNumber::one(&field)));
    let mut roots: Vec<(LCNumber, usize, usize)> = Vec::new();
    for idx in &blocks {
        let cp = a.principal(idx).charpoly()?;
        char_poly = char_poly.times(&cp);
        for (c, m, mult) in monomial_t_roots(&cp, hints)? {
            match roots.iter_mut().find(|(x, y, _)| x == &c && *y == m) {
                Some(slot) => slot.2 += mult,
                None => roots.push((c, m, mult)),
            }
        }
    }
    roots.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| lc_order(&x.0, &y.0)));
    let poly_roots: Vec<(Poly<LCNumber>, usize)> =
        roots.iter().map(|(c, m, mult)| (Poly::monomial(c.clone(), *m), *mult)).collect();
    let data = eigen_data(a, &poly_roots)?;
    let lifted: Vec<Vec<Vec<Poly<LCNumber>>>> = subspaces
        .iter()
        .map(|h| {
            h.iter()
                .map(|v| v.iter().map(|x| Ok(Poly::constant(LCNumber::constant(x.coerce_into(&field)?)))).collect())
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut certificates: Vec<Poly<LCNumber>> = Vec::new();
    let squarefree = Poly::from_roots(
        &poly_roots.iter().map(|(r, _)| (r.clone(), 1)).collect::<Vec<_>>(),
        &Poly::constant(LCNumber::one(&field)),
    );
    if squarefree.degree().unwrap_or(0) > 0 {
        certificates.push(resultant(&squarefree, &squarefree.derivative())?);
    }
    let mut eigen = Vec::new();
    for ((c, m, _), d) in roots.iter().zip(data) {
        let mut intersections = Vec::new();
        for h in &lifted {
            let (dim, certs) = intersection_dim(&d.basis, h, n, &pzero)?;
            intersections.push(dim);
            certificates.extend(certs);
        }
        let (gamma, cert) = restricted_rank(a, &d.value, &d.basis)?;
        certificates.extend(cert);
        certificates.extend(d.certificates.iter().cloned());
        eigen.push(GenericEigen { coefficient: c.clone(), t_power: *m, data: d, intersections, gamma });
    }
    let mut distinct: Vec<Poly<LCNumber>> = Vec::new();
    for c in certificates {
        if !c.try_is_zero()? && !distinct.contains(&c) {
            distinct.push(c);
        }
    }
    let mut points: Vec<LCNumber> = Vec::new();
    let mut split = true;
    for c in &distinct {
        if c.degree() == Some(0) {
            continue;
        }
        match lc_roots(c, hints) {
            Ok(rs) => {
                for (r, _) in rs {
                    if !points.contains(&r) {
                        points.push(r);
                    }
                }
            }
            Err(Error::SplitFailure { .. }) => split = false,
            Err(e) => return Err(e),
        }
    }
    points.sort_by(lc_order);
    Ok(GenericSpectrum { char_poly, eigen, certificates: distinct, exceptional: split.then_some(points) })
}

/// Display helper: `c*b^2` for an eigenvalue `F`-part.
pub fn render_eigenvalue(value: &LCNumber) -> String {
    SElem::homogeneous(value.clone(), 2).to_string()
}

/// Renders the valuation-based radius `2^(-v)`.
pub fn render_radius(v: &Rational) -> String {
    if v.is_zero() {
        "1".into()
    } else if v.is_one() {
        "1/2".into()
    } else {
        format!("2^(-{})", fmt_rational(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames;
    use crate::quantum_model::{build_kappa_cubic, CUBIC_AMBIENT};
    use crate::scalar::rat;

    fn cubic_ev(field: &Arc<NumberField>) -> (crate::quantum_model::CohomologyFrame, EvaluationMap) {
        let cubic = frames::cubic_fourfold().unwrap();
        let ev = EvaluationMap::new(
            cubic.signature(),
            field,
            None,
            vec![LCNumber::a_pow(field, rint(3))],
            vec![LCNumber::zero(field); 5],
        )
        .unwrap();
        (cubic, ev)
    }

    #[test]
    fn cubic_ambient_spectrum() {
        let k = NumberField::eisenstein();
        let (cubic, ev) = cubic_ev(&k);
        let kappa = build_kappa_cubic(&cubic).unwrap().block(&CUBIC_AMBIENT);
        let a = BMatrix::from_kappa(&kappa, &ev).unwrap();
        assert_eq!(char_poly(&a).unwrap().render("X"), "X^5 - 729*a^3*X^2");
        let report = spectrum(&a, &k, &[]).unwrap();
        let summary = report.summary();
        assert_eq!(
            summary,
            vec![
                ("0".to_string(), 2),
                ("9*a*b^2".to_string(), 1),
                ("(-9 - 9*w)*a*b^2".to_string(), 1),
                ("9*w*a*b^2".to_string(), 1),
            ]
        );
        let zero = &report.eigen[0];
        assert_eq!((zero.geometric, zero.index), (1, 2));
    }

    #[test]
    fn cubic_over_rationals_does_not_split() {
        let k = NumberField::rationals();
        let (cubic, ev) = cubic_ev(&k);
        let kappa = build_kappa_cubic(&cubic).unwrap().block(&CUBIC_AMBIENT);
        let a = BMatrix::from_kappa(&kappa, &ev).unwrap();
        match spectrum(&a, &k, &[]) {
            Err(Error::SplitFailure { degree, residual }) => {
                assert_eq!(degree, 2);
                assert_eq!(residual, "X^2 + 9*a*X + 81*a^2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nilpotent_plus_scalar() {
        let k = NumberField::rationals();
        let f0 = LCNumber::from_terms(&k, vec![(rint(1), NFElem::one(&k)), (rat(5, 2), NFElem::from_int(&k, -3))], None)
            .unwrap();
        let z = LCNumber::zero(&k);
        let mut m = Matrix::identity(3, &z).scale(&f0);
        m.set(1, 0, LCNumber::a(&k));
        m.set(2, 1, LCNumber::one(&k));
        let a = BMatrix::new(m, vec![0, 2, 4]).unwrap();
        let report = spectrum(&a, &k, &[]).unwrap();
        assert_eq!(report.eigen.len(), 1);
        assert_eq!(report.eigen[0].value, f0);
        assert_eq!(report.eigen[0].kernel_dims, vec![1, 2, 3]);
    }

    #[test]
    fn squarefree_examples() {
        let k = NumberField::rationals();
        let q = LCNumber::a_pow(&k, rint(3));
        let lc = |x: i64| LCNumber::from_rational(&k, rint(x));
        let z = lc(0);
        // X^2 (X^3 - 729 Q)
        let p = Poly::new(vec![z.clone(), z.clone(), q.scale_rational(&rint(-729)), z.clone(), z.clone(), lc(1)], z.clone());
        let s = squarefree_and_resultants(&p).unwrap();
        let monic = s.part.scale(&s.part.leading().inv().unwrap());
        assert_eq!(monic.render("X"), "X^4 - 729*a^3*X");
        assert!(!s.certificate.try_is_zero().unwrap());
        let t = Poly::x(&Rational::zero());
        let xp = Poly::new(vec![t.negated(), Poly::constant(rint(1))], Poly::zero(&Rational::zero()));
        let xm = Poly::new(vec![t.clone(), Poly::constant(rint(1))], Poly::zero(&Rational::zero()));
        assert_eq!(resultant(&xp, &xm).unwrap().render("t"), "2*t");
    }

    fn bivariate(rows: &[&[i64]]) -> Poly<Poly<Rational>> {
        let z = Rational::zero();
        Poly::new(
            rows.iter().map(|r| Poly::new(r.iter().map(|&x| rint(x)).collect(), z.clone())).collect(),
            Poly::zero(&z),
        )
    }

    #[test]
    fn lift_square_root() {
        // X^2 - (1 + t)
        let p = bivariate(&[&[-1, -1], &[], &[1]]);
        let root = lift_root(&p, &rint(0), &rint(1), 20).unwrap();
        assert_eq!(root.coeffs[..4], [rint(1), rat(1, 2), rat(-1, 8), rat(1, 16)]);
        assert!(root.residual_valuation.unwrap() > 20);
        assert_eq!(&root.c10 + &root.c01 * &root.coeffs[1], rint(0));
        assert!(matches!(lift_root(&p, &rint(0), &rint(2), 5), Err(Error::NotARoot(_))));
        let double = bivariate(&[&[0, 1], &[], &[1]]);
        assert!(matches!(lift_root(&double, &rint(0), &rint(0), 5), Err(Error::NotASimpleRoot)));
    }

    #[test]
    fn generic_rank_drop() {
        let k = NumberField::rationals();
        let z = LCNumber::zero(&k);
        let t = Poly::x(&z);
        let a = Matrix::from_rows(vec![vec![t]], &Poly::zero(&z)).unwrap();
        let g = generic_invariants(&a, &[], &[]).unwrap();
        assert_eq!(g.eigen.len(), 1);
        assert_eq!(g.eigen[0].describe(), "t");
        assert!(g.exceptional_only_at_origin());
    }
}

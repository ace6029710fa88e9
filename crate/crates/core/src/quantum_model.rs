//! Cohomology frames, Gromov-Witten correlator tables and the quantum
//! multiplication endomorphism `kappa = Eu_tau * _tau`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graded_ring::{CurveCone, GradedSeries, Monomial, RingSignature};
use crate::matrix::Matrix;
use crate::number_field::{NFElem, NumberField};
use crate::scalar::{rint, Rational, Ring};

/// A `(p, q)` piece of the Hodge decomposition, spanned by vectors over `K`
/// in basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgePiece {
    pub p: i64,
    pub q: i64,
    pub span: Vec<Vec<NFElem>>,
}

/// Input data for [`CohomologyFrame::new`].
#[derive(Clone, Debug)]
pub struct FrameData {
    pub name: String,
    pub field: Arc<NumberField>,
    pub labels: Vec<String>,
    pub degrees: Vec<i64>,
    pub pairing: Matrix<Rational>,
    pub pieces: Vec<HodgePiece>,
    pub hodge_subbasis: Vec<usize>,
    pub c1: Vec<Rational>,
    pub dim_c: usize,
    pub cone: CurveCone,
    pub nef_canonical: bool,
    /// Map `H^1 -> H^3` in the nef-surface normal form (rows: degree-3
    /// classes, columns: degree-1 classes).
    pub odd_block: Option<Matrix<NFElem>>,
}

/// Linear data of a smooth projective variety.
#[derive(Clone, Debug)]
pub struct CohomologyFrame {
    data: FrameData,
    dual: Matrix<Rational>,
    signature: Arc<RingSignature>,
}

/// Subspaces entering the invariant tuple, as spanning vectors over `K`.
#[derive(Clone, Debug, Default)]
pub struct Subspaces {
    pub hodge: Vec<Vec<NFElem>>,
    pub hochschild2: Vec<Vec<NFElem>>,
    pub hochschild1: Vec<Vec<NFElem>>,
}

impl CohomologyFrame {
    pub fn new(data: FrameData) -> Result<Self> {
        let n = data.labels.len();
        let bad = |msg: String| Err(Error::InvalidFrame(format!("{}: {msg}", data.name)));
        if n == 0 || data.degrees.len() != n || data.c1.len() != n {
            return bad("basis, degrees and c1 must have equal non-zero length".into());
        }
        if data.pairing.rows() != n || data.pairing.cols() != n {
            return bad("pairing must be square of basis size".into());
        }
        if data.degrees[0] != 0 {
            return bad("the first basis vector must be the unit".into());
        }
        let top = 2 * data.dim_c as i64;
        for i in 0..n {
            if data.degrees[i] < 0 || data.degrees[i] > top {
                return bad(format!("degree {} of `{}` out of range", data.degrees[i], data.labels[i]));
            }
            for k in 0..n {
                if !data.pairing.get(i, k).is_zero() && data.degrees[i] + data.degrees[k] != top {
                    return bad(format!("`{}` pairs with `{}` outside complementary degrees", data.labels[i], data.labels[k]));
                }
            }
            if !data.c1[i].is_zero() && data.degrees[i] != 2 {
                return bad("c1 must be supported on degree-2 classes".into());
            }
        }
        let dual = data.pairing.inverse().map_err(|_| Error::InvalidFrame(format!("{}: pairing is degenerate", data.name)))?;
        if data.hodge_subbasis.first() != Some(&0) {
            return bad("Hodge subbasis must start with the unit".into());
        }
        for &k in &data.hodge_subbasis {
            if k >= n || data.degrees[k] % 2 != 0 {
                return bad("Hodge subbasis members must be even-degree basis classes".into());
            }
        }
        let mut total = 0;
        let mut dims: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut all: Vec<Vec<NFElem>> = Vec::new();
        for piece in &data.pieces {
            for v in &piece.span {
                if v.len() != n {
                    return bad("Hodge span vector of wrong length".into());
                }
                for (i, x) in v.iter().enumerate() {
                    if !x.is_zero() && data.degrees[i] != piece.p + piece.q {
                        return bad(format!("({},{}) vector touches `{}` of degree {}", piece.p, piece.q, data.labels[i], data.degrees[i]));
                    }
                }
                all.push(v.iter().map(|x| x.coerce_into(&data.field)).collect::<Result<_>>()?);
            }
            total += piece.span.len();
            *dims.entry((piece.p, piece.q)).or_default() += piece.span.len();
        }
        if total != n {
            return bad(format!("Hodge pieces have total dimension {total}, basis has {n}"));
        }
        for (&(p, q), &d) in &dims {
            if dims.get(&(q, p)).copied().unwrap_or(0) != d {
                return bad(format!("h^{{{p},{q}}} differs from h^{{{q},{p}}}"));
            }
        }
        let span = Matrix::from_columns(&all, n, &NFElem::zero(&data.field));
        if span.rank()? != n {
            return bad("Hodge pieces do not span the cohomology".into());
        }
        let t_degrees = data.hodge_subbasis.iter().map(|&k| 2 - data.degrees[k]).collect();
        let signature = RingSignature::new(data.cone.clone(), t_degrees, None);
        Ok(CohomologyFrame { data, dual, signature })
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn data(&self) -> &FrameData {
        &self.data
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.data.field
    }

    pub fn dim(&self) -> usize {
        self.data.labels.len()
    }

    pub fn dim_c(&self) -> usize {
        self.data.dim_c
    }

    pub fn labels(&self) -> &[String] {
        &self.data.labels
    }

    pub fn degrees(&self) -> &[i64] {
        &self.data.degrees
    }

    pub fn pairing(&self) -> &Matrix<Rational> {
        &self.data.pairing
    }

    /// `G^{-1}`: column `k` holds the coordinates of the dual class `phi^k`.
    pub fn dual_basis(&self) -> &Matrix<Rational> {
        &self.dual
    }

    pub fn pieces(&self) -> &[HodgePiece] {
        &self.data.pieces
    }

    pub fn hodge_subbasis(&self) -> &[usize] {
        &self.data.hodge_subbasis
    }

    pub fn c1(&self) -> &[Rational] {
        &self.data.c1
    }

    pub fn cone(&self) -> &CurveCone {
        &self.data.cone
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.signature
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.data.labels.iter().position(|l| l == label)
    }

    /// Basis indices of a given degree.
    pub fn indices_of_degree(&self, d: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.data.degrees[i] == d).collect()
    }

    pub fn hodge_number(&self, p: i64, q: i64) -> usize {
        self.data.pieces.iter().filter(|x| x.p == p && x.q == q).map(|x| x.span.len()).sum()
    }

    /// Sum of the pieces with `p - q = k`.
    pub fn hochschild(&self, k: i64) -> Vec<Vec<NFElem>> {
        self.data.pieces.iter().filter(|x| x.p - x.q == k).flat_map(|x| x.span.iter().cloned()).collect()
    }

    /// Coordinate vectors of the Hodge subbasis.
    pub fn hodge_classes(&self) -> Vec<Vec<NFElem>> {
        let k = &self.data.field;
        self.data
            .hodge_subbasis
            .iter()
            .map(|&i| (0..self.dim()).map(|j| NFElem::from_int(k, (i == j) as i64)).collect())
            .collect()
    }

    pub fn subspaces(&self) -> Subspaces {
        Subspaces { hodge: self.hodge_classes(), hochschild2: self.hochschild(2), hochschild1: self.hochschild(1) }
    }
}

/// Genus-zero invariants `<gamma_1, ..., gamma_n>_{0,n,beta}` with
/// insertions given as basis indices.
#[derive(Clone, Debug, Default)]
pub struct CorrelatorTable {
    entries: BTreeMap<(Vec<usize>, Vec<u32>), Rational>,
    /// Admissible entries missing from the table vanish.
    pub absent_is_zero: bool,
    /// Curve classes of area up to this bound are covered; `None` means the
    /// listed classes are the only non-zero ones.
    pub coverage: Option<Rational>,
}

impl CorrelatorTable {
    pub fn new(absent_is_zero: bool, coverage: Option<Rational>) -> Self {
        CorrelatorTable { entries: BTreeMap::new(), absent_is_zero, coverage }
    }

    pub fn insert(&mut self, mut insertions: Vec<usize>, curve: Vec<u32>, value: Rational) {
        insertions.sort_unstable();
        self.entries.insert((insertions, curve), value);
    }

    pub fn get(&self, insertions: &[usize], curve: &[u32]) -> Option<&Rational> {
        let mut key = insertions.to_vec();
        key.sort_unstable();
        self.entries.get(&(key, curve.to_vec()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<usize>, Vec<u32>), &Rational)> {
        self.entries.iter()
    }

    fn curves(&self, cone_len: usize) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = vec![vec![0; cone_len]];
        for (_, c) in self.entries.keys() {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }

    /// Correlator after the dimension, string and divisor equations.
    pub fn correlator(&self, frame: &CohomologyFrame, insertions: &[usize], curve: &[u32]) -> Result<Rational> {
        let n = insertions.len() as i64;
        let deg: i64 = insertions.iter().map(|&i| frame.degrees()[i]).sum();
        let c1 = frame.cone().c1_of(curve);
        if deg != 2 * (frame.dim_c() as i64 - 3 + n + c1) {
            return Ok(Rational::zero());
        }
        let zero_curve = curve.iter().all(|x| *x == 0);
        if zero_curve && n > 3 {
            return Ok(Rational::zero());
        }
        if let Some(pos) = insertions.iter().position(|&i| i == 0) {
            if zero_curve && n == 3 {
                let rest: Vec<usize> = insertions.iter().enumerate().filter(|(j, _)| *j != pos).map(|(_, &i)| i).collect();
                return Ok(frame.pairing().get(rest[0], rest[1]).clone());
            }
            return Ok(Rational::zero());
        }
        if let Some(v) = self.get(insertions, curve) {
            return Ok(v.clone());
        }
        if !zero_curve && n >= 3 && !frame.cone().divisor_pairing().is_empty() {
            if let Some(pos) = insertions.iter().position(|&i| frame.degrees()[i] == 2) {
                let rest: Vec<usize> = insertions.iter().enumerate().filter(|(j, _)| *j != pos).map(|(_, &i)| i).collect();
                let factor = frame.cone().integrate_divisor(curve, insertions[pos])?;
                if factor.is_zero() {
                    return Ok(Rational::zero());
                }
                return Ok(factor * self.correlator(frame, &rest, curve)?);
            }
        }
        if self.absent_is_zero {
            return Ok(Rational::zero());
        }
        let labels: Vec<&str> = insertions.iter().map(|&i| frame.labels()[i].as_str()).collect();
        Err(Error::MissingCorrelator(format!("<{}> at curve {:?}", labels.join(", "), curve)))
    }
}

/// `tau = sum_k f_k alpha_k` over the Hodge subbasis.  Coefficients on
/// divisor classes must be constants; their exponentials per curve
/// generator are supplied separately.
#[derive(Clone, Debug)]
pub struct Tau {
    pub coeffs: Vec<GradedSeries>,
    pub exponentials: BTreeMap<usize, NFElem>,
}

impl Tau {
    pub fn zero(frame: &CohomologyFrame) -> Self {
        let z = GradedSeries::zero(frame.signature(), frame.field());
        Tau { coeffs: vec![z; frame.hodge_subbasis().len()], exponentials: BTreeMap::new() }
    }

    /// `T_k` on every non-divisor class of the Hodge subbasis.
    pub fn formal(frame: &CohomologyFrame) -> Self {
        let sig = frame.signature();
        let coeffs = frame
            .hodge_subbasis()
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                if frame.degrees()[i] == 2 {
                    GradedSeries::zero(sig, frame.field())
                } else {
                    GradedSeries::t_variable(sig, frame.field(), k)
                }
            })
            .collect();
        Tau { coeffs, exponentials: BTreeMap::new() }
    }

    fn check(&self, frame: &CohomologyFrame) -> Result<()> {
        if self.coeffs.len() != frame.hodge_subbasis().len() {
            return Err(Error::Shape("one tau coefficient per Hodge class".into()));
        }
        for (k, f) in self.coeffs.iter().enumerate() {
            let deg_alpha = frame.degrees()[frame.hodge_subbasis()[k]];
            if let Some(d) = f.homogeneous_degree()? {
                if d != 2 - deg_alpha {
                    return Err(Error::DegreeMismatch { expected: (2 - deg_alpha).to_string(), found: d.to_string() });
                }
            }
        }
        Ok(())
    }
}

/// `Eu_tau = c_1 + sum_k (1 - deg(alpha_k)/2) f_k alpha_k` in basis
/// coordinates.
pub fn euler_field(frame: &CohomologyFrame, tau: &Tau) -> Result<Vec<GradedSeries>> {
    tau.check(frame)?;
    let sig = frame.signature();
    let k = frame.field();
    let mut out: Vec<GradedSeries> =
        frame.c1().iter().map(|c| GradedSeries::from_rational(sig, k, c.clone())).collect();
    for (idx, f) in tau.coeffs.iter().enumerate() {
        let i = frame.hodge_subbasis()[idx];
        let w = Rational::one() - Rational::new(frame.degrees()[i].into(), 2.into());
        if w.is_zero() {
            continue;
        }
        out[i] = out[i].try_add(&f.scale(&NFElem::from_rational(k, w)))?;
    }
    Ok(out)
}

/// `kappa` as a matrix over graded series, columns are images of basis
/// vectors.
#[derive(Clone, Debug)]
pub struct Kappa {
    pub matrix: Matrix<GradedSeries>,
    pub degrees: Vec<i64>,
}

impl Kappa {
    /// Degree every entry `(row, col)` must have.
    pub fn expected_degree(&self, row: usize, col: usize) -> i64 {
        self.degrees[col] + 2 - self.degrees[row]
    }

    pub fn block(&self, idx: &[usize]) -> Kappa {
        Kappa { matrix: self.matrix.principal(idx), degrees: idx.iter().map(|&i| self.degrees[i]).collect() }
    }

    /// `kappa + T_0 * identity`: the unit parameter added through the string
    /// equation, for matrices built at `tau = 0`.
    pub fn with_unit_parameter(&self, frame: &CohomologyFrame) -> Result<Kappa> {
        let t0 = GradedSeries::t_variable(frame.signature(), frame.field(), 0);
        self.minus_scalar(&t0.negated())
    }

    /// `kappa - f_0 * identity`.
    pub fn minus_scalar(&self, f0: &GradedSeries) -> Result<Kappa> {
        Ok(Kappa { matrix: self.matrix.minus_scalar(f0)?, degrees: self.degrees.clone() })
    }
}

/// Multisets over `slots` (indices into the Hodge subbasis with their
/// excess `deg - 2`) with total excess exactly `budget`.
fn multisets(slots: &[(usize, i64)], budget: i64) -> Vec<Vec<(usize, u32)>> {
    fn go(slots: &[(usize, i64)], budget: i64, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Vec<(usize, u32)>>) {
        if budget == 0 {
            out.push(cur.clone());
            return;
        }
        let Some((&(k, e), rest)) = slots.split_first() else { return };
        let mut m = 0u32;
        while m as i64 * e <= budget {
            if m > 0 {
                cur.push((k, m));
            }
            go(rest, budget - m as i64 * e, cur, out);
            if m > 0 {
                cur.pop();
            }
            m += 1;
        }
    }
    let mut out = Vec::new();
    if budget >= 0 {
        go(slots, budget, &mut Vec::new(), &mut out);
    }
    out
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * rint(k as i64))
}

/// Generic builder from a correlator table:
/// `kappa(phi_j) = sum <Eu, phi_j, phi_k, tau, ..., tau>_beta Q^beta / n! phi^k`.
pub fn build_kappa_generic(frame: &CohomologyFrame, table: &CorrelatorTable, tau: &Tau) -> Result<Kappa> {
    let sig = frame.signature();
    let field = frame.field();
    let n = frame.dim();
    let eu = euler_field(frame, tau)?;
    let cone = frame.cone();
    // divisor parts of tau become exponential factors on Q^beta
    let mut divisor_constants: Vec<(usize, NFElem)> = Vec::new();
    let mut slots: Vec<(usize, i64)> = Vec::new();
    for (k, f) in tau.coeffs.iter().enumerate() {
        let i = frame.hodge_subbasis()[k];
        let d = frame.degrees()[i];
        if f.is_exact_zero() || d == 0 {
            continue;
        }
        if d == 2 {
            if f.terms().keys().any(|m| !m.is_one()) || f.trunc().is_some() {
                return Err(Error::DegreeMismatch { expected: "a constant on a divisor class".into(), found: f.to_string() });
            }
            divisor_constants.push((i, f.constant_term()));
            continue;
        }
        slots.push((k, d - 2));
    }
    let curves = match &table.coverage {
        Some(area) if !cone.is_empty() => cone.enumerate(area),
        _ => table.curves(cone.len()),
    };
    let trunc = match &table.coverage {
        Some(area) if !cone.is_empty() => {
            let max_omega = cone.omega().iter().max().cloned().unwrap_or_else(Rational::one);
            cone.enumerate(&(area + &max_omega)).iter().map(|c| cone.omega_of(c)).filter(|w| w > area).min()
        }
        _ => None,
    };
    let exponential = |curve: &[u32]| -> Result<NFElem> {
        let mut acc = NFElem::one(field);
        if divisor_constants.iter().all(|(_, c)| c.is_zero()) || curve.iter().all(|x| *x == 0) {
            return Ok(acc);
        }
        for (g, m) in curve.iter().enumerate() {
            if *m == 0 {
                continue;
            }
            let e = tau.exponentials.get(&g).ok_or_else(|| Error::MissingExponential(cone.labels()[g].clone()))?;
            acc = acc.times(&e.coerce_into(field)?.pow_u(*m as u64));
        }
        Ok(acc)
    };
    let zero = GradedSeries::zero(sig, field);
    let mut pairing_c = Matrix::zeros(n, n, &zero);
    for curve in &curves {
        let mut qpow = Monomial::one(sig);
        qpow.curve = curve.clone();
        let exp = exponential(curve)?;
        let c1 = cone.c1_of(curve);
        for (i, e_i) in eu.iter().enumerate() {
            if e_i.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    let budget = 2 * frame.dim_c() as i64 + 2 * c1
                        - frame.degrees()[i]
                        - frame.degrees()[j]
                        - frame.degrees()[k];
                    for ms in multisets(&slots, budget) {
                        let mut ins = vec![i, j, k];
                        let mut weight = Rational::one();
                        let mut coeff = GradedSeries::term(sig, qpow.clone(), exp.clone())?;
                        for &(slot, m) in &ms {
                            ins.extend(std::iter::repeat_n(frame.hodge_subbasis()[slot], m as usize));
                            weight /= factorial(m);
                            coeff = coeff.try_mul(&tau.coeffs[slot].pow_u(m as u64))?;
                        }
                        let v = table.correlator(frame, &ins, curve)? * weight;
                        if v.is_zero() {
                            continue;
                        }
                        let add = e_i.try_mul(&coeff)?.scale(&NFElem::from_rational(field, v));
                        let cur = pairing_c.get(j, k).try_add(&add)?;
                        pairing_c.set(j, k, cur);
                    }
                }
            }
        }
    }
    // kappa[l][j] = sum_k dual[l][k] C[j][k]
    let dual = frame.dual_basis();
    let mut m = Matrix::zeros(n, n, &zero);
    for l in 0..n {
        for j in 0..n {
            let mut acc = zero.clone();
            for k in 0..n {
                let x = dual.get(l, k);
                if x.is_zero() {
                    continue;
                }
                acc = acc.try_add(&pairing_c.get(j, k).scale(&NFElem::from_rational(field, x.clone())))?;
            }
            if let Some(t) = &trunc {
                acc = acc.truncate(t);
            }
            m.set(l, j, acc);
        }
    }
    Ok(Kappa { matrix: m, degrees: frame.degrees().to_vec() })
}

/// Parameters of the nef-surface normal form.
#[derive(Clone, Debug)]
pub struct NefParameters {
    /// Coefficient of the unit in `tau` (degree 2).
    pub f0: GradedSeries,
    /// Coefficient of the point class in `tau` (degree -2).
    pub f_point: GradedSeries,
    /// Optional override of the frame's odd block.
    pub odd_block: Option<Matrix<NFElem>>,
}

/// `kappa = f_0 I + N` for a surface with nef canonical class:
/// `N(1) = c_1 - f_pt [pt]`, `N(H^1) = U`, `N(phi) = (int c_1 phi)[pt]` on
/// `H^2`, and `N` kills `H^3` and the point.
pub fn build_kappa_nef_surface(frame: &CohomologyFrame, params: &NefParameters) -> Result<Kappa> {
    if frame.dim_c() != 2 {
        return Err(Error::NotASurface);
    }
    if !frame.data().nef_canonical || frame.cone().c1_pairing().iter().any(|c| *c > 0) {
        return Err(Error::NotNef);
    }
    let sig = frame.signature();
    let field = frame.field();
    for (f, d) in [(&params.f0, 2), (&params.f_point, -2)] {
        if let Some(e) = f.homogeneous_degree()? {
            if e != d {
                return Err(Error::DegreeMismatch { expected: d.to_string(), found: e.to_string() });
            }
        }
    }
    let n = frame.dim();
    let points = frame.indices_of_degree(4);
    let [pt] = points[..] else {
        return Err(Error::InvalidFrame("a surface frame needs exactly one point class".into()));
    };
    let zero = GradedSeries::zero(sig, field);
    let constant = |q: &Rational| GradedSeries::from_rational(sig, field, q.clone());
    let mut m = Matrix::zeros(n, n, &zero);
    for (i, c) in frame.c1().iter().enumerate() {
        if !c.is_zero() {
            m.set(i, 0, constant(c));
        }
    }
    m.set(pt, 0, m.get(pt, 0).try_add(&params.f_point.negated())?);
    for j in frame.indices_of_degree(2) {
        let v = (0..n).fold(Rational::zero(), |acc, i| acc + &frame.c1()[i] * frame.pairing().get(i, j));
        if !v.is_zero() {
            m.set(pt, j, constant(&v));
        }
    }
    let h1 = frame.indices_of_degree(1);
    let h3 = frame.indices_of_degree(3);
    if let Some(u) = params.odd_block.as_ref().or(frame.data().odd_block.as_ref()) {
        if u.rows() != h3.len() || u.cols() != h1.len() {
            return Err(Error::Shape("odd block must map H^1 to H^3".into()));
        }
        for (a, &row) in h3.iter().enumerate() {
            for (b, &col) in h1.iter().enumerate() {
                let x = u.get(a, b);
                if !x.is_zero() {
                    m.set(row, col, GradedSeries::constant(sig, x.coerce_into(field)?));
                }
            }
        }
    }
    let kappa = m.plus(&Matrix::identity(n, &zero).scale(&params.f0))?;
    Ok(Kappa { matrix: kappa, degrees: frame.degrees().to_vec() })
}

/// Ambient-block indices `1, H, H^2, H^3, H^4` of the cubic fourfold frame.
pub const CUBIC_AMBIENT: [usize; 5] = [0, 1, 2, 3, 4];

/// `kappa` at `tau = 0` for the cubic fourfold: the displayed ambient
/// matrix on `(1, H, H^2, H^3, H^4)` and zero on primitive classes.
pub fn build_kappa_cubic(frame: &CohomologyFrame) -> Result<Kappa> {
    let degs = frame.degrees();
    if frame.dim_c() != 4 || degs.len() < 5 || degs[..5] != [0, 2, 4, 6, 8] || frame.cone().len() != 1 {
        return Err(Error::InvalidFrame("not a cubic fourfold frame".into()));
    }
    let sig = frame.signature();
    let field = frame.field();
    let q = GradedSeries::curve_generator(sig, field, 0);
    let zero = GradedSeries::zero(sig, field);
    let c = |x: i64| GradedSeries::from_rational(sig, field, rint(x));
    let cq = |x: i64| q.scale(&NFElem::from_int(field, x));
    let mut m = Matrix::zeros(frame.dim(), frame.dim(), &zero);
    m.set(1, 0, c(3));
    m.set(2, 1, c(3));
    m.set(0, 2, cq(18));
    m.set(3, 2, c(3));
    m.set(1, 3, cq(45));
    m.set(4, 3, c(3));
    m.set(2, 4, cq(18));
    Ok(Kappa { matrix: m, degrees: degs.to_vec() })
}

/// One failed compatibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeViolation {
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct HodgeReport {
    pub violations: Vec<HodgeViolation>,
}

impl HodgeReport {
    pub fn is_compatible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks degree-2 homogeneity, the type shift `(p, q) -> (p+1, q+1)` for
/// each Novikov coefficient (a coefficient of degree `2m` shifts by `-m`),
/// and stability of the span of Hodge classes.
pub fn verify_hodge_compatibility(frame: &CohomologyFrame, kappa: &Kappa) -> Result<HodgeReport> {
    let n = frame.dim();
    let field = frame.field();
    let mut report = HodgeReport::default();
    let mut layers: BTreeMap<Monomial, Matrix<NFElem>> = BTreeMap::new();
    let kz = NFElem::zero(field);
    for row in 0..n {
        for col in 0..n {
            let x = kappa.matrix.get(row, col);
            for (m, c) in x.terms() {
                let d = x.signature().degree(m);
                if d != kappa.expected_degree(row, col) {
                    report.violations.push(HodgeViolation {
                        row: Some(row),
                        col: Some(col),
                        detail: format!("coefficient of degree {d}, expected {}", kappa.expected_degree(row, col)),
                    });
                }
                let layer = layers.entry(m.clone()).or_insert_with(|| Matrix::zeros(n, n, &kz));
                layer.set(row, col, c.coerce_into(field)?);
            }
        }
    }
    let hodge: Vec<usize> = frame.hodge_subbasis().to_vec();
    // coordinates in the Hodge-adapted basis
    let mut adapted: Vec<Vec<NFElem>> = Vec::new();
    let mut types: Vec<(i64, i64)> = Vec::new();
    for piece in frame.pieces() {
        for v in &piece.span {
            adapted.push(v.iter().map(|x| x.coerce_into(field)).collect::<Result<_>>()?);
            types.push((piece.p, piece.q));
        }
    }
    let to_adapted = if layers.is_empty() { None } else { Some(Matrix::from_columns(&adapted, n, &kz).inverse()?) };
    for (m, layer) in &layers {
        let d = frame.signature().degree(m);
        let to_adapted = to_adapted.as_ref().expect("non-empty layers");
        for (idx, v) in adapted.iter().enumerate() {
            let (p, q) = types[idx];
            let (tp, tq) = (p + 1 - d / 2, q + 1 - d / 2);
            let image = to_adapted.apply(&layer.apply(v)?)?;
            let escapes = image.iter().zip(&types).any(|(y, t)| !y.is_zero() && (d % 2 != 0 || *t != (tp, tq)));
            if escapes {
                report.violations.push(HodgeViolation {
                    row: None,
                    col: None,
                    detail: format!(
                        "coefficient {} maps an ({p},{q}) vector outside ({tp},{tq})",
                        GradedSeries::term(frame.signature(), m.clone(), NFElem::one(field))?,
                    ),
                });
            }
        }
        for &col in &hodge {
            for row in 0..n {
                if !hodge.contains(&row) && !layer.get(row, col).is_zero() {
                    report.violations.push(HodgeViolation {
                        row: Some(row),
                        col: Some(col),
                        detail: format!("Hodge class `{}` leaves the Hodge span", frame.labels()[col]),
                    });
                }
            }
        }
    }
    Ok(report)
}

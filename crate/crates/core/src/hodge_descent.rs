//! Span decomposition of maps over a number field, the block-structure
//! check for maps into a cubic fourfold, and descent of an invertible map
//! over `F_K` to an invertible rational matrix.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levi_civita::{LCNumber, SElem};
use crate::matrix::Matrix;
use crate::number_field::{NFElem, NumberField};
use crate::scalar::{fmt_rational, lcm_denominators, rationals_of_height, Rational, Ring};

/// `f = s_1 f_1 + ... + s_N f_N` with each `f_k` rational.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanMap {
    pub field: Arc<NumberField>,
    pub components: Vec<Matrix<SElem>>,
    /// Deligne twist between source and target.
    pub twist: i64,
}

fn split_lc(x: &LCNumber, n: usize) -> Result<Vec<LCNumber>> {
    let field = x.field();
    let mut parts: Vec<Vec<(Rational, NFElem)>> = vec![Vec::new(); n];
    for (e, c) in x.terms() {
        for (k, q) in c.span_decompose().into_iter().enumerate() {
            if !q.is_zero() {
                parts[k].push((e.clone(), NFElem::from_rational(field, q)));
            }
        }
    }
    parts.into_iter().map(|terms| LCNumber::from_terms(field, terms, x.trunc().cloned())).collect()
}

/// Entrywise split along the declared `Q`-basis of the coefficient field.
pub fn decompose_span(f: &Matrix<SElem>, field: &Arc<NumberField>, twist: i64) -> Result<SpanMap> {
    let n = field.degree();
    let zero = SElem::zero(field);
    let mut components = vec![Matrix::zeros(f.rows(), f.cols(), &zero); n];
    for i in 0..f.rows() {
        for j in 0..f.cols() {
            let x = f.get(i, j);
            if !crate::number_field::same_field(x.field(), field) {
                return Err(Error::FieldMismatch);
            }
            for (d, v) in x.components() {
                for (k, part) in split_lc(v, n)?.into_iter().enumerate() {
                    let cur = components[k].get(i, j).clone();
                    components[k].set(i, j, cur.try_add(&SElem::homogeneous(part, *d))?);
                }
            }
        }
    }
    Ok(SpanMap { field: field.clone(), components, twist })
}

impl SpanMap {
    /// The basis element `s_k` as a scalar.
    pub fn basis_element(&self, k: usize) -> Result<SElem> {
        let mut e = vec![Rational::zero(); self.field.degree()];
        e[k] = Rational::one();
        Ok(SElem::homogeneous(LCNumber::constant(NFElem::span_recompose(&self.field, &e)?), 0))
    }

    pub fn recompose(&self) -> Result<Matrix<SElem>> {
        let mut acc = self.components[0].scale(&self.basis_element(0)?);
        for k in 1..self.components.len() {
            acc = acc.plus(&self.components[k].scale(&self.basis_element(k)?))?;
        }
        Ok(acc)
    }

    /// Every entry of every component has rational coefficients.
    pub fn components_rational(&self) -> bool {
        self.components.iter().all(|m| {
            (0..m.rows()).all(|i| {
                (0..m.cols()).all(|j| {
                    m.get(i, j).components().values().all(|v| v.terms().iter().all(|(_, c)| c.as_rational().is_some()))
                })
            })
        })
    }

    /// Checks that component `k` carries a class of degree `d` to degree
    /// `d + 2 twist`, i.e. entry `(i, j)` is homogeneous of degree
    /// `target_degrees[i] - source_degrees[j] - 2 twist` in `b`.
    pub fn respects_grading(&self, source_degrees: &[i64], target_degrees: &[i64]) -> Result<bool> {
        for m in &self.components {
            for (i, dt) in target_degrees.iter().enumerate() {
                for (j, ds) in source_degrees.iter().enumerate() {
                    if let Some(d) = m.get(i, j).degree()? {
                        if d != dt - ds - 2 * self.twist {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// `A f = f B` entrywise.
pub fn verify_commutation(a: &Matrix<SElem>, f: &Matrix<SElem>, b: &Matrix<SElem>) -> Result<bool> {
    a.times(f)?.minus(&f.times(b)?)?.is_zero_matrix()
}

/// One failed relation of the block-structure check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockViolation {
    pub component: usize,
    pub source: usize,
    /// `H0-H3`, `H1-H4` or `H2`.
    pub relation: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub holds: bool,
    pub violations: Vec<BlockViolation>,
}

/// Checks that each component maps into
/// `span(H^3 - 21 Q, H^4 - 6 Q H) + primitive` of the cubic frame, where
/// rows `ambient[0..5]` hold the coefficients of `1, H, ..., H^4` and `q`
/// is the image of the Novikov variable.
pub fn verify_block_structure(span: &SpanMap, ambient: [usize; 5], q: &SElem) -> Result<BlockReport> {
    let c = |n: i64| SElem::homogeneous(LCNumber::from_rational(&span.field, Rational::from_integer(n.into())), 0);
    let lock3 = q.try_mul(&c(21))?;
    let lock4 = q.try_mul(&c(6))?;
    let mut violations = Vec::new();
    for (k, m) in span.components.iter().enumerate() {
        for j in 0..m.cols() {
            let z = |r: usize| m.get(ambient[r], j).clone();
            let checks = [
                ("H0-H3", z(0).try_add(&lock3.try_mul(&z(3))?)?),
                ("H1-H4", z(1).try_add(&lock4.try_mul(&z(4))?)?),
                ("H2", z(2)),
            ];
            for (name, residual) in checks {
                if !residual.try_is_zero()? {
                    violations.push(BlockViolation {
                        component: k,
                        source: j,
                        relation: name.into(),
                        residual: residual.to_string(),
                    });
                }
            }
        }
    }
    Ok(BlockReport { holds: violations.is_empty(), violations })
}

/// Checks that `m` is block upper triangular with respect to `split` and
/// that its determinant factors through the diagonal blocks.
pub fn block_triangular_det(m: &Matrix<LCNumber>, split: usize) -> Result<(bool, LCNumber, LCNumber)> {
    let n = m.rows();
    let head: Vec<usize> = (0..split).collect();
    let tail: Vec<usize> = (split..n).collect();
    for i in split..n {
        for j in 0..split {
            if !m.get(i, j).try_is_zero()? {
                return Ok((false, LCNumber::zero(m.proto().field()), LCNumber::zero(m.proto().field())));
            }
        }
    }
    let a = m.principal(&head).det_division_free()?;
    let d = m.principal(&tail).det_division_free()?;
    let full = m.det_division_free()?;
    Ok((full == a.times(&d), a, d))
}

/// `B'_k = sum_l B'_{k,l} a^l` with `a^L A'_k = B'_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffDecomposition {
    pub field: Arc<NumberField>,
    pub scaling: Rational,
    /// The exponent set, sorted and positive.
    pub exponents: Vec<Rational>,
    /// `layers[k][l]`: the rational matrix `B'_{k,l}` for `exponents[l]`.
    pub layers: Vec<Vec<Matrix<Rational>>>,
}

impl CoeffDecomposition {
    pub fn new(
        field: &Arc<NumberField>,
        scaling: Rational,
        exponents: Vec<Rational>,
        layers: Vec<Vec<Matrix<Rational>>>,
    ) -> Result<Self> {
        if layers.len() != field.degree() {
            return Err(Error::Shape(format!("{} components for a field of degree {}", layers.len(), field.degree())));
        }
        if exponents.iter().any(|e| e <= &Rational::zero()) || exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Shape("exponent set must be positive and strictly increasing".into()));
        }
        let size = layers.first().and_then(|l| l.first()).map(|m| m.rows()).unwrap_or(0);
        for comp in &layers {
            if comp.len() != exponents.len() || comp.iter().any(|m| m.rows() != size || m.cols() != size) {
                return Err(Error::Shape("every component needs one square layer per exponent".into()));
            }
        }
        Ok(CoeffDecomposition { field: field.clone(), scaling, exponents, layers })
    }

    pub fn size(&self) -> usize {
        self.layers[0][0].rows()
    }

    /// `sum_k s_k B'_k` over `F_K`.
    pub fn composite(&self) -> Result<Matrix<LCNumber>> {
        let n = self.size();
        let zero = LCNumber::zero(&self.field);
        let mut out = Matrix::zeros(n, n, &zero);
        for (k, comp) in self.layers.iter().enumerate() {
            let mut e = vec![Rational::zero(); self.field.degree()];
            e[k] = Rational::one();
            let s = NFElem::span_recompose(&self.field, &e)?;
            for (l, layer) in comp.iter().enumerate() {
                let coeff = |q: &Rational| LCNumber::monomial(s.scale_rational(q), self.exponents[l].clone());
                out = out.plus(&layer.map(&zero, coeff))?;
            }
        }
        Ok(out)
    }

    /// `sum_k s_k A'_k = a^{-L} sum_k s_k B'_k`.
    pub fn scaled_composite(&self) -> Result<Matrix<LCNumber>> {
        let c = LCNumber::monomial(NFElem::one(&self.field), -self.scaling.clone());
        Ok(self.composite()?.scale(&c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentConfig {
    /// Cap on `A_M`, the common denominator of the exponents in use.
    pub max_denominator: u64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig { max_denominator: 1 << 20 }
    }
}

/// Outcome of [`rational_descent`].
#[derive(Clone, Debug, PartialEq)]
pub struct Descent {
    pub tuple: Vec<Rational>,
    pub m: u64,
    /// `A_M`.
    pub denominator: u64,
    pub matrix: Matrix<Rational>,
    pub det: Rational,
    /// Valuation of the invertibility witness for `sum_k s_k A'_k`.
    pub witness_valuation: Rational,
    /// Tuples evaluated before the first success.
    pub tried: usize,
}

/// `g' = sum_k sum_{l <= M} q_k^{A_M l} B'_{k,l}`.
fn combination(decomp: &CoeffDecomposition, tuple: &[Rational], m: &Rational, denom: u64) -> Matrix<Rational> {
    let n = decomp.size();
    let mut out = Matrix::zeros(n, n, &Rational::zero());
    for (k, comp) in decomp.layers.iter().enumerate() {
        for (l, e) in decomp.exponents.iter().enumerate() {
            if e > m {
                continue;
            }
            let p = (e * Rational::from_integer(denom.into())).to_integer().to_u64().expect("small exponent");
            let w = tuple[k].pow_u(p);
            if w.is_zero() {
                continue;
            }
            out = out.plus(&comp[l].scale(&w)).expect("square layers");
        }
    }
    out
}

/// Tuples in `Q^n` of max-height exactly `h`, lexicographic in the order
/// of [`rationals_of_height`] per coordinate.
fn tuples_of_height(n: usize, h: u64) -> Vec<Vec<Rational>> {
    let pool: Vec<(u64, Rational)> =
        (1..=h).flat_map(|k| rationals_of_height(k).into_iter().map(move |q| (k, q))).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    if n == 0 {
        return out;
    }
    loop {
        if idx.iter().any(|i| pool[*i].0 == h) {
            out.push(idx.iter().map(|i| pool[*i].1.clone()).collect());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < pool.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn count_up_to_height(h: u64) -> usize {
    (1..=h).map(|k| rationals_of_height(k).len()).sum()
}

/// Searches `M = 0, 1, ...` and height-ordered rational tuples for an
/// invertible rational combination of the layers.
pub fn rational_descent(decomp: &CoeffDecomposition, witness: &LCNumber, config: &DescentConfig) -> Result<Descent> {
    let det = decomp.scaled_composite()?.det_division_free()?;
    if det.try_is_zero()? {
        return Err(Error::NotInvertible("sum of the components has zero determinant".into()));
    }
    if &det != witness {
        return Err(Error::NotInvertible(format!("witness {witness} does not match determinant {det}")));
    }
    let witness_valuation = det.valuation()?.expect("non-zero");
    let n_vars = decomp.layers.len();
    let top = decomp.exponents.last().cloned().unwrap_or_else(Rational::zero);
    let mut tried = 0usize;
    let mut m = 0u64;
    loop {
        let mr = Rational::from_integer(m.into());
        let used: Vec<&Rational> = decomp.exponents.iter().filter(|e| *e <= &mr).collect();
        let denom = lcm_denominators(used.iter().copied());
        if denom > BigInt::from(config.max_denominator) {
            return Err(Error::DescentSaturated(denom.to_string()));
        }
        let denom = denom.to_u64().expect("bounded");
        if !used.is_empty() {
            // A non-zero polynomial of total degree `d` in each variable has
            // a non-zero value on any grid with more than `d` points.
            let max_exp = used.iter().map(|e| (*e * Rational::from_integer(denom.into())).to_integer()).max();
            let degree = max_exp.and_then(|e| e.to_usize()).unwrap_or(0) * decomp.size();
            let mut h = 1u64;
            loop {
                for t in tuples_of_height(n_vars, h) {
                    tried += 1;
                    let g = combination(decomp, &t, &mr, denom);
                    let d = g.det()?;
                    if !d.is_zero() {
                        return Ok(Descent {
                            tuple: t,
                            m,
                            denominator: denom,
                            matrix: g,
                            det: d,
                            witness_valuation,
                            tried,
                        });
                    }
                }
                if count_up_to_height(h) > degree {
                    break;
                }
                h += 1;
            }
        }
        if mr >= top {
            return Err(Error::NotInvertible(format!(
                "no rational combination is invertible up to M = {m} (witness valuation {})",
                fmt_rational(&witness_valuation)
            )));
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rint};

    fn rm(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        let rows = rows.into_iter().map(|r| r.into_iter().map(rint).collect()).collect();
        Matrix::from_rows(rows, &Rational::zero()).unwrap()
    }

    #[test]
    fn gaussian_split() {
        let k = NumberField::gaussian();
        let i = NFElem::generator(&k, "i").unwrap();
        let entry = LCNumber::one(&k).try_add(&LCNumber::monomial(i.scale_rational(&rint(2)), rint(1))).unwrap();
        let f = Matrix::from_rows(vec![vec![SElem::homogeneous(entry, 0)]], &SElem::zero(&k)).unwrap();
        let span = decompose_span(&f, &k, 0).unwrap();
        assert_eq!(span.components[0].get(0, 0).to_string(), "1");
        assert_eq!(span.components[1].get(0, 0).to_string(), "2*a");
        assert_eq!(span.recompose().unwrap(), f);
        assert!(span.components_rational());
    }

    #[test]
    fn block_locks() {
        let k = NumberField::eisenstein();
        let q = SElem::homogeneous(LCNumber::a_pow(&k, rint(3)), 6);
        let zero = SElem::zero(&k);
        let mut good = Matrix::zeros(5, 1, &zero);
        good.set(3, 0, SElem::b_power(&k, -2));
        good.set(0, 0, SElem::homogeneous(LCNumber::a_pow(&k, rint(3)).scale_rational(&rint(-21)), 4));
        let span = decompose_span(&good, &k, 0).unwrap();
        assert!(verify_block_structure(&span, [0, 1, 2, 3, 4], &q).unwrap().holds);

        let mut bad = Matrix::zeros(5, 1, &zero);
        bad.set(3, 0, SElem::b_power(&k, -2));
        let r = verify_block_structure(&decompose_span(&bad, &k, 0).unwrap(), [0, 1, 2, 3, 4], &q).unwrap();
        assert_eq!(r.violations[0].relation, "H0-H3");

        let z = Matrix::zeros(5, 2, &zero);
        assert!(verify_block_structure(&decompose_span(&z, &k, 0).unwrap(), [0, 1, 2, 3, 4], &q).unwrap().holds);
    }

    #[test]
    fn descent_examples() {
        let q = NumberField::rationals();
        let d = CoeffDecomposition::new(&q, rint(0), vec![rint(1)], vec![vec![rm(vec![vec![1, 0], vec![0, 1]])]])
            .unwrap();
        let w = d.scaled_composite().unwrap().det_division_free().unwrap();
        let out = rational_descent(&d, &w, &DescentConfig::default()).unwrap();
        assert_eq!((out.tuple.clone(), out.m), (vec![rint(1)], 1));
        assert_eq!(out.matrix, rm(vec![vec![1, 0], vec![0, 1]]));

        let k = NumberField::new(crate::number_field::FieldSpec {
            minpoly: vec![rint(-2), rint(0), rint(1)],
            var: Some("r".into()),
            ..Default::default()
        })
        .unwrap();
        let one = rm(vec![vec![1]]);
        let zero = rm(vec![vec![0]]);
        let d = CoeffDecomposition::new(
            &k,
            rint(0),
            vec![rint(1), rint(2)],
            vec![vec![one.clone(), zero.clone()], vec![zero, one]],
        )
        .unwrap();
        let w = d.scaled_composite().unwrap().det_division_free().unwrap();
        let out = rational_descent(&d, &w, &DescentConfig::default()).unwrap();
        assert_eq!(out.tuple, vec![rint(1), rint(0)]);

        let nil = CoeffDecomposition::new(&q, rat(1, 2), vec![rint(1)], vec![vec![rm(vec![vec![0, 1], vec![0, 0]])]])
            .unwrap();
        let w = LCNumber::zero(&q);
        assert!(matches!(rational_descent(&nil, &w, &DescentConfig::default()), Err(Error::NotInvertible(_))));
    }
}

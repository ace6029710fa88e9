//! Blow-up ring embeddings, transport of evaluation maps across a blow-up,
//! spectral additivity and audits of blow-up/blow-down ledgers.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_ring::{blowup_denominator, CurveCone, EvaluationMap, Generator, ParametricEvaluation, RingSignature};
use crate::invariants::{EigenTuple, InvariantTuple, INVARIANT_NAMES};
use crate::levi_civita::LCNumber;
use crate::matrix::Matrix;
use crate::number_field::{same_field, NumberField};
use crate::poly::Poly;
use crate::scalar::{fmt_rational, rint, simplest_between, Rational};
use crate::spectral::{render_eigenvalue, BMatrix};

/// Image of one source curve generator: `Q'^curve * q'^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JImage {
    pub curve: Vec<i64>,
    pub q: Rational,
}

impl JImage {
    pub fn is_pure_q(&self) -> bool {
        self.curve.iter().all(|n| *n == 0)
    }
}

/// Degree-zero morphism of Novikov rings, given on generators.
#[derive(Clone, Debug, PartialEq)]
pub struct JMap {
    images: Vec<JImage>,
    /// Per image, the common degree of source and image.
    degrees: Vec<i64>,
}

impl JMap {
    /// Checks that every generator keeps its degree and that no non-zero
    /// class goes to `1`.
    pub fn new(source: &CurveCone, target: &CurveCone, q_degree: i64, images: Vec<JImage>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::Shape("one image per source curve generator is required".into()));
        }
        let mut degrees = Vec::with_capacity(images.len());
        for (g, im) in images.iter().enumerate() {
            if im.curve.len() != target.len() {
                return Err(Error::Shape(format!("image of `{}` has the wrong length", source.labels()[g])));
            }
            if im.is_pure_q() && im.q.is_zero() {
                return Err(Error::InvalidFrame(format!("generator `{}` is sent to 1", source.labels()[g])));
            }
            let expected = 2 * source.c1_pairing()[g];
            let curve: i64 = im.curve.iter().zip(target.c1_pairing()).map(|(n, c)| 2 * n * c).sum();
            let found = rint(curve) + &im.q * rint(q_degree);
            if found != rint(expected) {
                return Err(Error::DegreeMismatch {
                    expected: expected.to_string(),
                    found: format!("{} for `{}`", fmt_rational(&found), source.labels()[g]),
                });
            }
            degrees.push(expected);
        }
        Ok(JMap { images, degrees })
    }

    pub fn images(&self) -> &[JImage] {
        &self.images
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }
}

/// Verdict of [`check_jmap_liftable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Liftability {
    pub liftable: bool,
    /// Two generators whose pure `q'` exponents have opposite signs.
    pub witness: Option<(usize, usize)>,
    /// Common sign of the pure `q'` exponents (0 when there are none).
    pub sign: i32,
}

/// The morphism extends to the completions iff all pure `q'` images have
/// exponents of one strict sign.
pub fn check_jmap_liftable(j: &JMap) -> Liftability {
    let mut first: Option<(usize, i32)> = None;
    for (g, im) in j.images.iter().enumerate() {
        if !im.is_pure_q() {
            continue;
        }
        let s = if im.q.is_positive() { 1 } else { -1 };
        match first {
            None => first = Some((g, s)),
            Some((h, t)) if t != s => return Liftability { liftable: false, witness: Some((h, g)), sign: 0 },
            _ => {}
        }
    }
    Liftability { liftable: true, witness: None, sign: first.map_or(0, |(_, s)| s) }
}

/// Valuation assigned to `q'` by the lift: `sign * eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct JLift {
    pub q_valuation: Rational,
}

/// Chooses `eta > 0` so that every image has positive valuation, given
/// positive valuations of the target curve generators.
pub fn lift_jmap(j: &JMap, target_valuations: &[Rational]) -> Result<JLift> {
    let lift = check_jmap_liftable(j);
    if !lift.liftable {
        let (a, b) = lift.witness.expect("witness on failure");
        return Err(Error::NotNormalizable { lower: format!("generator {a}"), upper: format!("generator {b}") });
    }
    if let Some(v) = target_valuations.iter().find(|v| !v.is_positive()) {
        return Err(Error::NotNormalizable { lower: fmt_rational(v), upper: "0".into() });
    }
    let sign = if lift.sign == 0 { 1 } else { lift.sign };
    let mut bound: Option<Rational> = None;
    for im in &j.images {
        let curve: Rational = im.curve.iter().zip(target_valuations).map(|(n, v)| rint(*n) * v).sum();
        let drift = &im.q * rint(sign as i64);
        if im.is_pure_q() || !drift.is_negative() {
            continue;
        }
        if !curve.is_positive() {
            return Err(Error::NotNormalizable { lower: "curve part".into(), upper: "0".into() });
        }
        let b = curve / -drift;
        bound = Some(bound.map_or(b.clone(), |x: Rational| x.min(b)));
    }
    let eta = simplest_between(Some(&Rational::zero()), bound.as_ref()).expect("open interval above 0");
    Ok(JLift { q_valuation: eta * rint(sign as i64) })
}

/// Valuations of the images under `lift`.
pub fn lifted_valuations(j: &JMap, target_valuations: &[Rational], lift: &JLift) -> Vec<Rational> {
    j.images
        .iter()
        .map(|im| {
            let curve: Rational = im.curve.iter().zip(target_valuations).map(|(n, v)| rint(*n) * v).sum();
            curve + &im.q * &lift.q_valuation
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// `X~ = Bl_Y X`: curve data relating the two cones.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupStep {
    pub center: String,
    pub codim: u32,
    /// Index of the exceptional line `l_E` among the generators of `X~`.
    pub exceptional: usize,
    /// `[E] . g` per generator `g` of `X~`.
    pub e_pairing: Vec<i64>,
    /// `pr_* g` per generator of `X~`, in generators of `X`.
    pub pushforward: Vec<Vec<u32>>,
    /// A chosen lift per generator of `X`, in generators of `X~`.
    pub lifts: Vec<Vec<u32>>,
}

impl BlowupStep {
    pub fn denominator(&self) -> u32 {
        blowup_denominator(self.codim)
    }

    pub fn q_degree(&self) -> i64 {
        2 * (self.codim as i64 - 1)
    }

    /// Checks `[E].l_E = -1`, `pr_* l_E = 0`, `pr_*` of each lift and the
    /// relation `c1(X~).g = c1(X).pr_* g - (r-1) [E].g`.
    pub fn validate(&self, blown_up: &CurveCone, base: &CurveCone) -> Result<()> {
        let n = blown_up.len();
        if self.codim < 2 {
            return Err(Error::InvalidFrame(format!("centre codimension {} is below 2", self.codim)));
        }
        if self.e_pairing.len() != n || self.pushforward.len() != n || self.lifts.len() != base.len() {
            return Err(Error::Shape("blow-up step data does not match the two cones".into()));
        }
        if self.exceptional >= n || self.e_pairing[self.exceptional] != -1 {
            return Err(Error::InvalidFrame("the exceptional line must pair to -1 with E".into()));
        }
        if self.pushforward[self.exceptional].iter().any(|x| *x != 0) {
            return Err(Error::InvalidFrame("the exceptional line must push forward to 0".into()));
        }
        for g in 0..n {
            if self.pushforward[g].len() != base.len() {
                return Err(Error::Shape("push-forward vector of the wrong length".into()));
            }
            let c_base: i64 = self.pushforward[g].iter().zip(base.c1_pairing()).map(|(k, c)| *k as i64 * c).sum();
            let expected = c_base - (self.codim as i64 - 1) * self.e_pairing[g];
            if blown_up.c1_pairing()[g] != expected {
                return Err(Error::DegreeMismatch {
                    expected: expected.to_string(),
                    found: format!("{} for `{}`", blown_up.c1_pairing()[g], blown_up.labels()[g]),
                });
            }
        }
        for (b, lift) in self.lifts.iter().enumerate() {
            if lift.len() != n {
                return Err(Error::Shape("lift vector of the wrong length".into()));
            }
            let mut pushed = vec![0u32; base.len()];
            for (g, k) in lift.iter().enumerate() {
                for (i, p) in self.pushforward[g].iter().enumerate() {
                    pushed[i] += k * p;
                }
            }
            if pushed.iter().enumerate().any(|(i, x)| *x != u32::from(i == b)) {
                return Err(Error::InvalidFrame(format!("lift of `{}` does not push forward to it", base.labels()[b])));
            }
        }
        Ok(())
    }

    /// `[E] . beta~` for a combination of generators of `X~`.
    pub fn e_of(&self, curve: &[i64]) -> i64 {
        curve.iter().zip(&self.e_pairing).map(|(k, e)| k * e).sum()
    }
}

/// Result of a successful transport.
#[derive(Clone, Debug)]
pub struct Transport {
    /// The rescaled map on `X~` with `ev(Q~^{l_E}) = b^{2r-2}`.
    pub rescaled: EvaluationMap,
    pub lambda: LCNumber,
    /// The map on the ring of `X` with the blow-up variable.
    pub transported: EvaluationMap,
    /// Per generator of `X`, the transported values for lifts shifted by
    /// `k l_E`, `k = -3..=3`; all equal when the transport is well defined.
    pub lift_checks: Vec<Vec<LCNumber>>,
}

fn curve_value(ev: &EvaluationMap, curve: &[i64]) -> Result<LCNumber> {
    let field = ev.field();
    let mut acc = LCNumber::one(field);
    for (g, k) in curve.iter().enumerate() {
        if *k != 0 {
            acc = acc.try_mul(&ev.f_part(Generator::Curve(g)).expect("generator").powi(*k)?)?;
        }
    }
    Ok(acc)
}

/// `Q~^{beta~ + ([E].beta~) l_E}` on a lift given as an integer combination.
fn transported_value(ev: &EvaluationMap, step: &BlowupStep, lift: &[i64]) -> Result<LCNumber> {
    let mut shifted = lift.to_vec();
    shifted[step.exceptional] += step.e_of(lift);
    curve_value(ev, &shifted)
}

/// Transports `ev` on the ring of `X~` to the ring of `X` with its blow-up
/// variable, after rescaling so that the exceptional line goes to
/// `b^{2r-2}`.
pub fn transport_evaluation(
    ev: &EvaluationMap,
    step: &BlowupStep,
    base: &Arc<RingSignature>,
    t_vars: Vec<LCNumber>,
) -> Result<Transport> {
    let sig = ev.signature();
    step.validate(sig.cone(), base.cone())?;
    if base.q().map(|q| q.codim()) != Some(step.codim) {
        return Err(Error::Shape("target ring needs the blow-up variable of the step's codimension".into()));
    }
    if ev.vanishes_on_q() {
        return Err(Error::VanishesOnQ);
    }
    let x_e = ev.f_part(Generator::Curve(step.exceptional)).expect("exceptional generator");
    let d = step.q_degree();
    let (v, c) = match x_e.leading()? {
        Some(lead) if x_e.is_monomial() => lead,
        _ => return Err(Error::NotNormalizable { lower: "exceptional line".into(), upper: "non-monomial image".into() }),
    };
    let unit = crate::scalar::Field::inv(&c)?.nth_root(d as u32).ok_or_else(|| Error::NotNormalizable {
        lower: "exceptional line".into(),
        upper: format!("no root of degree {d} in the coefficient field"),
    })?;
    let lambda = LCNumber::monomial(unit, -v / rint(d));
    let rescaled = ev.rescale(&lambda)?;
    let field = rescaled.field().clone();

    let mut curves = Vec::with_capacity(base.cone().len());
    let mut lift_checks = Vec::with_capacity(base.cone().len());
    for (b, lift) in step.lifts.iter().enumerate() {
        let lift: Vec<i64> = lift.iter().map(|k| *k as i64).collect();
        let value = transported_value(&rescaled, step, &lift)?;
        let mut checks = Vec::with_capacity(7);
        for k in -3..=3 {
            let mut other = lift.clone();
            other[step.exceptional] += k;
            checks.push(transported_value(&rescaled, step, &other)?);
        }
        lift_checks.push(checks);
        if value.valuation_lower_bound().is_none_or(|v| !v.is_positive()) {
            return Err(Error::ObstructionRequiresGenericity { generator: base.cone().labels()[b].clone() });
        }
        curves.push(value);
    }
    let q_unit = LCNumber::one(&field);
    let transported = EvaluationMap::new(base, &field, Some(q_unit), curves, t_vars)?;
    Ok(Transport { rescaled, lambda, transported, lift_checks })
}

/// The family `Q~^g -> ev(Q~^g) t^{n_g}` with `n_g = 1` away from the
/// exceptional line, transported to `X`. For small `|t|` every member
/// satisfies the norm condition of direct transport.
pub fn genericity_family(
    ev: &EvaluationMap,
    step: &BlowupStep,
    base: &Arc<RingSignature>,
) -> Result<ParametricEvaluation> {
    let rescaled = {
        let x_e = ev.f_part(Generator::Curve(step.exceptional)).expect("exceptional generator");
        let (v, c) = x_e.leading()?.ok_or(Error::VanishesOnQ)?;
        let d = step.q_degree();
        let unit = crate::scalar::Field::inv(&c)?.nth_root(d as u32).ok_or_else(|| Error::NotNormalizable {
            lower: "exceptional line".into(),
            upper: format!("no root of degree {d} in the coefficient field"),
        })?;
        ev.rescale(&LCNumber::monomial(unit, -v / rint(d)))?
    };
    let field = rescaled.field().clone();
    let mut curves = Vec::new();
    for lift in &step.lifts {
        let lift: Vec<i64> = lift.iter().map(|k| *k as i64).collect();
        let value = transported_value(&rescaled, step, &lift)?;
        let n: i64 = lift.iter().enumerate().filter(|(g, _)| *g != step.exceptional).map(|(_, k)| k).sum();
        curves.push(Poly::monomial(value, n.max(0) as usize));
    }
    let zero = LCNumber::zero(&field);
    let t_vars = vec![Poly::zero(&zero); base.t_degrees().len()];
    ParametricEvaluation::new(base, &field, Some(Poly::constant(LCNumber::one(&field))), curves, t_vars)
}

/// `Psi^{-1} A~ Psi` against the block sum of `blocks`.
pub fn verify_conjugacy(blown_up: &BMatrix, blocks: &[BMatrix], psi: &Matrix<LCNumber>) -> Result<bool> {
    let field = blown_up.field();
    let zero = LCNumber::zero(field);
    let n: usize = blocks.iter().map(|b| b.size()).sum();
    if n != blown_up.size() || psi.rows() != n || psi.cols() != n {
        return Err(Error::Shape("conjugator does not match the block sizes".into()));
    }
    let mut sum = Matrix::zeros(n, n, &zero);
    let mut off = 0;
    for b in blocks {
        if !same_field(b.field(), field) {
            return Err(Error::FieldMismatch);
        }
        for i in 0..b.size() {
            for j in 0..b.size() {
                sum.set(off + i, off + j, b.matrix().get(i, j).clone());
            }
        }
        off += b.size();
    }
    let lhs = psi.inverse()?.times(blown_up.matrix())?.times(psi)?;
    lhs.minus(&sum)?.is_zero_matrix()
}

/// Eigenvalues with tuples over one field.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleSpectrum {
    pub field: Arc<NumberField>,
    pub rows: Vec<EigenTuple>,
}

impl TupleSpectrum {
    pub fn tuple_at(&self, value: &LCNumber) -> (usize, InvariantTuple) {
        self.rows
            .iter()
            .find(|r| &r.value == value)
            .map_or((0, InvariantTuple::default()), |r| (r.multiplicity, r.tuple))
    }

    fn values(&self) -> Vec<LCNumber> {
        self.rows.iter().map(|r| r.value.clone()).collect()
    }
}

/// One failed equality in an additivity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditivityDelta {
    pub eigenvalue: String,
    /// `multiplicity`, one of the four invariant names, or `spectrum`.
    pub quantity: String,
    pub blown_up: usize,
    pub sum: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub holds: bool,
    pub spectrum_equal: bool,
    pub deltas: Vec<AdditivityDelta>,
}

/// Checks `Sp(X~) = Sp(X) u U Sp(X'_k)` and, per eigenvalue, additivity of
/// algebraic multiplicity and of the four invariants.
pub fn verify_additivity(
    blown_up: &TupleSpectrum,
    base: &TupleSpectrum,
    copies: &[TupleSpectrum],
) -> Result<AdditivityReport> {
    if !same_field(&blown_up.field, &base.field) || copies.iter().any(|c| !same_field(&c.field, &base.field)) {
        return Err(Error::FieldMismatch);
    }
    let mut union: Vec<LCNumber> = base.values();
    for c in copies {
        for v in c.values() {
            if !union.contains(&v) {
                union.push(v);
            }
        }
    }
    let tilde = blown_up.values();
    let spectrum_equal = union.len() == tilde.len() && union.iter().all(|v| tilde.contains(v));
    let mut deltas = Vec::new();
    for v in tilde.iter().filter(|v| !union.contains(v)).chain(union.iter().filter(|v| !tilde.contains(v))) {
        let in_tilde = usize::from(tilde.contains(v));
        deltas.push(AdditivityDelta {
            eigenvalue: render_eigenvalue(v),
            quantity: "spectrum".into(),
            blown_up: in_tilde,
            sum: 1 - in_tilde,
        });
    }
    let mut all = tilde.clone();
    all.extend(union.iter().filter(|v| !tilde.contains(v)).cloned());
    for v in &all {
        let (m, t) = blown_up.tuple_at(v);
        let (mut ms, mut ts) = base.tuple_at(v);
        for c in copies {
            let (mc, tc) = c.tuple_at(v);
            ms += mc;
            ts = InvariantTuple::new(ts.rho + tc.rho, ts.nu + tc.nu, ts.nu_prime + tc.nu_prime, ts.gamma + tc.gamma);
        }
        let lhs = [m, t.rho, t.nu, t.nu_prime, t.gamma];
        let rhs = [ms, ts.rho, ts.nu, ts.nu_prime, ts.gamma];
        for (i, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
            if l != r {
                let quantity = if i == 0 { "multiplicity" } else { INVARIANT_NAMES[i - 1] };
                deltas.push(AdditivityDelta {
                    eigenvalue: render_eigenvalue(v),
                    quantity: quantity.into(),
                    blown_up: *l,
                    sum: *r,
                });
            }
        }
    }
    Ok(AdditivityReport { holds: deltas.is_empty(), spectrum_equal, deltas })
}

/// `f0 = a^M` with `M` one above every exponent in `spectra`; shifting a
/// centre's spectrum by it makes it disjoint from all of them.
pub fn choose_disjoint_shift(field: &Arc<NumberField>, spectra: &[&[LCNumber]]) -> LCNumber {
    let top = spectra
        .iter()
        .flat_map(|s| s.iter())
        .flat_map(|x| x.terms().iter().map(|(e, _)| e.clone()))
        .max()
        .unwrap_or_else(Rational::zero)
        .max(Rational::zero());
    LCNumber::a_pow(field, top.floor() + rint(1))
}

/// A frame or centre in a ledger, with whatever is known about it at the
/// target eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerTerm {
    pub name: String,
    /// Complex dimension.
    pub dim_c: u32,
    /// Total dimension of cohomology, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohomology_dim: Option<usize>,
    /// `dim H^(2)`, bounding `nu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hochschild2: Option<usize>,
    /// `dim H^(1)`, bounding `nu'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hochschild1: Option<usize>,
    /// Invariants at the target eigenvalue, as far as they are known.
    #[serde(default)]
    pub invariants: PartialTuple,
    /// Whether the term is known to satisfy the property being audited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfies: Option<bool>,
}

/// Invariant tuple with unknown entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTuple {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
}

impl PartialTuple {
    pub fn known(t: [usize; 4]) -> Self {
        PartialTuple { rho: Some(t[0]), nu: Some(t[1]), nu_prime: Some(t[2]), gamma: Some(t[3]) }
    }

    pub fn get(&self, k: usize) -> Option<usize> {
        [self.rho, self.nu, self.nu_prime, self.gamma][k]
    }

    pub fn full(&self) -> Option<[usize; 4]> {
        Some([self.rho?, self.nu?, self.nu_prime?, self.gamma?])
    }
}

impl From<InvariantTuple> for PartialTuple {
    fn from(t: InvariantTuple) -> Self {
        PartialTuple::known(t.as_array())
    }
}

impl LedgerTerm {
    /// Declared to satisfy the property, or `nu` vanishes on it.
    fn known_to_satisfy(&self) -> bool {
        self.satisfies == Some(true) || (self.satisfies.is_none() && self.bounds()[1] == Some(0))
    }

    /// Upper bound on each invariant, from known values or the Hodge data.
    fn bounds(&self) -> [Option<usize>; 4] {
        let point = self.dim_c == 0;
        let curve = self.dim_c == 1;
        let h2 = self.hochschild2.or(if point || curve { Some(0) } else { None });
        let h1 = self.hochschild1.or(if point { Some(0) } else { None });
        let fallback = [self.cohomology_dim, h2, h1, self.cohomology_dim];
        std::array::from_fn(|k| self.invariants.get(k).or(fallback[k]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub direction: Direction,
    pub codim: u32,
    pub center: LedgerTerm,
}

/// `X_0 <-> X_1 <-> ... <-> X_q`; step `i` joins `frames[i]` and
/// `frames[i+1]`. An up-step blows up `frames[i]`; a down-step blows down
/// `frames[i]` onto `frames[i+1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub name: String,
    pub frames: Vec<LedgerTerm>,
    pub steps: Vec<LedgerStep>,
}

/// Contribution of one centre copy to the telescoped equality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterTerm {
    pub step: usize,
    pub copy: u32,
    pub center: String,
    pub value: Option<usize>,
    pub bound: Option<usize>,
}

/// `eps(X_0) = eps(X_q) + sum over down-step centre copies`, for one
/// invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelescopedEquality {
    pub invariant: String,
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub terms: Vec<CenterTerm>,
    /// `start - end - (known centre terms)`, when determined.
    pub unexplained: Option<i64>,
    /// Centre copies that can absorb the unexplained amount.
    pub candidates: Vec<CenterTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub ledger: String,
    pub equalities: Vec<TelescopedEquality>,
    /// Steps whose end-point tuples are known and satisfy the per-step
    /// equality.
    pub audited_steps: Vec<usize>,
    pub verdict: String,
}

/// Audits a ledger at a target eigenvalue. Centre spectra of up-steps are
/// assumed shifted away from the target, so only down-steps contribute.
pub fn run_ledger(ledger: &Ledger) -> Result<LedgerReport> {
    if ledger.frames.len() != ledger.steps.len() + 1 {
        return Err(Error::InconsistentLedger(format!(
            "{} frames cannot be joined by {} steps",
            ledger.frames.len(),
            ledger.steps.len()
        )));
    }
    for (i, step) in ledger.steps.iter().enumerate() {
        let (lo, hi) = (&ledger.frames[i], &ledger.frames[i + 1]);
        let (small, big) = match step.direction {
            Direction::Up => (lo, hi),
            Direction::Down => (hi, lo),
        };
        if step.codim < 2 {
            return Err(Error::InconsistentLedger(format!("step {i} has codimension {}", step.codim)));
        }
        if small.dim_c != big.dim_c || step.center.dim_c + step.codim != small.dim_c {
            return Err(Error::InconsistentLedger(format!("step {i}: dimensions of frames and centre disagree")));
        }
        if let (Some(s), Some(b), Some(y)) = (small.cohomology_dim, big.cohomology_dim, step.center.cohomology_dim) {
            if b != s + (step.codim as usize - 1) * y {
                return Err(Error::InconsistentLedger(format!(
                    "step {i}: cohomology dimension {b} differs from {s} + {} x {y}",
                    step.codim - 1
                )));
            }
        }
    }

    let mut audited = Vec::new();
    for (i, step) in ledger.steps.iter().enumerate() {
        let (Some(lo), Some(hi)) = (ledger.frames[i].invariants.full(), ledger.frames[i + 1].invariants.full()) else {
            continue;
        };
        let ok = match step.direction {
            Direction::Up => lo == hi,
            Direction::Down => match step.center.invariants.full() {
                Some(y) => (0..4).all(|k| lo[k] == hi[k] + (step.codim as usize - 1) * y[k]),
                None => continue,
            },
        };
        if !ok {
            return Err(Error::InconsistentLedger(format!("step {i} violates additivity at the target eigenvalue")));
        }
        audited.push(i);
    }

    let first = &ledger.frames[0];
    let last = ledger.frames.last().expect("at least one frame");
    let mut equalities = Vec::new();
    for (k, name) in INVARIANT_NAMES.iter().enumerate() {
        let start = first.invariants.get(k);
        let end = last.invariants.get(k);
        let mut terms = Vec::new();
        for (i, step) in ledger.steps.iter().enumerate() {
            if step.direction != Direction::Down {
                continue;
            }
            for copy in 1..step.codim {
                terms.push(CenterTerm {
                    step: i,
                    copy,
                    center: step.center.name.clone(),
                    value: step.center.invariants.get(k),
                    bound: step.center.bounds()[k],
                });
            }
        }
        let known: i64 = terms.iter().filter_map(|t| t.value).map(|v| v as i64).sum();
        let unexplained = match (start, end) {
            (Some(s), Some(e)) => Some(s as i64 - e as i64 - known),
            _ => None,
        };
        let candidates: Vec<CenterTerm> =
            terms.iter().filter(|t| t.value.is_none() && t.bound != Some(0)).cloned().collect();
        if let Some(u) = unexplained {
            let all_known = terms.iter().all(|t| t.value.is_some());
            if u < 0 || (u > 0 && candidates.is_empty()) || (all_known && u != 0) {
                return Err(Error::InconsistentLedger(format!(
                    "{name}: {} at the start cannot equal {} at the end plus the centre terms",
                    start.unwrap_or(0),
                    end.unwrap_or(0)
                )));
            }
        }
        equalities.push(TelescopedEquality {
            invariant: name.to_string(),
            start,
            end,
            terms,
            unexplained,
            candidates,
        });
    }

    let verdict = ledger_verdict(ledger, &equalities);
    Ok(LedgerReport { ledger: ledger.name.clone(), equalities, audited_steps: audited, verdict })
}

fn ledger_verdict(ledger: &Ledger, equalities: &[TelescopedEquality]) -> String {
    let nu = &equalities[1];
    let mut lines = Vec::new();
    if let Some(u) = nu.unexplained.filter(|u| *u > 0) {
        let names: Vec<String> =
            nu.candidates.iter().map(|c| format!("{} (step {}, copy {})", c.center, c.step, c.copy)).collect();
        lines.push(format!("nu = {u} must be carried by a centre among: {}", names.join(", ")));
    }
    let first = ledger.frames[0].satisfies;
    let last = ledger.frames.last().and_then(|f| f.satisfies);
    let centers: Vec<&LedgerStep> = ledger.steps.iter().collect();
    match (first, last) {
        (Some(false), Some(true)) => {
            let unknown: Vec<&str> =
                centers.iter().filter(|s| !s.center.known_to_satisfy()).map(|s| s.center.name.as_str()).collect();
            lines.push(format!("at least one blow-up centre fails the property: {}", unknown.join(", ")));
        }
        (_, Some(true)) if centers.iter().all(|s| s.center.known_to_satisfy()) => {
            lines.push(format!("{} inherits the property", ledger.frames[0].name));
        }
        _ => {}
    }
    if lines.is_empty() {
        lines.push("balanced".into());
    }
    lines.join("; ")
}

/// Per-invariant sums over a ledger with all tuples known, for checking
/// that per-step equalities telescope.
pub fn telescope_totals(ledger: &Ledger) -> Option<BTreeMap<&'static str, (usize, usize)>> {
    let mut out = BTreeMap::new();
    for (k, name) in INVARIANT_NAMES.iter().enumerate() {
        let start = ledger.frames[0].invariants.get(k)?;
        let mut rhs = ledger.frames.last()?.invariants.get(k)?;
        for step in ledger.steps.iter().filter(|s| s.direction == Direction::Down) {
            rhs += (step.codim as usize - 1) * step.center.invariants.get(k)?;
        }
        out.insert(*name, (start, rhs));
    }
    Some(out)
}

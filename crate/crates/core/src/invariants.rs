//! The per-eigenvalue integers `(rho, nu, nu', gamma)`, equivalence of
//! evaluation maps, and the two blow-up-stable properties.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_ring::{EvaluationMap, ParametricEvaluation};
use crate::levi_civita::{LCNumber, SElem};
use crate::number_field::{NFElem, NumberField};
use crate::quantum_model::{CohomologyFrame, Kappa, Subspaces};
use crate::scalar::Ring;
use crate::spectral::{
    generic_invariants, intersection_dim, parametric_matrix, render_eigenvalue, restricted_rank, spectrum, BMatrix,
    SpectrumReport,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InvariantTuple {
    pub rho: usize,
    pub nu: usize,
    pub nu_prime: usize,
    pub gamma: usize,
}

impl InvariantTuple {
    pub fn new(rho: usize, nu: usize, nu_prime: usize, gamma: usize) -> Self {
        InvariantTuple { rho, nu, nu_prime, gamma }
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.rho, self.nu, self.nu_prime, self.gamma]
    }

    pub fn satisfies(&self, property: Property) -> bool {
        match property {
            Property::Club => self.nu == 0 || self.rho >= 3,
            Property::Heart => self.nu == 0 || self.nu_prime != 0 || self.gamma >= 2,
        }
    }
}

impl fmt::Display for InvariantTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(rho={}, nu={}, nu'={}, gamma={})", self.rho, self.nu, self.nu_prime, self.gamma)
    }
}

/// Names of the four integers, in tuple order.
pub const INVARIANT_NAMES: [&str; 4] = ["rho", "nu", "nu'", "gamma"];

fn lift_subspace(vs: &[Vec<NFElem>], field: &Arc<NumberField>) -> Result<Vec<Vec<LCNumber>>> {
    vs.iter().map(|v| v.iter().map(|x| Ok(LCNumber::constant(x.coerce_into(field)?))).collect()).collect()
}

/// Tuple at `value` (an `F`-part; the eigenvalue is `value * b^2`).
pub fn invariant_tuple(report: &SpectrumReport, subspaces: &Subspaces, value: &LCNumber) -> Result<InvariantTuple> {
    let Some(e) = report.find(value) else { return Ok(InvariantTuple::default()) };
    let n = report.size();
    let zero = LCNumber::zero(&report.field);
    let dim = |h: &[Vec<NFElem>]| -> Result<usize> {
        if h.is_empty() {
            return Ok(0);
        }
        Ok(intersection_dim(&e.basis, &lift_subspace(h, &report.field)?, n, &zero)?.0)
    };
    let (gamma, _) = restricted_rank(&report.matrix, &e.value, &e.basis)?;
    Ok(InvariantTuple {
        rho: dim(&subspaces.hodge)?,
        nu: dim(&subspaces.hochschild2)?,
        nu_prime: dim(&subspaces.hochschild1)?,
        gamma,
    })
}

/// One row of a tuple table.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTuple {
    pub value: LCNumber,
    pub multiplicity: usize,
    pub tuple: InvariantTuple,
}

impl EigenTuple {
    pub fn eigenvalue(&self) -> SElem {
        SElem::homogeneous(self.value.clone(), 2)
    }
}

pub fn tuple_table(report: &SpectrumReport, subspaces: &Subspaces) -> Result<Vec<EigenTuple>> {
    report
        .eigen
        .iter()
        .map(|e| {
            Ok(EigenTuple {
                value: e.value.clone(),
                multiplicity: e.multiplicity,
                tuple: invariant_tuple(report, subspaces, &e.value)?,
            })
        })
        .collect()
}

/// Spectrum and tuples of `ev(kappa)` over `field`.
pub fn analyze(
    frame: &CohomologyFrame,
    kappa: &Kappa,
    ev: &EvaluationMap,
    field: &Arc<NumberField>,
    hints: &[NFElem],
) -> Result<(SpectrumReport, Vec<EigenTuple>)> {
    let a = BMatrix::from_kappa(kappa, ev)?;
    let report = spectrum(&a, field, hints)?;
    let table = tuple_table(&report, &frame.subspaces())?;
    Ok((report, table))
}

/// A tuple-preserving bijection between two spectra, as index pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Bijection {
    pub pairs: Vec<(LCNumber, LCNumber)>,
}

/// Matches eigenvalues with equal tuples and multiplicities; `None` when
/// the multisets differ.
pub fn equivalent(a: &[EigenTuple], b: &[EigenTuple]) -> Option<Bijection> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::with_capacity(a.len());
    for x in a {
        let j = (0..b.len()).find(|&j| !used[j] && b[j].tuple == x.tuple && b[j].multiplicity == x.multiplicity)?;
        used[j] = true;
        pairs.push((x.value.clone(), b[j].value.clone()));
    }
    Some(Bijection { pairs })
}

/// Outcome of checking one of the two built-in equivalences.
#[derive(Clone, Debug)]
pub struct EquivalenceCheck {
    /// The explicit map `alpha -> phi(alpha)` on `F`-parts.
    pub bijection: Bijection,
    /// Every pair is matched with equal multiplicity and all four integers.
    pub holds: bool,
}

fn check_map(
    before: &[EigenTuple],
    after: &[EigenTuple],
    phi: impl Fn(&LCNumber) -> Result<LCNumber>,
) -> Result<EquivalenceCheck> {
    let mut pairs = Vec::new();
    let mut holds = before.len() == after.len();
    for x in before {
        let y = phi(&x.value)?;
        match after.iter().find(|e| e.value == y) {
            Some(e) => holds &= e.tuple == x.tuple && e.multiplicity == x.multiplicity,
            None => holds = false,
        }
        pairs.push((x.value.clone(), y));
    }
    Ok(EquivalenceCheck { bijection: Bijection { pairs }, holds })
}

/// `ev ~ ev + f0 1_X` with `phi(alpha) = alpha + f0 b^2`.
pub fn check_shift_equivalence(
    frame: &CohomologyFrame,
    kappa: &Kappa,
    ev: &EvaluationMap,
    f0: &LCNumber,
    field: &Arc<NumberField>,
    hints: &[NFElem],
) -> Result<EquivalenceCheck> {
    let (_, before) = analyze(frame, kappa, ev, field, hints)?;
    let shifted = ev.shift_by_unit(&SElem::homogeneous(f0.clone(), 2))?;
    let (_, after) = analyze(frame, kappa, &shifted, field, hints)?;
    let f0 = f0.coerce_into(field)?;
    check_map(&before, &after, |x| x.try_add(&f0))
}

/// `ev ~ lambda ev` with `phi(alpha) = lambda^2 alpha`.
pub fn check_rescale_equivalence(
    frame: &CohomologyFrame,
    kappa: &Kappa,
    ev: &EvaluationMap,
    lambda: &LCNumber,
    field: &Arc<NumberField>,
    hints: &[NFElem],
) -> Result<EquivalenceCheck> {
    let (_, before) = analyze(frame, kappa, ev, field, hints)?;
    let (_, after) = analyze(frame, kappa, &ev.rescale(lambda)?, field, hints)?;
    let square = lambda.coerce_into(field)?.pow_u(2);
    check_map(&before, &after, |x| x.try_mul(&square))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    /// `nu = 0` or `rho >= 3` at every eigenvalue.
    Club,
    /// `nu = 0`, `nu' != 0` or `gamma >= 2` at every eigenvalue.
    Heart,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Club => "club",
            Property::Heart => "heart",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "club" => Ok(Property::Club),
            "heart" => Ok(Property::Heart),
            _ => Err(Error::Parse(format!("unknown property `{s}`; expected club or heart"))),
        }
    }
}

/// Eigenvalue with its tuple, rendered for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub eigenvalue: String,
    pub multiplicity: usize,
    pub tuple: InvariantTuple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// One evaluation map.
    Pointwise,
    /// The generic member of a one-parameter family.
    Generic,
    /// `H^(2) = 0`, so `nu` vanishes for every map.
    Vacuous,
    /// The map sends every Novikov variable to zero and is excluded.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: Property,
    pub holds: bool,
    pub scope: Scope,
    /// All rows of the tuple table.
    pub table: Vec<Witness>,
    /// Rows violating the property.
    pub witnesses: Vec<Witness>,
    /// Polynomials in `t` whose zeros contain the exceptional parameters.
    pub certificates: Vec<String>,
    /// Their zeros, when enumerable.
    pub exceptional: Option<Vec<String>>,
}

impl PropertyVerdict {
    pub fn vacuous(property: Property, scope: Scope) -> Self {
        PropertyVerdict {
            property,
            holds: true,
            scope,
            table: Vec::new(),
            witnesses: Vec::new(),
            certificates: Vec::new(),
            exceptional: None,
        }
    }
}

fn verdict(property: Property, scope: Scope, table: Vec<Witness>) -> PropertyVerdict {
    let witnesses: Vec<Witness> = table.iter().filter(|w| !w.tuple.satisfies(property)).cloned().collect();
    PropertyVerdict {
        property,
        holds: witnesses.is_empty(),
        scope,
        table,
        witnesses,
        certificates: Vec::new(),
        exceptional: None,
    }
}

/// Checks a property on one evaluation map.
pub fn property_check_map(
    property: Property,
    frame: &CohomologyFrame,
    kappa: &Kappa,
    ev: &EvaluationMap,
    field: &Arc<NumberField>,
    hints: &[NFElem],
    strict: bool,
) -> Result<PropertyVerdict> {
    if ev.vanishes_on_q() {
        if strict {
            return Err(Error::VanishesOnQ);
        }
        return Ok(PropertyVerdict::vacuous(property, Scope::Skipped));
    }
    if frame.hochschild(2).is_empty() {
        return Ok(PropertyVerdict::vacuous(property, Scope::Vacuous));
    }
    let (_, table) = analyze(frame, kappa, ev, field, hints)?;
    let rows = table
        .iter()
        .map(|r| Witness { eigenvalue: render_eigenvalue(&r.value), multiplicity: r.multiplicity, tuple: r.tuple })
        .collect();
    Ok(verdict(property, Scope::Pointwise, rows))
}

/// Checks a property on the generic member of `family`, with certificates
/// bounding the parameters where the verdict may differ.
pub fn property_check_family(
    property: Property,
    frame: &CohomologyFrame,
    kappa: &Kappa,
    family: &ParametricEvaluation,
    hints: &[NFElem],
) -> Result<PropertyVerdict> {
    if frame.hochschild(2).is_empty() {
        return Ok(PropertyVerdict::vacuous(property, Scope::Vacuous));
    }
    if family.curves().iter().all(|c| c.is_zero_poly()) && !family.curves().is_empty() {
        return Err(Error::VanishesOnQ);
    }
    let a = parametric_matrix(kappa, family)?;
    let s = frame.subspaces();
    let generic = generic_invariants(&a, &[s.hodge, s.hochschild2, s.hochschild1], hints)?;
    let rows = generic
        .eigen
        .iter()
        .map(|e| Witness {
            eigenvalue: match e.describe().as_str() {
                "0" => "0".to_string(),
                d => format!("({d})*b^2"),
            },
            multiplicity: e.data.multiplicity,
            tuple: InvariantTuple::new(e.intersections[0], e.intersections[1], e.intersections[2], e.gamma),
        })
        .collect();
    let mut out = verdict(property, Scope::Generic, rows);
    out.certificates = generic.certificates.iter().map(|c| c.render("t")).collect();
    out.exceptional = generic.exceptional.as_ref().map(|pts| pts.iter().map(|p| p.to_string()).collect());
    Ok(out)
}

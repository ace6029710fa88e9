//! Text formats: scalar expressions, frame files, evaluation-map files and
//! the run configuration echoed into reports.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_ring::{CurveCone, EvaluationMap, ParametricEvaluation};
use crate::levi_civita::{default_truncation, LCNumber, SElem};
use crate::matrix::Matrix;
use crate::number_field::{FieldSpec, NFElem, NumberField};
use crate::poly::Poly;
use crate::quantum_model::{CohomologyFrame, CorrelatorTable, FrameData, HodgePiece};
use crate::scalar::{fmt_rational, parse_rational, Rational, Ring};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            out.push((pos, Tok::Num(chars[start..i].iter().map(|x| x.1).collect())));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|x| x.1).collect())));
        } else if "+-*/^()".contains(c) {
            out.push((pos, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected `{c}` at column {}", pos + 1)));
        }
    }
    Ok(out)
}

/// Polynomial in the family parameter `t` over `S_K`.
type Value = Poly<SElem>;

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    field: &'a Arc<NumberField>,
    src: &'a str,
    allow_t: bool,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let col = self.toks.get(self.pos).map_or(self.src.len(), |t| t.0) + 1;
        Error::Parse(format!("{msg} at column {col} in `{}`", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn constant(&self, x: SElem) -> Value {
        Poly::constant(x)
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.plus(&self.term()?);
            } else if self.eat('-') {
                acc = acc.minus(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.times(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = self.divide(&acc, &d)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn divide(&self, x: &Value, d: &Value) -> Result<Value> {
        if d.degree() != Some(0) {
            return Err(self.err("division by a non-constant"));
        }
        let inv = invert_monomial(&d.coeff(0)).ok_or_else(|| self.err("division by a non-monomial"))?;
        Ok(x.scale(&inv))
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat('-') {
            return Ok(self.unary()?.negated());
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        self.power(&base, &e)
    }

    fn exponent(&mut self) -> Result<Rational> {
        let neg = self.eat('-');
        let e = if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            let c = inner.coeff(0);
            let r = (inner.degree().unwrap_or(0) == 0)
                .then(|| c.coefficient_in_degree(0).ok())
                .flatten()
                .and_then(|x| match x.terms() {
                    [] => Some(Rational::zero()),
                    [(e, c)] if e.is_zero() => c.as_rational(),
                    _ => None,
                });
            r.ok_or_else(|| self.err("exponent must be rational"))?
        } else {
            match self.toks.get(self.pos).map(|t| t.1.clone()) {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    parse_rational(&n)?
                }
                _ => return Err(self.err("expected an exponent")),
            }
        };
        Ok(if neg { -e } else { e })
    }

    fn power(&self, base: &Value, e: &Rational) -> Result<Value> {
        if e.is_integer() && *e >= Rational::zero() {
            let n = e.to_integer().try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow_u(n));
        }
        if base.degree() != Some(0) {
            return Err(self.err("fractional or negative power of a non-constant"));
        }
        let x = base.coeff(0);
        let comps = x.components();
        if comps.len() != 1 {
            return Err(self.err("power of a non-monomial"));
        }
        let (d, v) = comps.iter().next().expect("one component");
        let (ve, vc) = match v.terms() {
            [(ve, vc)] => (ve.clone(), vc.clone()),
            _ => return Err(self.err("power of a non-monomial")),
        };
        let num: i64 = e.numer().try_into().map_err(|_| self.err("exponent too large"))?;
        let den: u32 = e.denom().try_into().map_err(|_| self.err("exponent too large"))?;
        let c = vc.powi(num)?.nth_root(den).ok_or_else(|| self.err("root not in the coefficient field"))?;
        let bd = Rational::from_integer((*d).into()) * e;
        if !bd.is_integer() {
            return Err(self.err("fractional power of b"));
        }
        let bd: i64 = bd.to_integer().try_into().map_err(|_| self.err("exponent too large"))?;
        Ok(self.constant(SElem::homogeneous(LCNumber::monomial(c, ve * e), bd)))
    }

    fn atom(&mut self) -> Result<Value> {
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else { return Err(self.err("unexpected end")) };
        self.pos += 1;
        match tok {
            Tok::Num(n) => {
                let q = parse_rational(&n)?;
                Ok(self.constant(SElem::homogeneous(LCNumber::from_rational(self.field, q), 0)))
            }
            Tok::Op('(') => {
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "a" => Ok(self.constant(SElem::homogeneous(LCNumber::a(self.field), 0))),
                "b" => Ok(self.constant(SElem::b_power(self.field, 1))),
                "t" if self.allow_t => Ok(Poly::x(&SElem::zero(self.field))),
                _ => {
                    let g = NFElem::generator(self.field, &name)
                        .or_else(|| (name == self.field.var()).then(|| NFElem::theta(self.field)))
                        .ok_or_else(|| {
                            self.pos -= 1;
                            self.err(&format!("unknown symbol `{name}`"))
                        })?;
                    Ok(self.constant(SElem::homogeneous(LCNumber::constant(g), 0)))
                }
            },
            Tok::Op(c) => {
                self.pos -= 1;
                Err(self.err(&format!("unexpected `{c}`")))
            }
        }
    }
}

fn invert_monomial(x: &SElem) -> Option<SElem> {
    let comps = x.components();
    if comps.len() != 1 {
        return None;
    }
    let (d, v) = comps.iter().next()?;
    match v.terms() {
        [(e, c)] => Some(SElem::homogeneous(LCNumber::monomial(c.try_inv().ok()?, -e.clone()), -d)),
        _ => None,
    }
}

fn parse_value(s: &str, field: &Arc<NumberField>, allow_t: bool) -> Result<Value> {
    let toks = tokenize(s)?;
    let mut p = Parser { toks, pos: 0, field, src: s, allow_t };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Parses an element of `S_K` such as `9*w*a^(1/3)*b^2 - 21*a^3*b^6`.
pub fn parse_selem(s: &str, field: &Arc<NumberField>) -> Result<SElem> {
    let v = parse_value(s, field, false)?;
    Ok(v.coeff(0))
}

/// Parses an element of `F_K`; `b` must not occur.
pub fn parse_lc(s: &str, field: &Arc<NumberField>) -> Result<LCNumber> {
    parse_selem(s, field)?.coefficient_in_degree(0).map_err(|_| Error::Parse(format!("`{s}` involves b")))
}

/// Parses an element of `K`.
pub fn parse_nf(s: &str, field: &Arc<NumberField>) -> Result<NFElem> {
    let x = parse_lc(s, field)?;
    match x.terms() {
        [] => Ok(NFElem::zero(field)),
        [(e, c)] if e.is_zero() => Ok(c.clone()),
        _ => Err(Error::Parse(format!("`{s}` is not a constant of the number field"))),
    }
}

/// Parses a polynomial in `t` with coefficients in `F_K`.
pub fn parse_family(s: &str, field: &Arc<NumberField>) -> Result<Poly<LCNumber>> {
    let v = parse_value(s, field, true)?;
    let zero = LCNumber::zero(field);
    let coeffs = v
        .coeffs()
        .iter()
        .map(|c| c.coefficient_in_degree(0).map_err(|_| Error::Parse(format!("`{s}` involves b"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(coeffs, zero))
}

fn parse_q(s: &str) -> Result<Rational> {
    parse_rational(s.trim())
}

/// A number field: either a preset name or an explicit presentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldFile {
    Preset(String),
    Explicit {
        /// Coefficients from degree 0 upwards.
        minpoly: Vec<String>,
        #[serde(default)]
        var: Option<String>,
        #[serde(default)]
        qbasis: Option<Vec<Vec<String>>>,
        #[serde(default)]
        generators: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        attest_irreducible: bool,
    },
}

impl FieldFile {
    pub fn load(&self) -> Result<Arc<NumberField>> {
        match self {
            FieldFile::Preset(name) => preset_field(name),
            FieldFile::Explicit { minpoly, var, qbasis, generators, attest_irreducible } => {
                let vecq = |v: &Vec<String>| v.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>();
                NumberField::new(FieldSpec {
                    minpoly: vecq(minpoly)?,
                    var: var.clone(),
                    qbasis: qbasis.as_ref().map(|b| b.iter().map(vecq).collect::<Result<_>>()).transpose()?,
                    generators: generators.iter().map(|(k, v)| Ok((k.clone(), vecq(v)?))).collect::<Result<_>>()?,
                    attest_irreducible: *attest_irreducible,
                })
            }
        }
    }

    pub fn describe(field: &Arc<NumberField>) -> Self {
        for name in ["Q", "Q(i)", "Q(w)", "Q(z5)"] {
            if let Ok(k) = preset_field(name) {
                if *k == **field && k.var() == field.var() {
                    return FieldFile::Preset(name.into());
                }
            }
        }
        let strs = |v: &[Rational]| v.iter().map(fmt_rational).collect::<Vec<_>>();
        let generators = field
            .generator_names()
            .map(|n| (n.to_string(), strs(NFElem::generator(field, n).expect("declared").coeffs())))
            .collect();
        FieldFile::Explicit {
            minpoly: strs(field.minpoly()),
            var: Some(field.var().to_string()),
            qbasis: Some(field.qbasis().iter().map(|v| strs(v)).collect()),
            generators,
            attest_irreducible: false,
        }
    }
}

/// `Q`, `Q(i)`, `Q(w)` and `Q(zp)` for odd primes `p`.
pub fn preset_field(name: &str) -> Result<Arc<NumberField>> {
    match name {
        "Q" => Ok(NumberField::rationals()),
        "Q(i)" => Ok(NumberField::gaussian()),
        "Q(w)" => Ok(NumberField::eisenstein()),
        _ => {
            let p = name
                .strip_prefix("Q(z")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|p| p.parse::<u32>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown field preset `{name}`")))?;
            NumberField::cyclotomic(p)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceFile {
    pub p: i64,
    pub q: i64,
    /// Spanning vectors as sparse `[index, coefficient]` lists.
    pub span: Vec<Vec<(usize, String)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFile {
    pub labels: Vec<String>,
    pub c1: Vec<i64>,
    pub omega: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divisor_pairing: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEntry {
    pub insertions: Vec<usize>,
    pub curve: Vec<u32>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorFile {
    #[serde(default)]
    pub absent_is_zero: bool,
    #[serde(default)]
    pub coverage: Option<String>,
    pub entries: Vec<CorrelatorEntry>,
}

/// On-disk form of a cohomology frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    pub name: String,
    pub field: FieldFile,
    pub dim_c: usize,
    pub labels: Vec<String>,
    pub degrees: Vec<i64>,
    /// Non-zero entries `[row, col, value]`.
    pub pairing: Vec<(usize, usize, String)>,
    pub pieces: Vec<PieceFile>,
    pub hodge_subbasis: Vec<usize>,
    pub c1: Vec<String>,
    pub cone: ConeFile,
    #[serde(default)]
    pub nef_canonical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd_block: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlators: Option<CorrelatorFile>,
}

impl FrameFile {
    pub fn load(&self) -> Result<(CohomologyFrame, Option<CorrelatorTable>)> {
        let field = self.field.load()?;
        let n = self.labels.len();
        let zero = Rational::zero();
        let mut pairing = Matrix::zeros(n, n, &zero);
        for (i, j, v) in &self.pairing {
            if *i >= n || *j >= n {
                return Err(Error::Parse(format!("pairing entry ({i}, {j}) out of range")));
            }
            pairing.set(*i, *j, parse_q(v)?);
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let span = p
                    .span
                    .iter()
                    .map(|v| {
                        let mut out = vec![NFElem::zero(&field); n];
                        for (i, c) in v {
                            *out.get_mut(*i).ok_or_else(|| Error::Parse(format!("span index {i} out of range")))? =
                                parse_nf(c, &field)?;
                        }
                        Ok(out)
                    })
                    .collect::<Result<_>>()?;
                Ok(HodgePiece { p: p.p, q: p.q, span })
            })
            .collect::<Result<_>>()?;
        let cone = CurveCone::new(
            self.cone.labels.clone(),
            self.cone.c1.clone(),
            self.cone.omega.iter().map(|s| parse_q(s)).collect::<Result<_>>()?,
        )?;
        let cone = if self.cone.divisor_pairing.is_empty() {
            cone
        } else {
            cone.with_divisor_pairing(
                self.cone
                    .divisor_pairing
                    .iter()
                    .map(|r| r.iter().map(|s| parse_q(s)).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            )?
        };
        let odd_block = match &self.odd_block {
            None => None,
            Some(rows) => {
                let rows =
                    rows.iter().map(|r| r.iter().map(|s| parse_nf(s, &field)).collect::<Result<_>>()).collect::<Result<_>>()?;
                Some(Matrix::from_rows(rows, &NFElem::zero(&field))?)
            }
        };
        let frame = CohomologyFrame::new(FrameData {
            name: self.name.clone(),
            field: field.clone(),
            labels: self.labels.clone(),
            degrees: self.degrees.clone(),
            pairing,
            pieces,
            hodge_subbasis: self.hodge_subbasis.clone(),
            c1: self.c1.iter().map(|s| parse_q(s)).collect::<Result<_>>()?,
            dim_c: self.dim_c,
            cone,
            nef_canonical: self.nef_canonical,
            odd_block,
        })?;
        let table = match &self.correlators {
            None => None,
            Some(c) => {
                let coverage = c.coverage.as_deref().map(parse_q).transpose()?;
                let mut t = CorrelatorTable::new(c.absent_is_zero, coverage);
                for e in &c.entries {
                    t.insert(e.insertions.clone(), e.curve.clone(), parse_q(&e.value)?);
                }
                Some(t)
            }
        };
        Ok((frame, table))
    }

    pub fn from_frame(frame: &CohomologyFrame, table: Option<&CorrelatorTable>) -> Self {
        let d = frame.data();
        let n = frame.dim();
        let mut pairing = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = d.pairing.get(i, j);
                if !v.is_zero() {
                    pairing.push((i, j, fmt_rational(v)));
                }
            }
        }
        let pieces = d
            .pieces
            .iter()
            .map(|p| PieceFile {
                p: p.p,
                q: p.q,
                span: p
                    .span
                    .iter()
                    .map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.to_string())).collect())
                    .collect(),
            })
            .collect();
        let cone = frame.cone();
        FrameFile {
            name: d.name.clone(),
            field: FieldFile::describe(&d.field),
            dim_c: d.dim_c,
            labels: d.labels.clone(),
            degrees: d.degrees.clone(),
            pairing,
            pieces,
            hodge_subbasis: d.hodge_subbasis.clone(),
            c1: d.c1.iter().map(fmt_rational).collect(),
            cone: ConeFile {
                labels: cone.labels().to_vec(),
                c1: cone.c1_pairing().to_vec(),
                omega: cone.omega().iter().map(fmt_rational).collect(),
                divisor_pairing: cone.divisor_pairing().iter().map(|r| r.iter().map(fmt_rational).collect()).collect(),
            },
            nef_canonical: d.nef_canonical,
            odd_block: d.odd_block.as_ref().map(|m| (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect()),
            correlators: table.map(|t| CorrelatorFile {
                absent_is_zero: t.absent_is_zero,
                coverage: t.coverage.as_ref().map(fmt_rational),
                entries: t
                    .entries()
                    .map(|((ins, curve), v)| CorrelatorEntry {
                        insertions: ins.clone(),
                        curve: curve.clone(),
                        value: fmt_rational(v),
                    })
                    .collect(),
            }),
        }
    }
}

/// Images of the generators; T-variables are keyed by the label of their
/// Hodge class. Values are either `F_K`-parts or full elements of `S_K` of
/// the generator's degree.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default)]
    pub curves: Vec<String>,
    #[serde(default)]
    pub t: BTreeMap<String, String>,
    /// Polynomials in `t` for a one-parameter family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyFile>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default)]
    pub curves: Vec<String>,
    #[serde(default)]
    pub t: BTreeMap<String, String>,
}

fn f_part(s: &str, field: &Arc<NumberField>, degree: i64) -> Result<LCNumber> {
    let x = parse_selem(s, field)?;
    match x.degree()? {
        None => Ok(LCNumber::zero(field)),
        Some(0) => x.coefficient_in_degree(0),
        Some(d) if d == degree => x.coefficient_in_degree(d),
        Some(d) => Err(Error::DegreeMismatch { expected: format!("b^{degree}"), found: format!("b^{d} in `{s}`") }),
    }
}

fn t_slots(frame: &CohomologyFrame, t: &BTreeMap<String, String>) -> Result<Vec<Option<String>>> {
    let mut out = vec![None; frame.hodge_subbasis().len()];
    for (label, v) in t {
        let k = frame
            .hodge_subbasis()
            .iter()
            .position(|&i| &frame.labels()[i] == label)
            .ok_or_else(|| Error::Parse(format!("`{label}` is not a Hodge class of {}", frame.name())))?;
        out[k] = Some(v.clone());
    }
    Ok(out)
}

impl EvFile {
    pub fn coefficient_field(&self, frame: &CohomologyFrame) -> Result<Arc<NumberField>> {
        match &self.field {
            Some(f) => f.load(),
            None => Ok(frame.field().clone()),
        }
    }

    pub fn load(&self, frame: &CohomologyFrame) -> Result<EvaluationMap> {
        let field = self.coefficient_field(frame)?;
        let sig = frame.signature();
        if self.curves.len() != sig.cone().len() {
            return Err(Error::Parse(format!(
                "{} curve images for {} generators",
                self.curves.len(),
                sig.cone().len()
            )));
        }
        let curves = self
            .curves
            .iter()
            .zip(sig.cone().c1_pairing())
            .map(|(s, c)| f_part(s, &field, 2 * c))
            .collect::<Result<_>>()?;
        let t = t_slots(frame, &self.t)?
            .into_iter()
            .zip(sig.t_degrees())
            .map(|(s, d)| s.map_or(Ok(LCNumber::zero(&field)), |s| f_part(&s, &field, *d)))
            .collect::<Result<_>>()?;
        let q = match (&self.q, sig.q()) {
            (Some(s), Some(q)) => Some(f_part(s, &field, q.unit_degree())?),
            (None, Some(_)) => Some(LCNumber::one(&field)),
            _ => None,
        };
        EvaluationMap::new(sig, &field, q, curves, t)
    }

    pub fn load_family(&self, frame: &CohomologyFrame) -> Result<Option<ParametricEvaluation>> {
        let Some(fam) = &self.family else { return Ok(None) };
        let field = self.coefficient_field(frame)?;
        Ok(Some(family_from_strings(frame, &field, &fam.curves, &fam.t)?))
    }
}

fn family_from_strings(
    frame: &CohomologyFrame,
    field: &Arc<NumberField>,
    curves: &[String],
    t: &BTreeMap<String, String>,
) -> Result<ParametricEvaluation> {
    let sig = frame.signature();
    if curves.len() != sig.cone().len() {
        return Err(Error::Parse(format!("{} curve images for {} generators", curves.len(), sig.cone().len())));
    }
    let zero = Poly::zero(&LCNumber::zero(field));
    let curves = curves.iter().map(|s| parse_family(s, field)).collect::<Result<_>>()?;
    let t = t_slots(frame, t)?
        .into_iter()
        .map(|s| s.map_or(Ok(zero.clone()), |s| parse_family(&s, field)))
        .collect::<Result<_>>()?;
    ParametricEvaluation::new(sig, field, None, curves, t)
}

/// `Q^beta -> t^{c_1 . beta}`, formal parameters to zero.
pub fn default_family(frame: &CohomologyFrame, field: &Arc<NumberField>) -> Result<ParametricEvaluation> {
    let curves: Vec<String> =
        frame.cone().c1_pairing().iter().map(|c| if *c > 0 { format!("t^{c}") } else { "t".into() }).collect();
    family_from_strings(frame, field, &curves, &BTreeMap::new())
}

/// Settings echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub truncation: String,
    pub epsilon: String,
    pub format: OutputFormat,
    pub seed: u64,
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncation: fmt_rational(&default_truncation()),
            epsilon: "1/2".into(),
            format: OutputFormat::Text,
            seed: 0,
            strict: false,
        }
    }
}

impl RunConfig {
    pub fn header(&self) -> String {
        format!(
            "# truncation={} epsilon={} format={} seed={} strict={}",
            self.truncation,
            self.epsilon,
            match self.format {
                OutputFormat::Text => "text",
                OutputFormat::Json => "json",
            },
            self.seed,
            self.strict
        )
    }
}

/// A command's output together with the configuration it ran under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub command: String,
    pub config: RunConfig,
    pub body: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub row: String,
    pub col: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaDump {
    pub frame: String,
    pub model: String,
    pub tau: String,
    pub entries: Vec<KappaEntry>,
    pub hodge_compatible: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub frame: String,
    pub field: String,
    pub size: usize,
    pub lambda: String,
    pub char_poly: String,
    pub squarefree: String,
    pub rows: Vec<crate::invariants::Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentDump {
    pub tuple: Vec<String>,
    pub m: u64,
    pub denominator: u64,
    pub matrix: Vec<Vec<String>>,
    pub det: String,
    pub witness_valuation: String,
    pub tried: usize,
}

/// Input of the rational-combination search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentFile {
    pub field: FieldFile,
    pub scaling: String,
    pub exponents: Vec<String>,
    /// `layers[k][l]`: dense rational matrices, one per basis element and
    /// exponent.
    pub layers: Vec<Vec<Vec<Vec<String>>>>,
    /// Determinant of the scaled composite; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_denominator: Option<u64>,
}

impl DescentFile {
    pub fn load(&self) -> Result<(crate::hodge_descent::CoeffDecomposition, LCNumber, crate::hodge_descent::DescentConfig)> {
        let field = self.field.load()?;
        let zero = Rational::zero();
        let layers = self
            .layers
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|m| {
                        let rows = m.iter().map(|r| r.iter().map(|x| parse_q(x)).collect::<Result<_>>()).collect::<Result<_>>()?;
                        Matrix::from_rows(rows, &zero)
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let decomp = crate::hodge_descent::CoeffDecomposition::new(
            &field,
            parse_q(&self.scaling)?,
            self.exponents.iter().map(|e| parse_q(e)).collect::<Result<_>>()?,
            layers,
        )?;
        let witness = match &self.witness {
            Some(w) => parse_lc(w, &field)?,
            None => decomp.scaled_composite()?.det_division_free()?,
        };
        let mut config = crate::hodge_descent::DescentConfig::default();
        if let Some(m) = self.max_denominator {
            config.max_denominator = m;
        }
        Ok((decomp, witness, config))
    }
}

//! Built-in cohomology frames: the cubic fourfold, projective 4-space, a
//! point, and surfaces with nef canonical class (K3, abelian, synthetic).

use std::sync::Arc;

use num_traits::Zero;

use crate::error::Result;
use crate::graded_ring::CurveCone;
use crate::matrix::Matrix;
use crate::number_field::{NFElem, NumberField};
use crate::quantum_model::{CohomologyFrame, CorrelatorTable, FrameData, HodgePiece};
use crate::scalar::{rint, Rational};

fn unit_vector(field: &Arc<NumberField>, n: usize, i: usize) -> Vec<NFElem> {
    (0..n).map(|j| NFElem::from_int(field, (i == j) as i64)).collect()
}

/// `sum_i c_i e_{idx_i}` with coefficients in the field.
fn combination(field: &Arc<NumberField>, n: usize, parts: &[(usize, NFElem)]) -> Vec<NFElem> {
    let mut v = vec![NFElem::zero(field); n];
    for (i, c) in parts {
        v[*i] = v[*i].try_add(c).expect("same field");
    }
    v
}

fn piece(p: i64, q: i64, span: Vec<Vec<NFElem>>) -> HodgePiece {
    HodgePiece { p, q, span }
}

fn omega_powers(field: &Arc<NumberField>) -> (NFElem, NFElem, NFElem) {
    let w = NFElem::generator(field, "w").expect("Eisenstein field");
    let w2 = w.try_mul(&w).expect("same field");
    (NFElem::one(field), w, w2)
}

/// Basis `1, H, H^2, H^3, H^4, p1..p22` of a cubic fourfold over `Q(w)`.
/// The primitive lattice carries a `-A2` block on `p1, p2` (holding the
/// `(3,1)` and `(1,3)` lines) and `+1` on the remaining classes.
pub fn cubic_fourfold() -> Result<CohomologyFrame> {
    let field = NumberField::eisenstein();
    let n = 27;
    let mut labels: Vec<String> = ["1", "H", "H^2", "H^3", "H^4"].iter().map(|s| s.to_string()).collect();
    labels.extend((1..=22).map(|i| format!("p{i}")));
    let mut degrees = vec![0, 2, 4, 6, 8];
    degrees.extend(std::iter::repeat_n(4, 22));
    let mut pairing = Matrix::zeros(n, n, &Rational::zero());
    for a in 0..5 {
        pairing.set(a, 4 - a, rint(3));
    }
    pairing.set(5, 5, rint(-2));
    pairing.set(6, 6, rint(-2));
    pairing.set(5, 6, rint(1));
    pairing.set(6, 5, rint(1));
    for i in 7..n {
        pairing.set(i, i, rint(1));
    }
    let (one, w, w2) = omega_powers(&field);
    let mut pieces = vec![
        piece(0, 0, vec![unit_vector(&field, n, 0)]),
        piece(1, 1, vec![unit_vector(&field, n, 1)]),
        piece(3, 3, vec![unit_vector(&field, n, 3)]),
        piece(4, 4, vec![unit_vector(&field, n, 4)]),
        piece(3, 1, vec![combination(&field, n, &[(5, one.clone()), (6, w)])]),
        piece(1, 3, vec![combination(&field, n, &[(5, one), (6, w2)])]),
    ];
    let mut middle = vec![unit_vector(&field, n, 2)];
    middle.extend((7..n).map(|i| unit_vector(&field, n, i)));
    pieces.push(piece(2, 2, middle));
    let mut c1 = vec![Rational::zero(); n];
    c1[1] = rint(3);
    let mut line = vec![Rational::zero(); n];
    line[1] = rint(1);
    let cone = CurveCone::new(vec!["line".into()], vec![3], vec![rint(1)])?.with_divisor_pairing(vec![line])?;
    CohomologyFrame::new(FrameData {
        name: "cubic fourfold".into(),
        field,
        labels,
        degrees,
        pairing,
        pieces,
        hodge_subbasis: vec![0, 1, 2, 3, 4],
        c1,
        dim_c: 4,
        cone,
        nef_canonical: false,
        odd_block: None,
    })
}

/// Projective 4-space over `Q(z)`, `z` a primitive fifth root of unity.
pub fn projective_four() -> Result<CohomologyFrame> {
    let field = NumberField::cyclotomic(5)?;
    let n = 5;
    let labels: Vec<String> = ["1", "H", "H^2", "H^3", "H^4"].iter().map(|s| s.to_string()).collect();
    let mut pairing = Matrix::zeros(n, n, &Rational::zero());
    for a in 0..n {
        pairing.set(a, 4 - a, rint(1));
    }
    let pieces = (0..n as i64).map(|k| piece(k, k, vec![unit_vector(&field, n, k as usize)])).collect();
    let mut c1 = vec![Rational::zero(); n];
    c1[1] = rint(5);
    let mut line = vec![Rational::zero(); n];
    line[1] = rint(1);
    let cone = CurveCone::new(vec!["line".into()], vec![5], vec![rint(1)])?.with_divisor_pairing(vec![line])?;
    CohomologyFrame::new(FrameData {
        name: "projective 4-space".into(),
        field,
        labels,
        degrees: vec![0, 2, 4, 6, 8],
        pairing,
        pieces,
        hodge_subbasis: vec![0, 1, 2, 3, 4],
        c1,
        dim_c: 4,
        cone,
        nef_canonical: false,
        odd_block: None,
    })
}

/// Three-point invariants of projective 4-space in degrees 0 and 1.
pub fn projective_four_correlators() -> CorrelatorTable {
    let mut table = CorrelatorTable::new(true, None);
    for a in 1..=4usize {
        for b in a..=4 {
            for c in b..=4 {
                if a + b + c == 4 {
                    table.insert(vec![a, b, c], vec![0], rint(1));
                }
                if a + b + c == 9 {
                    table.insert(vec![a, b, c], vec![1], rint(1));
                }
            }
        }
    }
    table
}

/// A single point.
pub fn point() -> Result<CohomologyFrame> {
    let field = NumberField::rationals();
    CohomologyFrame::new(FrameData {
        name: "point".into(),
        field: field.clone(),
        labels: vec!["1".into()],
        degrees: vec![0],
        pairing: Matrix::identity(1, &Rational::zero()),
        pieces: vec![piece(0, 0, vec![unit_vector(&field, 1, 0)])],
        hodge_subbasis: vec![0],
        c1: vec![Rational::zero()],
        dim_c: 0,
        cone: CurveCone::empty(),
        nef_canonical: true,
        odd_block: None,
    })
}

/// Hodge data of a surface. Odd classes are `e1..e_b1` in degree 1 and
/// `f1..f_b1` in degree 3 with `int e_i f_j = delta_ij`. Hodge vectors
/// are given in coordinates of the respective block.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub name: String,
    pub field: Arc<NumberField>,
    pub b1: usize,
    pub h2_labels: Vec<String>,
    pub h2_pairing: Matrix<Rational>,
    /// `(p, q)` pieces inside `H^2`.
    pub h2_pieces: Vec<HodgePiece>,
    /// `(p, q)` pieces inside `H^1`; the `H^3` pieces are the duals with
    /// type `(p+1, q+1)`, using the same coordinates on `f`.
    pub h1_pieces: Vec<HodgePiece>,
    /// `c_1` in `H^2` coordinates.
    pub c1: Vec<Rational>,
    pub cone: CurveCone,
    pub nef_canonical: bool,
    pub odd_block: Option<Matrix<NFElem>>,
}

impl SurfaceSpec {
    /// Basis order: `1, e.., H^2 classes, f.., pt`.
    pub fn build(&self) -> Result<CohomologyFrame> {
        let field = &self.field;
        let b1 = self.b1;
        let b2 = self.h2_labels.len();
        let n = 2 + 2 * b1 + b2;
        let pt = n - 1;
        let e0 = 1;
        let h0 = 1 + b1;
        let f0 = 1 + b1 + b2;
        let mut labels = vec!["1".to_string()];
        labels.extend((1..=b1).map(|i| format!("e{i}")));
        labels.extend(self.h2_labels.iter().cloned());
        labels.extend((1..=b1).map(|i| format!("f{i}")));
        labels.push("pt".into());
        let mut degrees = vec![0];
        degrees.extend(std::iter::repeat_n(1, b1));
        degrees.extend(std::iter::repeat_n(2, b2));
        degrees.extend(std::iter::repeat_n(3, b1));
        degrees.push(4);
        let mut pairing = Matrix::zeros(n, n, &Rational::zero());
        pairing.set(0, pt, rint(1));
        pairing.set(pt, 0, rint(1));
        for i in 0..b1 {
            pairing.set(e0 + i, f0 + i, rint(1));
            pairing.set(f0 + i, e0 + i, rint(-1));
        }
        for i in 0..b2 {
            for j in 0..b2 {
                pairing.set(h0 + i, h0 + j, self.h2_pairing.get(i, j).clone());
            }
        }
        let embed = |offset: usize, v: &[NFElem]| -> Vec<NFElem> {
            let mut out = vec![NFElem::zero(field); n];
            for (i, x) in v.iter().enumerate() {
                out[offset + i] = x.clone();
            }
            out
        };
        let mut pieces = vec![piece(0, 0, vec![unit_vector(field, n, 0)]), piece(2, 2, vec![unit_vector(field, n, pt)])];
        for p in &self.h1_pieces {
            pieces.push(piece(p.p, p.q, p.span.iter().map(|v| embed(e0, v)).collect()));
            pieces.push(piece(p.p + 1, p.q + 1, p.span.iter().map(|v| embed(f0, v)).collect()));
        }
        for p in &self.h2_pieces {
            pieces.push(piece(p.p, p.q, p.span.iter().map(|v| embed(h0, v)).collect()));
        }
        let mut c1 = vec![Rational::zero(); n];
        for (i, c) in self.c1.iter().enumerate() {
            c1[h0 + i] = c.clone();
        }
        CohomologyFrame::new(FrameData {
            name: self.name.clone(),
            field: field.clone(),
            labels,
            degrees,
            pairing,
            pieces,
            hodge_subbasis: vec![0, h0, pt],
            c1,
            dim_c: 2,
            cone: self.cone.clone(),
            nef_canonical: self.nef_canonical,
            odd_block: self.odd_block.clone(),
        })
    }
}

fn coords(field: &Arc<NumberField>, xs: &[i64]) -> Vec<NFElem> {
    xs.iter().map(|&x| NFElem::from_int(field, x)).collect()
}

/// A K3 surface over `Q(w)`: `h` with `h^2 = 2`, an `A2` block `t1, t2`
/// holding the `(2,0)` and `(0,2)` lines, and nineteen `(-1)` classes.
pub fn k3_surface() -> Result<CohomologyFrame> {
    let field = NumberField::eisenstein();
    let b2 = 22;
    let mut h2_labels = vec!["h".to_string(), "t1".into(), "t2".into()];
    h2_labels.extend((1..=19).map(|i| format!("n{i}")));
    let mut g = Matrix::zeros(b2, b2, &Rational::zero());
    g.set(0, 0, rint(2));
    g.set(1, 1, rint(2));
    g.set(2, 2, rint(2));
    g.set(1, 2, rint(-1));
    g.set(2, 1, rint(-1));
    for i in 3..b2 {
        g.set(i, i, rint(-1));
    }
    let (one, w, w2) = omega_powers(&field);
    let mut two_zero = vec![NFElem::zero(&field); b2];
    two_zero[1] = one.clone();
    two_zero[2] = w;
    let mut zero_two = vec![NFElem::zero(&field); b2];
    zero_two[1] = one;
    zero_two[2] = w2;
    let mut algebraic = vec![unit_vector(&field, b2, 0)];
    algebraic.extend((3..b2).map(|i| unit_vector(&field, b2, i)));
    SurfaceSpec {
        name: "K3 surface".into(),
        field: field.clone(),
        b1: 0,
        h2_labels,
        h2_pairing: g,
        h2_pieces: vec![piece(2, 0, vec![two_zero]), piece(0, 2, vec![zero_two]), piece(1, 1, algebraic)],
        h1_pieces: Vec::new(),
        c1: vec![Rational::zero(); b2],
        cone: CurveCone::empty(),
        nef_canonical: true,
        odd_block: None,
    }
    .build()
}

/// An abelian surface over `Q(w)`: `H^2` is three hyperbolic planes
/// `(u_k, v_k)`, presented through `h = u1 + v1`, `g = u1 - v1`, `u2, v2,
/// u3, v3`.
pub fn abelian_surface() -> Result<CohomologyFrame> {
    let field = NumberField::eisenstein();
    let h2_labels: Vec<String> = ["h", "g", "u2", "v2", "u3", "v3"].iter().map(|s| s.to_string()).collect();
    let mut g = Matrix::zeros(6, 6, &Rational::zero());
    g.set(0, 0, rint(2));
    g.set(1, 1, rint(-2));
    for k in [2, 4] {
        g.set(k, k + 1, rint(1));
        g.set(k + 1, k, rint(1));
    }
    let (one, w, w2) = omega_powers(&field);
    let holo = |a: &NFElem, b: &NFElem| {
        vec![one.clone(), NFElem::zero(&field), a.clone(), a.clone(), b.clone(), b.clone()]
    };
    let h2_pieces = vec![
        piece(2, 0, vec![holo(&w, &w2)]),
        piece(0, 2, vec![holo(&w2, &w)]),
        piece(
            1,
            1,
            vec![
                coords(&field, &[0, 1, 0, 0, 0, 0]),
                coords(&field, &[0, 0, 1, -1, 0, 0]),
                coords(&field, &[0, 0, 0, 0, 1, -1]),
                coords(&field, &[1, 0, 1, 1, 1, 1]),
            ],
        ),
    ];
    let odd = |c: &NFElem| -> Vec<Vec<NFElem>> {
        let z = NFElem::zero(&field);
        vec![vec![one.clone(), c.clone(), z.clone(), z.clone()], vec![z.clone(), z, one.clone(), c.clone()]]
    };
    SurfaceSpec {
        name: "abelian surface".into(),
        field: field.clone(),
        b1: 4,
        h2_labels,
        h2_pairing: g,
        h2_pieces,
        h1_pieces: vec![piece(1, 0, odd(&w)), piece(0, 1, odd(&w2))],
        c1: vec![Rational::zero(); 6],
        cone: CurveCone::empty(),
        nef_canonical: true,
        odd_block: None,
    }
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_frames_validate() {
        let cubic = cubic_fourfold().unwrap();
        assert_eq!(cubic.dim(), 27);
        assert_eq!(cubic.hodge_number(3, 1), 1);
        assert_eq!(cubic.hochschild(2).len(), 1);
        let k3 = k3_surface().unwrap();
        assert_eq!(k3.dim(), 24);
        assert_eq!(k3.hodge_number(2, 0), 1);
        assert_eq!(k3.hodge_number(1, 1), 20);
        let ab = abelian_surface().unwrap();
        assert_eq!(ab.dim(), 16);
        assert_eq!(ab.hochschild(1).len(), 4);
        assert_eq!(projective_four().unwrap().dim(), 5);
        assert_eq!(point().unwrap().dim(), 1);
    }
}

use std::sync::Arc;

use nahodge::blowup::{
    choose_disjoint_shift, run_ledger, telescope_totals, Direction, Ledger, LedgerStep, LedgerTerm, PartialTuple,
};
use nahodge::graded_ring::{EvaluationMap, GradedSeries};
use nahodge::hodge_descent::decompose_span;
use nahodge::invariants::{invariant_tuple, tuple_table, InvariantTuple};
use nahodge::io::{parse_lc, FrameFile};
use nahodge::levi_civita::{LCNumber, SElem};
use nahodge::quantum_model::Subspaces;
use nahodge::matrix::Matrix;
use nahodge::number_field::{NFElem, NumberField};
use nahodge::scalar::{rat, rint, Rational, Ring};
use nahodge::frames;
use nahodge::spectral::{spectrum, BMatrix};
use num_traits::Zero;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn exponent() -> impl Strategy<Value = Rational> {
    (-4i64..=8, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn field(idx: usize) -> Arc<NumberField> {
    match idx {
        0 => NumberField::rationals(),
        1 => NumberField::gaussian(),
        _ => NumberField::eisenstein(),
    }
}

fn lc_number(k: &Arc<NumberField>) -> impl Strategy<Value = LCNumber> {
    let k = k.clone();
    let deg = k.degree();
    prop::collection::vec((exponent(), prop::collection::vec(small_rational(), deg)), 0..4).prop_map(move |terms| {
        let terms = terms
            .into_iter()
            .map(|(e, c)| (e, NFElem::span_recompose(&k, &c).expect("coordinates")))
            .collect();
        LCNumber::from_terms(&k, terms, None).expect("exact terms")
    })
}

fn rational_matrix(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(-3i64..=3, n * n).prop_map(move |v| {
        let rows = v.chunks(n).map(|r| r.iter().map(|&x| rint(x)).collect()).collect();
        Matrix::from_rows(rows, &Rational::zero()).expect("square")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rendered_numbers_parse_back((k, x) in (0usize..3).prop_flat_map(|i| {
        let k = field(i);
        (Just(k.clone()), lc_number(&k))
    })) {
        let back = parse_lc(&x.to_string(), &k).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn span_coordinates_recompose(idx in 0usize..3, coords in prop::collection::vec(small_rational(), 3)) {
        let k = field(idx);
        let c = &coords[..k.degree()];
        let x = NFElem::span_recompose(&k, c).unwrap();
        prop_assert_eq!(x.span_decompose(), c.to_vec());
    }

    #[test]
    fn kernel_vectors_are_annihilated(m in rational_matrix(4), dup in 0usize..4) {
        // copy a row to force rank deficiency half of the time
        let mut m = m;
        if dup < 2 {
            for j in 0..4 {
                let v = m.get(dup, j).clone();
                m.set(dup + 2, j, v);
            }
        }
        let rank = m.rank().unwrap();
        let kernel = m.kernel().unwrap();
        prop_assert_eq!(kernel.len(), 4 - rank);
        for v in &kernel {
            prop_assert!(m.apply(v).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn division_free_determinant_matches_elimination(m in rational_matrix(4)) {
        let det = m.det_division_free().unwrap();
        let rank = m.rank().unwrap();
        prop_assert_eq!(det.is_zero(), rank < 4);
        if rank == 4 {
            let inv = m.inverse().unwrap();
            prop_assert_eq!(m.times(&inv).unwrap(), Matrix::identity(4, &Rational::zero()));
        }
    }

    #[test]
    fn disjoint_shift_separates_spectra(
        spectra in prop::collection::vec(prop::collection::vec(lc_number(&NumberField::rationals()), 1..4), 1..4),
    ) {
        let k = NumberField::rationals();
        let views: Vec<&[LCNumber]> = spectra.iter().map(|s| s.as_slice()).collect();
        let f0 = choose_disjoint_shift(&k, &views);
        for s in &spectra {
            for x in s {
                let moved = x.try_add(&f0).unwrap();
                for t in &spectra {
                    for y in t {
                        prop_assert_ne!(&moved, y);
                    }
                }
            }
        }
    }
}

fn triangular(values: &[LCNumber], upper: &[i64]) -> Matrix<LCNumber> {
    let n = values.len();
    let k = values[0].field().clone();
    let z = LCNumber::zero(&k);
    let mut m = Matrix::zeros(n, n, &z);
    let mut it = upper.iter().cycle();
    for i in 0..n {
        m.set(i, i, values[i].clone());
        for j in i + 1..n {
            m.set(i, j, LCNumber::from_rational(&k, rint(*it.next().unwrap_or(&0))));
        }
    }
    m
}

fn eigen_multiset(m: &Matrix<LCNumber>) -> Vec<(String, usize)> {
    let k = m.proto().field().clone();
    let a = BMatrix::new(m.clone(), vec![0; m.rows()]).unwrap();
    let report = spectrum(&a, &k, &[]).unwrap();
    let mut out: Vec<(String, usize)> = report.eigen.iter().map(|e| (e.value.to_string(), e.multiplicity)).collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_moves_with_a_scalar_shift(
        picks in prop::collection::vec(0usize..3, 1..5),
        upper in prop::collection::vec(-2i64..=2, 1..8),
        shift_exp in exponent(),
        shift_coeff in small_rational().prop_filter("non-zero", |q| !q.is_zero()),
    ) {
        let k = NumberField::rationals();
        let palette = [LCNumber::zero(&k), LCNumber::a(&k), LCNumber::a_pow(&k, rat(1, 2)).scale_rational(&rint(3))];
        let values: Vec<LCNumber> = picks.iter().map(|&p| palette[p].clone()).collect();
        let f0 = LCNumber::monomial(NFElem::from_rational(&k, shift_coeff), shift_exp);
        let m = triangular(&values, &upper);
        let shifted_values: Vec<LCNumber> = values.iter().map(|v| v.try_add(&f0).unwrap()).collect();
        let shifted = triangular(&shifted_values, &upper);
        let mut expected: Vec<(String, usize)> = eigen_multiset(&m)
            .into_iter()
            .map(|(v, mult)| (parse_lc(&v, &k).unwrap().try_add(&f0).unwrap().to_string(), mult))
            .collect();
        expected.sort();
        prop_assert_eq!(eigen_multiset(&shifted), expected);
    }

    #[test]
    fn ledger_equalities_telescope(
        last in prop::array::uniform4(0usize..4),
        steps in prop::collection::vec((any::<bool>(), 2u32..4, prop::array::uniform4(0usize..3)), 1..5),
    ) {
        // built backwards from the last frame so each step balances
        let mut frames = vec![last];
        for (down, codim, centre) in steps.iter().rev() {
            let next = *frames.last().unwrap();
            let prev = if *down {
                std::array::from_fn(|k| next[k] + (*codim as usize - 1) * centre[k])
            } else {
                next
            };
            frames.push(prev);
        }
        frames.reverse();
        let term = |name: String, dim_c: u32, t: [usize; 4]| LedgerTerm {
            name,
            dim_c,
            cohomology_dim: None,
            hochschild2: None,
            hochschild1: None,
            invariants: PartialTuple::known(t),
            satisfies: None,
        };
        let ledger = Ledger {
            name: "random".into(),
            frames: frames.iter().enumerate().map(|(i, t)| term(format!("X{i}"), 4, *t)).collect(),
            steps: steps
                .iter()
                .enumerate()
                .map(|(i, (down, codim, centre))| LedgerStep {
                    direction: if *down { Direction::Down } else { Direction::Up },
                    codim: *codim,
                    center: term(format!("Z{i}"), 4 - codim, *centre),
                })
                .collect(),
        };
        let totals = telescope_totals(&ledger).unwrap();
        for (name, (start, rhs)) in &totals {
            prop_assert_eq!(start, rhs, "{} does not telescope", name);
        }
        let report = run_ledger(&ledger).unwrap();
        prop_assert!(report.equalities.iter().all(|e| e.unexplained == Some(0)));
        prop_assert_eq!(report.audited_steps.len(), steps.len());
    }
}

#[test]
fn frame_files_round_trip_through_json() {
    for frame in [
        frames::cubic_fourfold().unwrap(),
        frames::k3_surface().unwrap(),
        frames::abelian_surface().unwrap(),
        frames::point().unwrap(),
    ] {
        let file = FrameFile::from_frame(&frame, None);
        let json = serde_json::to_string(&file).unwrap();
        let back: FrameFile = serde_json::from_str(&json).unwrap();
        let (loaded, _) = back.load().unwrap();
        assert_eq!(FrameFile::from_frame(&loaded, None), file, "{}", frame.name());
    }
}

fn nf_element(k: &Arc<NumberField>) -> impl Strategy<Value = NFElem> {
    let k = k.clone();
    prop::collection::vec(small_rational(), k.degree()).prop_map(move |c| NFElem::span_recompose(&k, &c).unwrap())
}

fn coordinate_sets(n: usize) -> impl Strategy<Value = [Vec<usize>; 3]> {
    prop::array::uniform3(prop::collection::vec(any::<bool>(), n))
        .prop_map(|masks| masks.map(|m| m.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_arithmetic_is_associative_with_inverses(
        (x, y, z) in (1usize..3).prop_flat_map(|i| {
            let k = field(i);
            (nf_element(&k), nf_element(&k), nf_element(&k))
        }),
    ) {
        let xy_z = x.try_mul(&y).unwrap().try_mul(&z).unwrap();
        let x_yz = x.try_mul(&y.try_mul(&z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        if !x.is_zero() {
            prop_assert_eq!(x.try_mul(&x.try_inv().unwrap()).unwrap(), NFElem::one(x.field()));
        }
    }

    #[test]
    fn tuples_respect_their_bounds(
        picks in prop::collection::vec(0usize..3, 1..5),
        upper in prop::collection::vec(-2i64..=2, 1..8),
        sets in coordinate_sets(4),
    ) {
        let k = NumberField::rationals();
        let palette = [LCNumber::zero(&k), LCNumber::a(&k), LCNumber::from_rational(&k, rint(-2))];
        let values: Vec<LCNumber> = picks.iter().map(|&p| palette[p].clone()).collect();
        let n = values.len();
        let m = triangular(&values, &upper);
        let report = spectrum(&BMatrix::new(m, vec![0; n]).unwrap(), &k, &[]).unwrap();
        let total: usize = report.eigen.iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total, n);
        for e in &report.eigen {
            prop_assert!(e.index <= n);
            prop_assert_eq!(*e.kernel_dims.last().unwrap(), e.multiplicity);
        }
        let basis = |set: &Vec<usize>| -> Vec<Vec<NFElem>> {
            set.iter()
                .filter(|&&i| i < n)
                .map(|&i| (0..n).map(|j| if i == j { NFElem::one(&k) } else { NFElem::zero(&k) }).collect())
                .collect()
        };
        let subspaces = Subspaces { hodge: basis(&sets[0]), hochschild2: basis(&sets[1]), hochschild1: basis(&sets[2]) };
        for row in tuple_table(&report, &subspaces).unwrap() {
            prop_assert!(row.tuple.gamma < row.multiplicity);
            prop_assert!(row.tuple.rho <= row.multiplicity);
        }
        // a value off the spectrum carries the zero tuple
        let off = LCNumber::a_pow(&k, rint(7));
        prop_assert_eq!(invariant_tuple(&report, &subspaces, &off).unwrap(), InvariantTuple::new(0, 0, 0, 0));
    }

    #[test]
    fn evaluation_preserves_degree(
        t in prop::collection::vec(
            (small_rational().prop_filter("non-zero", |q| !q.is_zero()), (1i64..=8, 1i64..=3).prop_map(|(n, d)| rat(n, d))),
            3,
        ),
        which in 0usize..3,
    ) {
        let frame = frames::k3_surface().unwrap();
        let k = NumberField::eisenstein();
        let images = t.iter().map(|(c, e)| LCNumber::monomial(NFElem::from_rational(&k, c.clone()), e.clone())).collect();
        let ev = EvaluationMap::new(frame.signature(), &k, None, vec![], images).unwrap();
        let x = GradedSeries::t_variable(frame.signature(), &k, which);
        let value = ev.evaluate_series(&x, None).unwrap();
        prop_assert_eq!(value.degree().unwrap(), Some(frame.signature().t_degrees()[which]));
    }

    #[test]
    fn span_maps_recompose_exactly(
        entries in prop::collection::vec((nf_element(&NumberField::eisenstein()), exponent(), -1i64..=1), 4),
    ) {
        let k = NumberField::eisenstein();
        let zero = SElem::zero(&k);
        let mut f = Matrix::zeros(2, 2, &zero);
        for (idx, (c, e, d)) in entries.into_iter().enumerate() {
            f.set(idx / 2, idx % 2, SElem::homogeneous(LCNumber::monomial(c, e), 2 * d));
        }
        let span = decompose_span(&f, &k, 0).unwrap();
        prop_assert!(span.components_rational());
        prop_assert_eq!(span.recompose().unwrap(), f);
    }
}

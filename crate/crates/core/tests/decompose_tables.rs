use std::sync::Arc;

use hecke_core::abe::{bs_generator, find_isomorphism, shifted, std_object, tensor};
use hecke_core::decompose::*;
use hecke_core::field::{Field, PrimeField, Rationals};
use hecke_core::hecke::{Hecke, LaurentPoly};
use hecke_core::poly::{validate_realization, Realization};
use hecke_core::weyl::AffineWeyl;

fn real<F: Field>(label: &str, f: F) -> Arc<Realization<F>> {
    let w = Arc::new(AffineWeyl::from_label(label).unwrap());
    Arc::new(validate_realization(w, f).unwrap())
}

fn engine<F: Field>(label: &str, f: F, bound: usize) -> LklEngine<F> {
    let mut e = LklEngine::new(real(label, f)).unwrap();
    e.run(bound).unwrap();
    e
}

#[test]
fn endomorphism_algebras() {
    let r = real("A1", PrimeField::new(5).unwrap());
    let w = &r.weyl;
    let x = w.parse("1:01").unwrap();
    assert_eq!(end0(&std_object(&r, &x, 0)).unwrap().dim(), 1);
    let b = bs_generator(&r, 1).unwrap();
    assert_eq!(end0(&b).unwrap().dim(), 1);
    let bb = tensor(&b, &b).unwrap();
    let alg = end0(&bb).unwrap();
    assert!(alg.dim() >= 2);
    let one = alg.identity.clone();
    for i in 0..alg.dim() {
        let mut e = vec![r.field().zero(); alg.dim()];
        e[i] = r.field().one();
        assert_eq!(alg.mul(&one, &e), e);
        assert_eq!(alg.mul(&e, &one), e);
    }
}

#[test]
fn split_bs_square() {
    for p in [2u64, 3, 5] {
        let label = if p == 2 { "GL2" } else { "A1" };
        let r = real(label, PrimeField::new(p).unwrap());
        let b = bs_generator(&r, 1).unwrap();
        let single = split(&b, DEFAULT_SEED).unwrap();
        assert_eq!(single.pieces.len(), 1);
        let bb = tensor(&b, &b).unwrap();
        let dec = split(&bb, DEFAULT_SEED).unwrap();
        assert!(verify_decomposition(&bb, &dec).unwrap());
        let mut shifts: Vec<i32> = dec.summands.iter().map(|s| s.shift).collect();
        shifts.sort();
        assert_eq!(shifts, vec![-1, 1], "ell {p}");
        for s in &dec.summands {
            assert_eq!(&s.top, r.weyl.generator(1));
            assert_eq!(s.multiplicity, 1);
            let back = shifted(&b, -s.shift);
            assert!(find_isomorphism(&s.object, &back, 3).unwrap().is_some()
                || find_isomorphism(&s.object, &b, 3).unwrap().is_some());
        }
    }
}

#[test]
fn split_is_deterministic() {
    let r = real("A2", PrimeField::new(3).unwrap());
    let b1 = bs_generator(&r, 1).unwrap();
    let b2 = bs_generator(&r, 2).unwrap();
    let m = tensor(&tensor(&b1, &b2).unwrap(), &b1).unwrap();
    let a = split(&m, 11).unwrap();
    let b = split(&m, 11).unwrap();
    assert_eq!(a.summands.len(), 2);
    let key = |d: &Decomposition<PrimeField>| {
        d.summands.iter().map(|s| (s.top.clone(), s.shift, s.multiplicity)).collect::<Vec<_>>()
    };
    assert_eq!(key(&a), key(&b));
}

#[test]
fn conjugated_generator_is_indecomposable() {
    let r = real("A2", PrimeField::new(5).unwrap());
    let w = &r.weyl;
    for (x, s) in [("0:1", 2), ("0:12", 1), ("1:", 1)] {
        let x = w.parse(x).unwrap();
        let xi = w.inverse(&x);
        let m = tensor(&tensor(&std_object(&r, &x, 0), &bs_generator(&r, s).unwrap()).unwrap(), &std_object(&r, &xi, 0)).unwrap();
        let dec = split(&m, DEFAULT_SEED).unwrap();
        assert_eq!(dec.pieces.len(), 1);
        let conj = w.multiply(&w.multiply(&x, w.generator(s)), &xi);
        assert_eq!(dec.summands[0].top, conj);
    }
}

#[test]
fn dihedral_rationals_example() {
    let eng = engine("A1", Rationals, 3);
    let w = eng.weyl();
    let x = w.parse("0:010").unwrap();
    let c = eng.character(&x).unwrap();
    let mut count = 0;
    for (y, _) in w.enumerate_ball(3) {
        if w.bruhat_leq(&y, &x).unwrap() {
            assert_eq!(c.coeff(&y), LaurentPoly::monomial(3 - w.length(&y) as i32, 1));
            count += 1;
        }
    }
    assert_eq!(count, c.terms.len());
}

#[test]
fn characteristic_two_dihedral_correction() {
    // In characteristic 2 the affine A1 canonical basis first deviates at
    // length 3: ch(B_{sts}) = b_{sts} + b_s.
    let eng = engine("GL2", PrimeField::new(2).unwrap(), 3);
    let w = eng.weyl();
    let h = Hecke::new(w);
    for (x, s) in [("0:010", 0), ("0:101", 1)] {
        let x = w.parse(x).unwrap();
        let expect = h.kl_basis(&x).add(&h.kl_basis(w.generator(s)));
        assert_eq!(eng.character(&x).unwrap(), expect);
    }
}

#[test]
fn table_invariants_small() {
    let cases: Vec<(&str, Option<u64>, usize)> = vec![
        ("A1", Some(3), 5),
        ("A1", Some(5), 5),
        ("GL2", Some(2), 4),
        ("A2", Some(2), 4),
        ("A2", Some(3), 4),
        ("B2", Some(5), 3),
        ("A2", None, 4),
    ];
    for (label, ell, bound) in cases {
        let weyl_arc = Arc::new(AffineWeyl::from_label(label).unwrap());
        let (table, word_ok) = match ell {
            Some(p) => {
                let r = Arc::new(validate_realization(weyl_arc.clone(), PrimeField::new(p).unwrap()).unwrap());
                let mut e = LklEngine::new(r).unwrap();
                e.run(bound).unwrap();
                let ok = e.chars.keys().all(|w| e.check_word_independence(w).unwrap());
                (e.table(label, ell, bound), ok)
            }
            None => {
                let r = Arc::new(validate_realization(weyl_arc.clone(), Rationals).unwrap());
                let mut e = LklEngine::new(r).unwrap();
                e.run(bound).unwrap();
                let ok = e.chars.keys().all(|w| e.check_word_independence(w).unwrap());
                (e.table(label, ell, bound), ok)
            }
        };
        let w = &*weyl_arc;
        let h = Hecke::new(w);
        assert!(word_ok, "{label} {ell:?}");
        for x in table.labels() {
            assert_eq!(table.get(w, &x, &x), LaurentPoly::one());
            let mut ch = hecke_core::hecke::HeckeElement::zero();
            for e in table.entries.iter().filter(|e| e.w == x) {
                assert!(w.bruhat_leq(&e.y, &x).unwrap());
                assert!(e.poly.is_nonnegative());
                ch.add_term(&e.y, &e.poly);
                let xi = w.inverse(&x);
                let yi = w.inverse(&e.y);
                assert_eq!(table.get(w, &yi, &xi), e.poly, "{label} symmetry");
            }
            assert_eq!(h.bar(&ch), ch, "{label} bar");
        }
        let tilt = table.tilting();
        for (i, x) in tilt.rows.iter().enumerate() {
            for (j, y) in tilt.cols.iter().enumerate() {
                let v = tilt.matrix[i][j];
                assert_eq!(v, table.get(w, y, x).eval_one());
                if x == y {
                    assert_eq!(v, 1);
                }
                if v != 0 {
                    assert!(w.bruhat_leq(y, x).unwrap());
                }
            }
        }
    }
}

#[test]
fn omega_extension() {
    let eng = engine("A1", PrimeField::new(3).unwrap(), 4);
    let w = eng.weyl();
    let table = eng.table("A1", Some(3), 4);
    let o = w.omega_generator().clone();
    for e in &table.entries {
        let ow = w.multiply(&o, &e.w);
        let oy = w.multiply(&o, &e.y);
        assert_eq!(table.get(w, &oy, &ow), e.poly);
        assert!(table.get(w, &oy, &e.w).is_zero());
    }
}

#[test]
fn hom_formula_small() {
    let eng = engine("A1", PrimeField::new(3).unwrap(), 3);
    let w = eng.weyl();
    let labels: Vec<_> = eng.chars.keys().cloned().collect();
    for x in &labels {
        for y in &labels {
            let c = hom_dimension_check(&eng, x, y).unwrap();
            assert!(c.equal, "{} {} {} {}", w.format(x), w.format(y), c.hom_rank, c.formula);
        }
    }
    let e = w.identity();
    let s = w.generator(1).clone();
    assert_eq!(hom_dimension_check(&eng, &e, &e).unwrap().hom_rank, 1);
    assert_eq!(hom_dimension_check(&eng, &s, &s).unwrap().hom_rank, 2);
    for x in &labels {
        assert!(switch_matches(&eng, x, DEFAULT_SEED).unwrap());
    }
}

#[test]
fn commuting_generators_hom() {
    // In affine B2 the affine generator commutes with generator 2.
    let eng = engine("B2", PrimeField::new(5).unwrap(), 1);
    let w = eng.weyl();
    let (s, t) = (w.generator(0).clone(), w.generator(2).clone());
    assert_eq!(w.multiply(&s, &t), w.multiply(&t, &s));
    let c = hom_dimension_check(&eng, &s, &t).unwrap();
    assert_eq!((c.hom_rank, c.formula), (1, 1));
}

#[test]
fn exports_round_trip() {
    let eng = engine("A2", PrimeField::new(3).unwrap(), 3);
    let w = eng.weyl();
    let table = eng.table("A2", Some(3), 3);
    let json = table.to_json(w);
    assert_eq!(LklTable::from_json(w, &json).unwrap(), table);
    let csv = table.to_csv(w);
    assert_eq!(LklTable::from_csv(w, &csv).unwrap(), table);
    assert!(table.to_latex(w).contains("\\begin{tabular}"));
    let again = engine("A2", PrimeField::new(3).unwrap(), 3).table("A2", Some(3), 3);
    assert_eq!(again.to_json(w), json);
    let empty = LklTable {
        cartan_label: "A2".into(),
        ell: Some(3),
        length_bound: 0,
        entries: Vec::new(),
    };
    let csv = empty.to_csv(w);
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(LklTable::from_csv(w, &csv).unwrap(), empty);
    assert_eq!(LklTable::from_json(w, &empty.to_json(w)).unwrap(), empty);
}

#[test]
fn tilting_rows_rationals() {
    let eng = engine("A1", Rationals, 3);
    let w = eng.weyl();
    let tilt = eng.table("A1", None, 3).tilting();
    let x = w.parse("0:010").unwrap();
    for (y, _) in w.enumerate_ball(3) {
        let expect = i64::from(w.bruhat_leq(&y, &x).unwrap());
        assert_eq!(tilt.entry(&x, &y), expect);
    }
    let e = w.identity();
    for y in &tilt.cols {
        assert_eq!(tilt.entry(&e, y), i64::from(*y == e));
    }
}

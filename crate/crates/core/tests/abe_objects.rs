use std::sync::Arc;

use hecke_core::abe::*;
use hecke_core::field::{Field, PrimeField, Rationals};
use hecke_core::hecke::{Hecke, HeckeElement, LaurentPoly};
use hecke_core::poly::{validate_realization, Realization};
use hecke_core::weyl::AffineWeyl;
use hecke_core::AffineWeylElement;

fn real<F: Field>(label: &str, f: F) -> Arc<Realization<F>> {
    let w = Arc::new(AffineWeyl::from_label(label).unwrap());
    Arc::new(validate_realization(w, f).unwrap())
}

fn f5() -> PrimeField {
    PrimeField::new(5).unwrap()
}

#[test]
fn standard_objects() {
    let r = real("A1", f5());
    let w = &r.weyl;
    let fe = std_object(&r, &w.identity(), 0);
    assert_eq!(fe.rank(), 1);
    assert_eq!(fe.character(), HeckeElement::basis(&w.identity()));
    let t = w.translation(&[2]);
    let ft = std_object(&r, &t, 0);
    assert_eq!(ft.support(), vec![t.clone()]);
    assert!(ft.check_right_polynomiality());
    let x = w.parse("0:01").unwrap();
    let f3 = std_object(&r, &x, 3);
    assert_eq!(f3.min_deg(), 3);
    // Flag shifts are normalized so that F_w(ℓ(w)) has character H_w.
    assert_eq!(f3.character(), HeckeElement::term(&x, LaurentPoly::monomial(2 - 3, 1)));
    assert_eq!(hom_graded(&fe, &fe, 0).unwrap().dim(), 1);
    // Distinct standard objects share no flag element.
    let fs = std_object(&r, w.generator(1), 0);
    for d in -4..=4 {
        assert_eq!(hom_graded_unchecked(&fe, &fs, d).dim(), 0);
    }
}

#[test]
fn bs_generator_data() {
    for (label, p) in [("A1", 5), ("A1", 3), ("A2", 5), ("B2", 5), ("GL2", 2)] {
        let r = real(label, PrimeField::new(p).unwrap());
        let h = Hecke::new(&r.weyl);
        for s in 0..r.weyl.num_generators() {
            let b = bs_generator(&r, s).unwrap();
            assert_eq!(b.rank(), 2);
            let mut degs = b.row_degs.clone();
            degs.sort();
            assert_eq!(degs, vec![-1, 1], "{label} {s}");
            assert_eq!(b.character(), h.bs_char(s), "{label} {s}");
            assert!(b.check_right_polynomiality());
            let den_ok = b.loc_matrix().iter().flatten().all(|q| r.denominators_are_roots(q));
            assert!(den_ok);
        }
    }
}

#[test]
fn tensor_square_of_bs() {
    let r = real("A1", f5());
    let h = Hecke::new(&r.weyl);
    let b = bs_generator(&r, 1).unwrap();
    let bb = tensor(&b, &b).unwrap();
    let mut expect = h.bs_char(1);
    expect = expect.scale(&LaurentPoly::from_terms([(-1, 1), (1, 1)]));
    assert_eq!(bb.character(), expect);
    assert_eq!(gamma_character(&bb).unwrap(), expect);
    let counts = flag_counts(&bb.flag);
    assert_eq!(counts[&r.weyl.identity()], 2);
    assert_eq!(counts[r.weyl.generator(1)], 2);
}

#[test]
fn standard_objects_multiply() {
    let r = real("A2", f5());
    let w = &r.weyl;
    let elems: Vec<AffineWeylElement> = w.ball_sorted(2);
    for x in &elems {
        for y in &elems {
            let t = tensor(&std_object(&r, x, 0), &std_object(&r, y, 0)).unwrap();
            let xy = std_object(&r, &w.multiply(x, y), 0);
            assert!(find_isomorphism(&t, &xy, 1).unwrap().is_some());
        }
    }
}

#[test]
fn unit_and_associativity() {
    let r = real("A2", f5());
    let w = &r.weyl;
    let fe = std_object(&r, &w.identity(), 0);
    let b1 = bs_generator(&r, 1).unwrap();
    let b2 = bs_generator(&r, 2).unwrap();
    let b0 = bs_generator(&r, 0).unwrap();
    let left = tensor(&fe, &b1).unwrap();
    assert_eq!(left.character(), b1.character());
    assert!(find_isomorphism(&left, &b1, 1).unwrap().is_some());
    let a = tensor(&tensor(&b1, &b2).unwrap(), &b0).unwrap();
    let c = tensor(&b1, &tensor(&b2, &b0).unwrap()).unwrap();
    assert_eq!(a.character(), c.character());
    assert!(find_isomorphism(&a, &c, 1).unwrap().is_some());
}

#[test]
fn bott_samelson_flags() {
    for label in ["A1", "A2", "B2"] {
        let r = real(label, Rationals);
        let w = &r.weyl;
        let h = Hecke::new(w);
        let o = w.omega_generator().clone();
        for word in [vec![1, 0], vec![0, 1, 0], vec![1, 0, 1, 0]] {
            let bs = bott_samelson(&r, &o, &word).unwrap();
            assert_eq!(bs.character(), h.bs_product(&o, &word), "{label} {word:?}");
            assert_eq!(gamma_character(&bs).unwrap(), bs.character());
            assert!(bs.check_right_polynomiality());
            // Flag elements are the products ω·s₁^{e₁}⋯sₙ^{eₙ}.
            let mut direct: Vec<AffineWeylElement> = Vec::new();
            for mask in 0..(1u32 << word.len()) {
                let mut x = o.clone();
                for (k, &s) in word.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        x = w.multiply(&x, w.generator(s));
                    }
                }
                direct.push(x);
            }
            let mut got: Vec<AffineWeylElement> = bs.flag.iter().map(|l| l.element.clone()).collect();
            direct.sort_by_key(|x| w.sort_key(x));
            got.sort_by_key(|x| w.sort_key(x));
            assert_eq!(got, direct);
        }
    }
}

#[test]
fn switch_duality() {
    let r = real("A2", f5());
    let w = &r.weyl;
    let x = w.parse("1:120").unwrap();
    let sx = switch(&std_object(&r, &x, 0)).unwrap();
    assert!(find_isomorphism(&sx, &std_object(&r, &w.inverse(&x), 0), 1).unwrap().is_some());
    for s in 0..3 {
        let b = bs_generator(&r, s).unwrap();
        let sb = switch(&b).unwrap();
        assert!(find_isomorphism(&sb, &b, 1).unwrap().is_some());
    }
    let b1 = bs_generator(&r, 1).unwrap();
    let b0 = bs_generator(&r, 0).unwrap();
    let prod = tensor(&b1, &b0).unwrap();
    let lhs = switch(&prod).unwrap();
    let rhs = tensor(&switch(&b0).unwrap(), &switch(&b1).unwrap()).unwrap();
    assert!(find_isomorphism(&lhs, &rhs, 1).unwrap().is_some());
    let twice = switch(&switch(&prod).unwrap()).unwrap();
    assert!(find_isomorphism(&twice, &prod, 1).unwrap().is_some());
    for d in -3..=3 {
        assert_eq!(
            hom_graded_unchecked(&prod, &b1, d).dim(),
            hom_graded_unchecked(&lhs, &switch(&b1).unwrap(), d).dim()
        );
    }
}

#[test]
fn exact_sequences() {
    for (label, p) in [("A1", 5), ("A2", 3), ("GL2", 2)] {
        let r = real(label, PrimeField::new(p).unwrap());
        for s in 0..r.weyl.num_generators() {
            for swapped in [false, true] {
                let wit = exactness_witness(&r, s, swapped).unwrap();
                assert!(wit.composite_zero);
                assert_eq!(wit.kernel_rank, 1);
                assert!(wit.exact(), "{label} {s} {swapped}");
            }
        }
    }
}

#[test]
fn graded_homs_of_bs() {
    let r = real("A1", f5());
    let b = bs_generator(&r, 1).unwrap();
    let dims: Vec<usize> = (-2..=4).map(|d| hom_graded(&b, &b, d).unwrap().dim()).collect();
    // Free over R = k[x] on generators of degrees 0 and 2.
    assert_eq!(dims, vec![0, 0, 1, 0, 2, 0, 2]);
    let total = hom_total_rank(&b, &b).unwrap();
    assert_eq!(total.eval_one(), 2);
    assert_eq!(total, LaurentPoly::from_terms([(0, 1), (2, 1)]));
}

#[test]
fn compose_respects_identity() {
    let r = real("A2", f5());
    let b = tensor(&bs_generator(&r, 1).unwrap(), &bs_generator(&r, 2).unwrap()).unwrap();
    let id = identity_morphism(&b);
    for phi in hom_graded(&b, &b, 2).unwrap().basis {
        assert!(morphisms_equal(&compose(&r, &id, &phi), &phi));
        assert!(morphisms_equal(&compose(&r, &phi, &id), &phi));
    }
}

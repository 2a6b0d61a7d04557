use hecke_core::hecke::{Hecke, HeckeElement, LaurentPoly};
use hecke_core::weyl::AffineWeyl;
use proptest::prelude::*;

fn v(k: i32) -> LaurentPoly {
    LaurentPoly::monomial(k, 1)
}

#[test]
fn quadratic_relation() {
    let w = AffineWeyl::from_label("A1").unwrap();
    let h = Hecke::new(&w);
    for i in 0..2 {
        let s = w.generator(i).clone();
        let hs = HeckeElement::basis(&s);
        let mut expect = HeckeElement::basis(&w.identity());
        expect.add_term(&s, &LaurentPoly::from_terms([(-1, 1), (1, -1)]));
        assert_eq!(h.multiply(&hs, &hs), expect);
    }
}

#[test]
fn omega_is_a_group() {
    let w = AffineWeyl::from_label("A1").unwrap();
    let h = Hecke::new(&w);
    let o = w.omega_generator().clone();
    let oi = w.inverse(&o);
    let p = h.multiply(&HeckeElement::basis(&o), &HeckeElement::basis(&oi));
    assert_eq!(p, HeckeElement::basis(&w.identity()));
}

#[test]
fn bar_examples() {
    let w = AffineWeyl::from_label("A1").unwrap();
    let h = Hecke::new(&w);
    let e = w.identity();
    assert_eq!(h.bar(&HeckeElement::term(&e, v(1))), HeckeElement::term(&e, v(-1)));
    let s = w.generator(1).clone();
    let mut expect = HeckeElement::basis(&s);
    expect.add_term(&e, &LaurentPoly::from_terms([(1, 1), (-1, -1)]));
    assert_eq!(h.bar(&HeckeElement::basis(&s)), expect);
    let x = w.parse("0:01").unwrap();
    let hx = HeckeElement::basis(&x);
    assert_eq!(h.bar(&h.bar(&hx)), hx);
}

#[test]
fn kl_basis_small() {
    let w = AffineWeyl::from_label("A1").unwrap();
    let h = Hecke::new(&w);
    let e = w.identity();
    assert_eq!(h.kl_basis(&e), HeckeElement::basis(&e));
    let s = w.generator(1).clone();
    assert_eq!(h.kl_basis(&s), h.bs_char(1));
    // Dihedral groups: every h_{y,w} is v^{ℓ(w)-ℓ(y)} on the Bruhat interval.
    for word in ["0:010", "0:1010", "0:01010"] {
        let x = w.parse(word).unwrap();
        let b = h.kl_basis(&x);
        let lx = w.length(&x) as i32;
        let mut expect = HeckeElement::zero();
        for (y, _) in w.enumerate_ball(lx as usize) {
            if w.bruhat_leq(&y, &x).unwrap() {
                expect.add_term(&y, &v(lx - w.length(&y) as i32));
            }
        }
        assert_eq!(b, expect, "{word}");
    }
}

#[test]
fn bs_square() {
    for label in ["A1", "A2", "B2"] {
        let w = AffineWeyl::from_label(label).unwrap();
        let h = Hecke::new(&w);
        for i in 0..w.num_generators() {
            let b = h.bs_char(i);
            let lhs = h.multiply(&b, &b);
            assert_eq!(lhs, b.scale(&LaurentPoly::from_terms([(-1, 1), (1, 1)])));
        }
    }
}

#[test]
fn kl_basis_invariants() {
    for (label, bound) in [("A1", 7), ("A2", 5), ("B2", 4), ("G2", 4), ("GL3", 3)] {
        let w = AffineWeyl::from_label(label).unwrap();
        let h = Hecke::new(&w);
        for (x, lx) in w.enumerate_ball(bound) {
            let b = h.kl_basis(&x);
            assert_eq!(h.bar(&b), b, "{label} {}", w.format(&x));
            assert_eq!(b.coeff(&x), LaurentPoly::one());
            for (y, p) in &b.terms {
                if *y == x {
                    continue;
                }
                assert!(w.bruhat_leq(y, &x).unwrap(), "{label}");
                assert!(p.min_exp().unwrap() >= 1, "{label}");
                assert!(w.length(y) < lx);
                assert!(p.is_nonnegative());
            }
        }
    }
}

#[test]
fn omega_twist_of_kl_basis() {
    let w = AffineWeyl::from_label("A2").unwrap();
    let h = Hecke::new(&w);
    let o = w.omega_generator().clone();
    for (x, _) in w.enumerate_ball(3) {
        let ox = w.multiply(&o, &x);
        assert_eq!(h.kl_basis(&ox), h.mul_omega_left(&o, &h.kl_basis(&x)));
    }
}

fn element(w: &AffineWeyl, picks: &[(usize, i32, i64)]) -> HeckeElement {
    let ball = w.ball_sorted(3);
    let mut out = HeckeElement::zero();
    for &(k, e, c) in picks {
        out.add_term(&ball[k % ball.len()], &LaurentPoly::monomial(e, c));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn multiplication_is_associative(
        a in prop::collection::vec((0usize..40, -2i32..3, -3i64..4), 1..4),
        b in prop::collection::vec((0usize..40, -2i32..3, -3i64..4), 1..4),
        c in prop::collection::vec((0usize..40, -2i32..3, -3i64..4), 1..4),
    ) {
        let w = AffineWeyl::from_label("A2").unwrap();
        let h = Hecke::new(&w);
        let (a, b, c) = (element(&w, &a), element(&w, &b), element(&w, &c));
        prop_assert_eq!(h.multiply(&h.multiply(&a, &b), &c), h.multiply(&a, &h.multiply(&b, &c)));
    }

    #[test]
    fn bar_is_a_ring_involution(
        a in prop::collection::vec((0usize..40, -2i32..3, -3i64..4), 1..4),
        b in prop::collection::vec((0usize..40, -2i32..3, -3i64..4), 1..4),
    ) {
        let w = AffineWeyl::from_label("B2").unwrap();
        let h = Hecke::new(&w);
        let (a, b) = (element(&w, &a), element(&w, &b));
        prop_assert_eq!(h.bar(&h.bar(&a)), a.clone());
        prop_assert_eq!(h.bar(&h.multiply(&a, &b)), h.multiply(&h.bar(&a), &h.bar(&b)));
    }
}

use std::sync::Arc;

use hecke_core::field::{Field, PrimeField, Rationals};
use hecke_core::poly::{validate_realization, Mono, Poly, Realization};
use hecke_core::weyl::AffineWeyl;
use hecke_core::Error;
use proptest::prelude::*;

fn real_p(label: &str, p: u64) -> Realization<PrimeField> {
    let w = Arc::new(AffineWeyl::from_label(label).unwrap());
    validate_realization(w, PrimeField::new(p).unwrap()).unwrap()
}

fn poly_from(real: &Realization<PrimeField>, terms: &[(Vec<u32>, i64)]) -> Poly<PrimeField> {
    let ring = &real.ring;
    let n = real.nvars();
    terms.iter().fold(Poly::zero(), |acc, (e, c)| {
        let m = Mono::from_exps(&e[..n]);
        ring.add(&acc, &ring.monomial(m, ring.field.from_i64(*c)))
    })
}

#[test]
fn action_examples() {
    let real = real_p("A2", 5);
    let w = &real.weyl;
    for s in 1..=2 {
        let a = real.alpha(s).clone();
        assert_eq!(real.act(w.generator(s), &a), real.ring.neg(&a));
    }
    let p = real.ring.mul(real.delta(1), real.alpha(2));
    assert_eq!(real.act(&w.identity(), &p), p);
    let t = w.translation(&[1, -1]);
    assert_eq!(real.act(&t, &p), p);
}

#[test]
fn demazure_examples() {
    for (label, p) in [("A1", 5), ("A2", 7), ("B2", 3), ("G2", 5)] {
        let real = real_p(label, p);
        let ring = &real.ring;
        for s in 0..real.weyl.num_generators() {
            assert!(real.demazure(s, &ring.one()).unwrap().is_zero());
            assert_eq!(real.demazure(s, real.delta(s)).unwrap(), ring.one(), "{label} {s}");
            let a2 = ring.mul(real.alpha(s), real.alpha(s));
            assert!(real.demazure(s, &a2).unwrap().is_zero());
        }
    }
}

#[test]
fn fraction_normal_forms() {
    let real = real_p("A1", 5);
    let ring = &real.ring;
    let a = real.alpha(1).clone();
    let f = real.fraction(ring.mul(&a, &a), vec![a.clone()]);
    let n = real.fraction_normalize(&f);
    assert!(n.denominator.is_empty());
    assert_eq!(n.numerator, a);
    let g = real.fraction(ring.add(&a, &ring.one()), vec![a.clone()]);
    assert_eq!(real.fraction_normalize(&g), g);
    let z = real.fraction(Poly::zero(), vec![a.clone()]);
    assert!(real.fraction_normalize(&z).denominator.is_empty());
}

#[test]
fn realization_validation() {
    let w = Arc::new(AffineWeyl::from_label("PGL2").unwrap());
    assert!(validate_realization(w.clone(), PrimeField::new(5).unwrap()).is_ok());
    assert!(validate_realization(w.clone(), Rationals).is_ok());
    let w = Arc::new(AffineWeyl::from_label("A1").unwrap());
    match validate_realization(w, PrimeField::new(2).unwrap()) {
        Err(Error::Degenerate { .. }) => {}
        other => panic!("expected degenerate realization, got {:?}", other.map(|_| ())),
    }
    for label in ["A1", "PGL2", "A2", "B2", "G2", "GL2", "GL3"] {
        let w = Arc::new(AffineWeyl::from_label(label).unwrap());
        assert!(validate_realization(w, Rationals).is_ok(), "{label}");
    }
}

#[test]
fn root_forms_only_denominators() {
    let real = real_p("A2", 5);
    let forms = real.root_forms();
    // Three positive roots of A2 up to sign.
    assert_eq!(forms.len(), 3);
}

fn terms_strategy() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0u32..3, 2), -4i64..5), 0..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn action_is_a_group_action(t in terms_strategy(), a in 0usize..6, b in 0usize..6) {
        let real = real_p("A2", 7);
        let w = &real.weyl;
        let p = poly_from(&real, &t);
        let lhs = real.act_fin(w.finite_mul(a, b), &p);
        let rhs = real.act_fin(a, &real.act_fin(b, &p));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn demazure_splitting(t in terms_strategy(), s in 0usize..3, ell in prop::sample::select(vec![3u64, 5, 7])) {
        let real = real_p("A2", ell);
        let ring = &real.ring;
        let p = poly_from(&real, &t);
        let p1 = real.demazure(s, &p).unwrap();
        let p0 = ring.sub(&p, &ring.mul(real.delta(s), &p1));
        let fin = real.weyl.finite_image(real.weyl.generator(s));
        prop_assert_eq!(real.act_fin(fin, &p0), p0.clone());
        prop_assert_eq!(real.act_fin(fin, &p1), p1.clone());
        prop_assert_eq!(ring.add(&p0, &ring.mul(real.delta(s), &p1)), p);
    }

    #[test]
    fn fraction_products_associate(
        t1 in terms_strategy(), t2 in terms_strategy(), t3 in terms_strategy(),
        d1 in 0usize..3, d2 in 0usize..3, d3 in 0usize..3,
    ) {
        let real = real_p("A2", 5);
        let forms = real.root_forms();
        let f = real.fraction(poly_from(&real, &t1), vec![forms[d1].clone()]);
        let g = real.fraction(poly_from(&real, &t2), vec![forms[d2].clone()]);
        let h = real.fraction(poly_from(&real, &t3), vec![forms[d3].clone(), forms[d1].clone()]);
        let lhs = real.fraction_normalize(&real.fraction_mul(&real.fraction_mul(&f, &g), &h));
        let rhs = real.fraction_normalize(&real.fraction_mul(&f, &real.fraction_mul(&g, &h)));
        prop_assert_eq!(&lhs, &rhs);
        prop_assert!(real.denominators_are_roots(&lhs));
    }
}

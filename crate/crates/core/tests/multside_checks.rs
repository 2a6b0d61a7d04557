use std::sync::Arc;

use hecke_core::field::{Field, PrimeField, Rationals};
use hecke_core::multside::*;
use hecke_core::poly::validate_realization;
use hecke_core::weyl::AffineWeyl;
use proptest::prelude::*;

fn weyl(label: &str) -> AffineWeyl {
    AffineWeyl::from_label(label).unwrap()
}

fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

#[test]
fn invariant_generators_examples() {
    let w = weyl("A1");
    let g = invariant_generators(&w, &Rationals).unwrap();
    let alg = LaurentAlgebra::new(Rationals, 1);
    assert_eq!(g, vec![alg.add(&alg.mono(&[1]), &alg.mono(&[-1]))]);
    let w = weyl("A2");
    let g = invariant_generators(&w, &Rationals).unwrap();
    assert_eq!(g.len(), 2);
    assert!(g.iter().all(|x| x.terms.len() == 3));
    let alg = LaurentAlgebra::new(Rationals, 2);
    for s in 1..=2 {
        let fin = w.finite_image(w.generator(s));
        for x in &g {
            assert_eq!(&alg.act(w.weight_matrix(fin), x), x);
        }
    }
    assert!(invariant_generators(&weyl("GL2"), &Rationals).is_err());
    assert!(invariant_generators(&weyl("PGL2"), &Rationals).is_err());
}

#[test]
fn pittie_steinberg_examples() {
    let w = weyl("A1");
    let sb = SteinbergBasis::new(&w, &Rationals).unwrap();
    assert_eq!(sb.basis.iter().map(|b| sb.alg.render(b)).collect::<Vec<_>>(), vec!["1", "x"]);
    // x² = (x + x⁻¹)·x − 1
    let c = sb.expand(&sb.alg.mono(&[2])).unwrap();
    let chi = sb.alg.add(&sb.alg.mono(&[1]), &sb.alg.mono(&[-1]));
    assert_eq!(c[0], sb.alg.scale(&sb.alg.one(), &Rationals.from_i64(-1)));
    assert_eq!(c[1], chi);
    for (label, rank) in [("A1", 2), ("A2", 6), ("B2", 8)] {
        let r = pittie_steinberg_check(&weyl(label), &Rationals, 2).unwrap();
        assert!(r.pass, "{label}");
        assert_eq!(r.rank, rank);
    }
    let r = pittie_steinberg_check(&weyl("A2"), &PrimeField::new(2).unwrap(), 2).unwrap();
    assert!(r.pass);
}

#[test]
fn presentations_rank_one() {
    let w = weyl("A1");
    assert_eq!(render_relations(&w, 0), vec!["x - y"]);
    assert_eq!(render_relations(&w, 1), vec!["xy - 1"]);
    for m in 1..=3 {
        let ctx = MultContext::new(&w, &Rationals, m).unwrap();
        let d = ctx.d_algebra().unwrap();
        assert_eq!(d.dim, 4 * m);
        for fin in 0..2 {
            let rels = m_relations(&w, fin);
            let rel = ctx.element(&d, &rels).unwrap();
            let q = ctx.quotient(&d, &[rel]);
            assert!(ctx.isomorphism(&q, &ctx.m_module(fin)).is_some());
        }
        // W_f = {1, s}, so 𝓑_s is 𝒪(D) itself.
        assert!(ctx.isomorphism(&d, &ctx.b_module(0).unwrap()).is_some());
    }
}

#[test]
fn presentations_rank_two() {
    let w = weyl("A2");
    let ctx = MultContext::new(&w, &Rationals, 1).unwrap();
    let d = ctx.d_algebra().unwrap();
    assert_eq!(d.dim, 36);
    for fin in 0..w.finite_order() {
        let rels = m_relations(&w, fin);
        let gens: Vec<_> = rels.chunks(2).map(|pair| ctx.element(&d, pair).unwrap()).collect();
        let q = ctx.quotient(&d, &gens);
        assert!(ctx.isomorphism(&q, &ctx.m_module(fin)).is_some());
    }
}

#[test]
fn convolution_laws() {
    for label in ["A1", "A2"] {
        let w = weyl(label);
        let ctx = MultContext::new(&w, &Rationals, 1).unwrap();
        let me = ctx.m_module(0);
        let b = ctx.b_module(0).unwrap();
        for fin in 0..w.finite_order() {
            let m = ctx.m_module(fin);
            assert!(ctx.isomorphism(&ctx.convolve(&me, &m), &m).is_some());
            assert!(ctx.isomorphism(&ctx.convolve(&m, &me), &m).is_some());
            for fin2 in 0..w.finite_order() {
                let c = ctx.convolve(&m, &ctx.m_module(fin2));
                let target = ctx.m_module(w.finite_mul(fin, fin2));
                assert!(ctx.isomorphism(&c, &target).is_some(), "{label} {fin} {fin2}");
            }
        }
        assert!(ctx.isomorphism(&ctx.convolve(&me, &b), &b).is_some());
        let s = w.finite_image(w.generator(1));
        let ms = ctx.m_module(s);
        let left = ctx.convolve(&ctx.convolve(&b, &ms), &b);
        let right = ctx.convolve(&b, &ctx.convolve(&ms, &b));
        assert!(ctx.isomorphism(&left, &right).is_some());
    }
}

#[test]
fn bs_absorbs_ms() {
    let w = weyl("A1");
    let ctx = MultContext::new(&w, &Rationals, 3).unwrap();
    let b = ctx.b_module(0).unwrap();
    let ms = ctx.m_module(1);
    assert!(ctx.isomorphism(&ctx.convolve(&b, &ms), &b).is_some());
    assert!(ctx.isomorphism(&ctx.convolve(&ms, &b), &b).is_some());
    let bb = ctx.convolve(&b, &b);
    assert_eq!(bb.dim, 2 * b.dim);
    assert!(ctx.isomorphism(&bb, &ctx.direct_sum(&b, &b)).is_some());
    assert!(ctx.isomorphism(&b, &ctx.direct_sum(&ms, &ctx.m_module(0))).is_none());
}

#[test]
fn exact_sequences_all_levels() {
    for label in ["A1", "A2", "B2"] {
        let w = weyl(label);
        for m in 1..=3 {
            let ctx = MultContext::new(&w, &Rationals, m).unwrap();
            for i in 0..w.rank() {
                let recs = exactness_check(&ctx, i).unwrap();
                assert!(all_pass(&recs), "{label} {m} {recs:?}");
            }
        }
    }
    let ctx = MultContext::new(&weyl("A1"), &PrimeField::new(2).unwrap(), 1).unwrap();
    let recs = exactness_check(&ctx, 0).unwrap();
    assert_eq!(recs[0].got, "2 4 2");
    assert!(all_pass(&recs));
}

#[test]
fn completion_dimensions() {
    for label in ["A1", "A2", "B2"] {
        let w = weyl(label);
        for m in 1..=3 {
            for recs in [
                completion_check(&w, &Rationals, m).unwrap(),
                completion_check(&w, &PrimeField::new(7).unwrap(), m).unwrap(),
            ] {
                assert!(all_pass(&recs), "{label} {m} {recs:?}");
            }
        }
    }
    let t = LocalTorus::new(&weyl("A1"), &Rationals, 2).unwrap();
    assert_eq!(t.dim(), 4);
    assert_eq!(t.invariant_dim(&weyl("A1")), 2);
}

#[test]
fn additive_completion() {
    for label in ["A1", "A2", "B2", "GL2"] {
        let w = Arc::new(weyl(label));
        let real = validate_realization(w, PrimeField::new(7).unwrap()).unwrap();
        for m in 1..=3 {
            assert!(all_pass(&additive_completion_check(&real, m).unwrap()), "{label} {m}");
        }
    }
    let real = validate_realization(Arc::new(weyl("A2")), PrimeField::new(3).unwrap()).unwrap();
    assert!(additive_completion_check(&real, 1).is_err());
}

#[test]
fn steinberg_sections() {
    for n in [2, 3] {
        let recs = steinberg_section_check(n).unwrap();
        assert!(all_pass(&recs));
        // Both signed-permutation lifts are exercised.
        assert!(recs.iter().any(|r| r.inputs.contains("lift=-1")));
    }
    assert!(steinberg_section_check(4).is_err());
}

#[test]
fn universal_centralizer_rank_one() {
    for p in [3u64, 5, 7] {
        assert!(all_pass(&jsigma_rank1(&PrimeField::new(p).unwrap())));
    }
    assert!(all_pass(&jsigma_rank1(&Rationals)));
    let recs = jsigma_rank1(&PrimeField::new(2).unwrap());
    assert!(all_pass(&recs));
    assert!(recs.iter().any(|r| r.name == "jsigma-char2-singular"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn steinberg_expansion_reconstructs(
        terms in prop::collection::vec((prop::collection::vec(-2i64..3, 2), -3i64..4), 1..4),
        fin in 0usize..6,
    ) {
        let w = weyl("A2");
        let sb = SteinbergBasis::new(&w, &Rationals).unwrap();
        let alg = &sb.alg;
        let f = terms.iter().fold(alg.zero(), |acc, (l, c)| alg.add(&acc, &alg.term(l, Rationals.from_i64(*c))));
        let coeffs = sb.expand(&f).unwrap();
        let back = coeffs.iter().zip(&sb.basis).fold(alg.zero(), |acc, (c, e)| alg.add(&acc, &alg.mul(c, e)));
        prop_assert_eq!(&back, &f);
        for c in &coeffs {
            prop_assert_eq!(&alg.act(w.weight_matrix(fin), c), c);
        }
    }

    #[test]
    fn weyl_action_is_multiplicative(
        a in prop::collection::vec((prop::collection::vec(-2i64..3, 2), -3i64..4), 1..4),
        b in prop::collection::vec((prop::collection::vec(-2i64..3, 2), -3i64..4), 1..4),
        fin in 0usize..8,
    ) {
        let w = weyl("B2");
        let alg = LaurentAlgebra::new(PrimeField::new(5).unwrap(), 2);
        let mk = |t: &[(Vec<i64>, i64)]| t.iter().fold(alg.zero(), |acc, (l, c)| alg.add(&acc, &alg.term(l, alg.field.from_i64(*c))));
        let (a, b) = (mk(&a), mk(&b));
        let m = w.weight_matrix(fin);
        prop_assert_eq!(alg.act(m, &alg.mul(&a, &b)), alg.mul(&alg.act(m, &a), &alg.act(m, &b)));
    }
}

//! Verification suites: each returns named check records, so a driver can
//! report them and exit nonzero on any failure.

use std::collections::HashMap;
use std::sync::Arc;

use crate::abe::{bott_samelson, gamma_character};
use crate::decompose::{classical_table, hom_dimension_check, switch_matches, LklEngine, LklTable};
use crate::error::{Error, Result};
use crate::field::{CoeffField, Field};
use crate::hecke::{Hecke, HeckeElement, LaurentPoly};
use crate::multside::{
    additive_completion_check, completion_check, exactness_check, jsigma_rank1, pittie_steinberg_check,
    steinberg_section_check, MultContext,
};
use crate::poly::validate_realization;
use crate::report::CheckRecord;
use crate::weyl::{AffineWeyl, AffineWeylElement};
use crate::with_field;

const GAMMA_MAX_LEN: usize = 3;

pub const SUITES: &[&str] = &["weyl", "hecke", "lkl", "hom-formula", "multside", "steinberg"];

/// Length formula against breadth-first word distance, Bruhat order against
/// the lifting property, and reduced-word independence of lower sets.
pub fn weyl_suite(weyl: &AffineWeyl, bound: usize) -> Vec<CheckRecord> {
    let label = &weyl.datum.cartan_label;
    let ball = weyl.enumerate_ball(bound);
    let tag = format!("{label} bound={bound}");
    let bad_len = ball.iter().filter(|(x, d)| weyl.length(x) != *d).count();
    let mut out = vec![
        CheckRecord::new("length-formula", tag.clone(), 0, bad_len),
        CheckRecord::new(
            "ball-size-positive",
            tag.clone(),
            true,
            ball.iter().filter(|(_, d)| *d == bound).count() > 0 || bound == 0,
        ),
    ];
    // Length is constant on Ω-cosets on both sides.
    let powers = weyl.omega_order().unwrap_or(3).max(1) as i64;
    let bad_omega = (1..powers)
        .chain([-1])
        .map(|k| weyl.omega_power(k))
        .map(|o| {
            ball.iter()
                .filter(|(x, d)| weyl.length(&weyl.multiply(&o, x)) != *d || weyl.length(&weyl.multiply(x, &o)) != *d)
                .count()
        })
        .sum::<usize>();
    out.push(CheckRecord::new("length-omega-cosets", tag.clone(), 0, bad_omega));
    let elems: Vec<AffineWeylElement> = ball.iter().map(|(x, _)| x.clone()).collect();
    let mut memo = HashMap::new();
    let mut bad_bruhat = 0;
    let mut bad_words = 0;
    let small: Vec<&AffineWeylElement> = elems.iter().filter(|x| weyl.length(x) + 1 <= bound.max(1)).collect();
    for x in &small {
        let lower = weyl.lower_set(x);
        for word in weyl.all_reduced_words(x) {
            if weyl.lower_set_for_word(x, &word) != lower {
                bad_words += 1;
            }
        }
        for y in &elems {
            if lower.contains(y) != bruhat_lifting(weyl, y, x, &mut memo) {
                bad_bruhat += 1;
            }
        }
    }
    out.push(CheckRecord::new("bruhat-lifting", tag.clone(), 0, bad_bruhat));
    out.push(CheckRecord::new("bruhat-word-independence", tag.clone(), 0, bad_words));
    let mut bad_group = 0;
    for x in elems.iter().take(40) {
        let xi = weyl.inverse(x);
        if weyl.multiply(x, &xi) != weyl.identity() || weyl.length(&xi) != weyl.length(x) {
            bad_group += 1;
        }
        for y in elems.iter().take(12) {
            let lhs = weyl.length(&weyl.multiply(x, y));
            if lhs > weyl.length(x) + weyl.length(y) {
                bad_group += 1;
            }
        }
    }
    out.push(CheckRecord::new("group-laws", tag, 0, bad_group));
    out
}

fn bruhat_lifting(
    w: &AffineWeyl,
    y: &AffineWeylElement,
    x: &AffineWeylElement,
    memo: &mut HashMap<(AffineWeylElement, AffineWeylElement), bool>,
) -> bool {
    if let Some(&b) = memo.get(&(y.clone(), x.clone())) {
        return b;
    }
    let (ox, _) = w.omega_decompose(x);
    let (oy, _) = w.omega_decompose(y);
    let lx = w.length(x);
    let ly = w.length(y);
    let res = if ox != oy || ly > lx {
        false
    } else if lx == 0 {
        x == y
    } else {
        let s = w
            .simple_reflections()
            .iter()
            .find(|s| w.length(&w.multiply(x, s)) < lx)
            .expect("descent")
            .clone();
        let xs = w.multiply(x, &s);
        let ys = w.multiply(y, &s);
        if w.length(&ys) < ly {
            bruhat_lifting(w, &ys, &xs, memo)
        } else {
            bruhat_lifting(w, y, &xs, memo)
        }
    };
    memo.insert((y.clone(), x.clone()), res);
    res
}

/// Classical Kazhdan–Lusztig basis properties.
pub fn hecke_suite(weyl: &AffineWeyl, bound: usize) -> Vec<CheckRecord> {
    let h = Hecke::new(weyl);
    let tag = format!("{} bound={bound}", weyl.datum.cartan_label);
    let (mut bar_bad, mut shape_bad, mut neg) = (0, 0, 0);
    for (x, _) in weyl.enumerate_ball(bound) {
        let b = h.kl_basis(&x);
        if h.bar(&b) != b {
            bar_bad += 1;
        }
        for (y, p) in &b.terms {
            let ok = if *y == x {
                *p == LaurentPoly::one()
            } else {
                weyl.bruhat_leq(y, &x).unwrap_or(false) && p.min_exp().is_some_and(|e| e >= 1)
            };
            if !ok {
                shape_bad += 1;
            }
            if !p.is_nonnegative() {
                neg += 1;
            }
        }
    }
    let v_sum = LaurentPoly::from_terms([(-1, 1), (1, 1)]);
    let quad_bad = (0..weyl.num_generators())
        .filter(|&i| {
            let b = h.bs_char(i);
            h.multiply(&b, &b) != b.scale(&v_sum)
        })
        .count();
    vec![
        CheckRecord::new("kl-bar-invariant", tag.clone(), 0, bar_bad),
        CheckRecord::new("kl-degree-bound", tag.clone(), 0, shape_bad),
        CheckRecord::new("kl-nonnegative", tag.clone(), 0, neg),
        CheckRecord::new("bs-quadratic", tag, 0, quad_bad),
    ]
}

/// Builds the ℓ-KL engine, failing with a usage error when the realization
/// is degenerate for the field.
pub fn lkl_engine<F: Field>(weyl: &Arc<AffineWeyl>, field: F, bound: usize) -> Result<LklEngine<F>> {
    let real = validate_realization(weyl.clone(), field).map_err(|e| match e {
        Error::Degenerate { .. } => Error::Usage(e.to_string()),
        other => other,
    })?;
    let mut engine = LklEngine::new(Arc::new(real))?;
    engine.run(bound)?;
    Ok(engine)
}

pub fn lkl_table(weyl: &Arc<AffineWeyl>, label: &str, cf: CoeffField, bound: usize) -> Result<LklTable> {
    let ell = match cf {
        CoeffField::Prime(p) => Some(p),
        CoeffField::Rationals => None,
    };
    with_field!(cf, |f| Ok(lkl_engine(weyl, f, bound)?.table(label, ell, bound)))
}

/// Table invariants: unitriangularity, Bruhat support, positivity, symmetry,
/// bar invariance, tilting evaluation, and agreement with the classical
/// table in characteristic zero.
pub fn table_checks(weyl: &AffineWeyl, table: &LklTable, tag: &str) -> Vec<CheckRecord> {
    let h = Hecke::new(weyl);
    let (mut diag, mut support, mut neg, mut sym, mut bar) = (0, 0, 0, 0, 0);
    let labels = table.labels();
    let mut chars: HashMap<AffineWeylElement, HeckeElement> = HashMap::new();
    for e in &table.entries {
        chars.entry(e.w.clone()).or_insert_with(HeckeElement::zero).add_term(&e.y, &e.poly);
        if !weyl.bruhat_leq(&e.y, &e.w).unwrap_or(false) {
            support += 1;
        }
        if !e.poly.is_nonnegative() {
            neg += 1;
        }
        if table.get(weyl, &weyl.inverse(&e.y), &weyl.inverse(&e.w)) != e.poly {
            sym += 1;
        }
    }
    for w in &labels {
        if table.get(weyl, w, w) != LaurentPoly::one() {
            diag += 1;
        }
        let c = &chars[w];
        if &h.bar(c) != c {
            bar += 1;
        }
    }
    let tilt = table.tilting();
    let mut tilt_bad = 0;
    for (i, w) in tilt.rows.iter().enumerate() {
        for (j, y) in tilt.cols.iter().enumerate() {
            let v = tilt.matrix[i][j];
            let ok = v == table.get(weyl, y, w).eval_one()
                && (w != y || v == 1)
                && (v == 0 || weyl.bruhat_leq(y, w).unwrap_or(false));
            if !ok {
                tilt_bad += 1;
            }
        }
    }
    let mut out = vec![
        CheckRecord::new("lkl-diagonal", tag.to_string(), 0, diag),
        CheckRecord::new("lkl-bruhat-support", tag.to_string(), 0, support),
        CheckRecord::new("lkl-nonnegative", tag.to_string(), 0, neg),
        CheckRecord::new("lkl-symmetry", tag.to_string(), 0, sym),
        CheckRecord::new("lkl-bar-invariant", tag.to_string(), 0, bar),
        CheckRecord::new("tilting-evaluation", tag.to_string(), 0, tilt_bad),
    ];
    if table.ell.is_none() {
        let classical = classical_table(weyl, &table.cartan_label, table.length_bound);
        let diff = classical
            .entries
            .iter()
            .filter(|e| table.get(weyl, &e.y, &e.w) != e.poly)
            .count()
            + table
                .entries
                .iter()
                .filter(|e| classical.get(weyl, &e.y, &e.w) != e.poly)
                .count();
        out.push(CheckRecord::new("classical-agreement", tag.to_string(), 0, diff));
    }
    out
}

pub fn engine_checks<F: Field>(engine: &LklEngine<F>, tag: &str, seed: u64) -> Result<Vec<CheckRecord>> {
    let weyl = engine.weyl();
    let h = Hecke::new(weyl);
    let mut words_bad = 0;
    let mut factor_bad = 0;
    let mut switch_bad = 0;
    for w in engine.chars.keys() {
        if !engine.check_word_independence(w)? {
            words_bad += 1;
        }
        if !switch_matches(engine, w, seed)? {
            switch_bad += 1;
        }
        let word = weyl.reduced_word(w);
        let bs = bott_samelson(&engine.real, &weyl.identity(), &word)?;
        let expect = h.bs_product(&weyl.identity(), &word);
        // The localization-based character grows like 2^{2ℓ(w)}; the flag
        // character is checked at every length.
        let gamma_ok = word.len() > GAMMA_MAX_LEN || gamma_character(&bs)? == expect;
        if bs.character() != expect || !gamma_ok {
            factor_bad += 1;
        }
    }
    Ok(vec![
        CheckRecord::new("reduced-word-independence", tag.to_string(), 0, words_bad),
        CheckRecord::new("bs-character-factorization", tag.to_string(), 0, factor_bad),
        CheckRecord::new("switch-inverse", tag.to_string(), 0, switch_bad),
    ])
}

pub fn lkl_suite(weyl: &Arc<AffineWeyl>, cf: CoeffField, bound: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let label = weyl.datum.cartan_label.clone();
    let tag = format!("{label} field={cf} bound={bound}");
    let ell = match cf {
        CoeffField::Prime(p) => Some(p),
        CoeffField::Rationals => None,
    };
    with_field!(cf, |f| {
        let engine = lkl_engine(weyl, f, bound)?;
        let table = engine.table(&label, ell, bound);
        let mut out = table_checks(weyl, &table, &tag);
        out.extend(engine_checks(&engine, &tag, seed)?);
        Ok(out)
    })
}

/// `rank Hom•(B_w, B_y) = Σ_z h_{z,w}(1) h_{z,y}(1)` for all pairs up to the bound.
pub fn hom_formula_suite(weyl: &Arc<AffineWeyl>, cf: CoeffField, bound: usize) -> Result<Vec<CheckRecord>> {
    with_field!(cf, |f| {
        let engine = lkl_engine(weyl, f, bound)?;
        let labels: Vec<AffineWeylElement> = engine.chars.keys().cloned().collect();
        let mut out = Vec::new();
        for w in &labels {
            for y in &labels {
                let c = hom_dimension_check(&engine, w, y)?;
                out.push(CheckRecord::new(
                    "hom-formula",
                    format!("{} field={cf} w={} y={}", weyl.datum.cartan_label, c.w, c.y),
                    c.formula,
                    c.hom_rank,
                ));
            }
        }
        Ok(out)
    })
}

/// Pittie–Steinberg, both exact sequences, completion dimensions, the
/// products `𝓜_w ⊛ 𝓜_y ≅ 𝓜_{wy}` and the additive analogue.
pub fn multside_suite(weyl: &AffineWeyl, cf: CoeffField, level: usize) -> Result<Vec<CheckRecord>> {
    if level == 0 || level > 3 {
        return Err(Error::Usage("truncation level must be 1, 2 or 3".into()));
    }
    let label = weyl.datum.cartan_label.clone();
    with_field!(cf, |f| {
        let mut out = Vec::new();
        let ps = pittie_steinberg_check(weyl, &f, 2)?;
        out.push(CheckRecord::new(
            "pittie-steinberg-rank",
            format!("{label} field={cf}"),
            weyl.finite_order(),
            ps.rank,
        ));
        out.push(CheckRecord::flag("pittie-steinberg-certificate", format!("{label} field={cf} window=2"), ps.pass));
        for m in 1..=level {
            let ctx = MultContext::new(weyl, &f, m)?;
            for i in 0..weyl.rank() {
                out.extend(exactness_check(&ctx, i)?);
            }
            out.extend(completion_check(weyl, &f, m)?);
        }
        let ctx = MultContext::new(weyl, &f, 1)?;
        let d = ctx.d_algebra()?;
        out.push(CheckRecord::new(
            "d-algebra-dim",
            format!("{label} level=1"),
            weyl.finite_order() * ctx.torus.dim(),
            d.dim,
        ));
        let n = weyl.finite_order();
        let mut bad = 0;
        for a in 0..n {
            for b in 0..n {
                let c = ctx.convolve(&ctx.m_module(a), &ctx.m_module(b));
                if ctx.isomorphism(&c, &ctx.m_module(weyl.finite_mul(a, b))).is_none() {
                    bad += 1;
                }
            }
        }
        out.push(CheckRecord::new("m-products", format!("{label} level=1 pairs={}", n * n), 0, bad));
        let p = f.characteristic();
        if p == 0 || (n as u64) % p != 0 {
            let real = validate_realization(Arc::new(weyl.clone()), f.clone())?;
            for m in 1..=level {
                out.extend(additive_completion_check(&real, m)?);
            }
        }
        Ok(out)
    })
}

/// Steinberg sections for SL₂, SL₃ and the rank-one centralizer.
pub fn steinberg_suite(cf: CoeffField) -> Result<Vec<CheckRecord>> {
    let mut out = steinberg_section_check(2)?;
    out.extend(steinberg_section_check(3)?);
    with_field!(cf, |f| out.extend(jsigma_rank1(&f)));
    Ok(out)
}

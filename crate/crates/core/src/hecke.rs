//! Hecke algebra of the extended affine Weyl group over `Z[v, v⁻¹]`,
//! normalized by `H_s² = 1 + (v⁻¹ − v)H_s`, with the bar involution and the
//! Kazhdan–Lusztig basis `b_w ∈ H_w + Σ_{y<w} vZ[v] H_y`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::weyl::{AffineWeyl, AffineWeylElement};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i32, i64>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms().collect::<Vec<(i32, i64)>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<(i32, i64)> = Vec::deserialize(d)?;
        Ok(LaurentPoly::from_terms(v))
    }
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(exp: i32, coeff: i64) -> Self {
        let mut p = Self::default();
        p.add_term(exp, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, i64)>) -> Self {
        let mut p = Self::default();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: i32, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let c = self.coeffs.entry(exp).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i32) -> i64 {
        self.coeffs.get(&exp).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e, c * k)))
    }

    pub fn shift(&self, k: i32) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e + k, c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::default();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                p.add_term(e1 + e2, c1 * c2);
            }
        }
        p
    }

    /// `v ↦ v⁻¹`
    pub fn bar(&self) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (-e, c)))
    }

    pub fn eval_one(&self) -> i64 {
        self.coeffs.values().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|&c| c >= 0)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let body = match (e, a) {
                (0, _) => a.to_string(),
                (1, 1) => "v".to_string(),
                (_, 1) => format!("v^{e}"),
                (1, _) => format!("{a}v"),
                _ => format!("{a}v^{e}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeckeElement {
    pub terms: BTreeMap<AffineWeylElement, LaurentPoly>,
}

impl HeckeElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(w: &AffineWeylElement) -> Self {
        Self::term(w, LaurentPoly::one())
    }

    pub fn term(w: &AffineWeylElement, p: LaurentPoly) -> Self {
        let mut h = Self::default();
        h.add_term(w, &p);
        h
    }

    pub fn add_term(&mut self, w: &AffineWeylElement, p: &LaurentPoly) {
        if p.is_zero() {
            return;
        }
        let e = self.terms.entry(w.clone()).or_default();
        *e = e.add(p);
        if e.is_zero() {
            self.terms.remove(w);
        }
    }

    pub fn coeff(&self, w: &AffineWeylElement) -> LaurentPoly {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut h = self.clone();
        for (w, p) in &other.terms {
            h.add_term(w, p);
        }
        h
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&LaurentPoly::monomial(0, -1)))
    }

    pub fn scale(&self, p: &LaurentPoly) -> Self {
        let mut h = Self::default();
        for (w, q) in &self.terms {
            h.add_term(w, &q.mul(p));
        }
        h
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &AffineWeylElement> {
        self.terms.keys()
    }
}

/// Hecke algebra operations tied to one extended affine Weyl group, with a
/// per-instance cache of Kazhdan–Lusztig basis elements.
pub struct Hecke<'a> {
    pub weyl: &'a AffineWeyl,
    kl_cache: Mutex<HashMap<AffineWeylElement, HeckeElement>>,
}

impl<'a> Hecke<'a> {
    pub fn new(weyl: &'a AffineWeyl) -> Self {
        Hecke {
            weyl,
            kl_cache: Mutex::new(HashMap::new()),
        }
    }

    /// `a · H_s` for generator number `i`.
    pub fn mul_gen_right(&self, a: &HeckeElement, i: usize) -> HeckeElement {
        let w = self.weyl;
        let s = w.generator(i);
        let q = LaurentPoly::from_terms([(-1, 1), (1, -1)]);
        let mut out = HeckeElement::zero();
        for (x, c) in &a.terms {
            let xs = w.multiply(x, s);
            out.add_term(&xs, c);
            if w.length(&xs) < w.length(x) {
                out.add_term(x, &c.mul(&q));
            }
        }
        out
    }

    /// `H_s · a`
    pub fn mul_gen_left(&self, i: usize, a: &HeckeElement) -> HeckeElement {
        let w = self.weyl;
        let s = w.generator(i);
        let q = LaurentPoly::from_terms([(-1, 1), (1, -1)]);
        let mut out = HeckeElement::zero();
        for (x, c) in &a.terms {
            let sx = w.multiply(s, x);
            out.add_term(&sx, c);
            if w.length(&sx) < w.length(x) {
                out.add_term(x, &c.mul(&q));
            }
        }
        out
    }

    /// `a · H_ω` for a length-zero element.
    pub fn mul_omega_right(&self, a: &HeckeElement, omega: &AffineWeylElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (x, c) in &a.terms {
            out.add_term(&self.weyl.multiply(x, omega), c);
        }
        out
    }

    pub fn mul_omega_left(&self, omega: &AffineWeylElement, a: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (x, c) in &a.terms {
            out.add_term(&self.weyl.multiply(omega, x), c);
        }
        out
    }

    pub fn multiply(&self, a: &HeckeElement, b: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (y, d) in &b.terms {
            let (omega, _) = self.weyl.omega_decompose(y);
            let mut acc = self.mul_omega_right(&a.scale(d), &omega);
            for i in self.weyl.reduced_word(y) {
                acc = self.mul_gen_right(&acc, i);
            }
            out = out.add(&acc);
        }
        out
    }

    /// `H_s + v`
    pub fn bs_char(&self, i: usize) -> HeckeElement {
        let mut h = HeckeElement::basis(self.weyl.generator(i));
        h.add_term(&self.weyl.identity(), &LaurentPoly::monomial(1, 1));
        h
    }

    /// `H_ω (H_{s₁}+v)⋯(H_{sₙ}+v)`
    pub fn bs_product(&self, omega: &AffineWeylElement, word: &[usize]) -> HeckeElement {
        let mut h = HeckeElement::basis(omega);
        let v = LaurentPoly::monomial(1, 1);
        for &i in word {
            h = self.mul_gen_right(&h, i).add(&h.scale(&v));
        }
        h
    }

    pub fn bar(&self, a: &HeckeElement) -> HeckeElement {
        let w = self.weyl;
        let q = LaurentPoly::from_terms([(1, 1), (-1, -1)]);
        let mut out = HeckeElement::zero();
        for (x, c) in &a.terms {
            let (omega, _) = w.omega_decompose(x);
            let mut acc = HeckeElement::term(&omega, c.bar());
            for i in w.reduced_word(x) {
                // (H_s)⁻¹ = H_s + (v − v⁻¹)
                acc = self.mul_gen_right(&acc, i).add(&acc.scale(&q));
            }
            out = out.add(&acc);
        }
        out
    }

    /// Kazhdan–Lusztig basis element `b_w`.
    pub fn kl_basis(&self, w: &AffineWeylElement) -> HeckeElement {
        if let Some(b) = self.kl_cache.lock().expect("cache").get(w) {
            return b.clone();
        }
        let weyl = self.weyl;
        let (omega, wp) = weyl.omega_decompose(w);
        let b = if omega != weyl.identity() {
            self.mul_omega_left(&omega, &self.kl_basis(&wp))
        } else if weyl.length(w) == 0 {
            HeckeElement::basis(w)
        } else {
            let word = weyl.reduced_word(w);
            let last = *word.last().expect("nonempty");
            let u = weyl.multiply(w, weyl.generator(last));
            let mut c = self.multiply(&self.kl_basis(&u), &self.bs_char(last));
            // Remove non-positive powers below the top, longest elements first.
            let mut ys: Vec<AffineWeylElement> = c.support().filter(|y| *y != w).cloned().collect();
            ys.sort_by_key(|y| std::cmp::Reverse(weyl.sort_key(y)));
            for y in ys {
                let p = c.coeff(&y);
                let mut q = LaurentPoly::zero();
                for (e, k) in p.terms() {
                    if e == 0 {
                        q.add_term(0, k);
                    } else if e < 0 {
                        q.add_term(e, k);
                        q.add_term(-e, k);
                    }
                }
                if !q.is_zero() {
                    c = c.sub(&self.kl_basis(&y).scale(&q));
                }
            }
            c
        };
        self.kl_cache
            .lock()
            .expect("cache")
            .insert(w.clone(), b.clone());
        b
    }

    /// `h_{y,w}`
    pub fn kl_poly(&self, y: &AffineWeylElement, w: &AffineWeylElement) -> LaurentPoly {
        self.kl_basis(w).coeff(y)
    }

    pub fn format(&self, a: &HeckeElement) -> String {
        let mut terms: Vec<(&AffineWeylElement, &LaurentPoly)> = a.terms.iter().collect();
        terms.sort_by_cached_key(|(x, _)| self.weyl.sort_key(x));
        let parts: Vec<String> = terms
            .iter()
            .map(|(x, p)| format!("({p})H[{}]", self.weyl.format(x)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(e: i32) -> LaurentPoly {
        LaurentPoly::monomial(e, 1)
    }

    #[test]
    fn quadratic_relation() {
        let w = AffineWeyl::from_label("A1").unwrap();
        let h = Hecke::new(&w);
        let hs = HeckeElement::basis(w.generator(1));
        let sq = h.multiply(&hs, &hs);
        let mut expect = HeckeElement::basis(&w.identity());
        expect.add_term(w.generator(1), &v(-1).sub(&v(1)));
        assert_eq!(sq, expect);
    }

    #[test]
    fn omega_inverse() {
        let w = AffineWeyl::from_label("A2").unwrap();
        let h = Hecke::new(&w);
        let o = w.omega_generator().clone();
        let p = h.multiply(&HeckeElement::basis(&o), &HeckeElement::basis(&w.inverse(&o)));
        assert_eq!(p, HeckeElement::basis(&w.identity()));
    }

    #[test]
    fn bar_of_generator() {
        let w = AffineWeyl::from_label("A1").unwrap();
        let h = Hecke::new(&w);
        let s = w.generator(1).clone();
        let b = h.bar(&HeckeElement::basis(&s));
        let mut expect = HeckeElement::basis(&s);
        expect.add_term(&w.identity(), &v(1).sub(&v(-1)));
        assert_eq!(b, expect);
        let ve = HeckeElement::term(&w.identity(), v(1));
        assert_eq!(h.bar(&ve), HeckeElement::term(&w.identity(), v(-1)));
    }

    #[test]
    fn kl_small() {
        let w = AffineWeyl::from_label("A1").unwrap();
        let h = Hecke::new(&w);
        let s = w.generator(1).clone();
        assert_eq!(h.kl_basis(&s), h.bs_char(1));
        let x = w.from_word(&w.identity(), &[0, 1, 0]);
        let b = h.kl_basis(&x);
        for y in w.lower_set(&x) {
            let d = (w.length(&x) - w.length(&y)) as i32;
            assert_eq!(b.coeff(&y), v(d));
        }
        assert_eq!(b.terms.len(), 6);
    }

    #[test]
    fn laurent_display() {
        let p = LaurentPoly::from_terms([(-1, 1), (1, -2), (0, 3)]);
        assert_eq!(p.to_string(), "v^-1+3-2v");
        assert_eq!(p.eval_one(), 2);
    }
}

//! Graded polynomial ring `R = Sym(t)` over a coefficient field (variables in
//! degree 2), the W-action via `W → W_f`, Demazure operators, and fractions
//! whose denominators are products of linear forms.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::Echelon;
use crate::weyl::{AffineWeyl, AffineWeylElement};

pub const MAX_VARS: usize = 4;
const BITS: u32 = 16;
const MASK: u64 = (1 << BITS) - 1;

/// Exponent vector packed into 16-bit fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono(pub u64);

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn var(i: usize) -> Mono {
        Mono(1 << (BITS * i as u32))
    }

    pub fn from_exps(e: &[u32]) -> Mono {
        Mono(
            e.iter()
                .enumerate()
                .fold(0, |acc, (i, &x)| acc | (u64::from(x) << (BITS * i as u32))),
        )
    }

    pub fn exp(self, i: usize) -> u32 {
        ((self.0 >> (BITS * i as u32)) & MASK) as u32
    }

    pub fn total(self) -> u32 {
        (0..MAX_VARS).map(|i| self.exp(i)).sum()
    }

    pub fn mul(self, o: Mono) -> Mono {
        Mono(self.0 + o.0)
    }

    pub fn divides(self, o: Mono) -> bool {
        (0..MAX_VARS).all(|i| self.exp(i) <= o.exp(i))
    }

    pub fn div(self, o: Mono) -> Mono {
        Mono(self.0 - o.0)
    }
}

/// Sparse polynomial; terms sorted by monomial, no zero coefficients.
#[derive(Clone, Debug)]
pub struct Poly<F: Field> {
    pub terms: Vec<(Mono, F::Elem)>,
}

impl<F: Field> PartialEq for Poly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<F: Field> Eq for Poly<F> {}

impl<F: Field> std::hash::Hash for Poly<F> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl<F: Field> Default for Poly<F> {
    fn default() -> Self {
        Poly { terms: Vec::new() }
    }
}

impl<F: Field> Poly<F> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total exponent of the top-degree part, `None` for zero.
    pub fn exp_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.total()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m0, _)) => {
                let d = m0.total();
                self.terms.iter().all(|(m, _)| m.total() == d)
            }
        }
    }

    pub fn coeff(&self, m: Mono) -> Option<&F::Elem> {
        self.terms
            .binary_search_by(|(x, _)| x.cmp(&m))
            .ok()
            .map(|i| &self.terms[i].1)
    }
}

/// Polynomial ring in `nvars` variables over `field`.
#[derive(Clone, Debug)]
pub struct PolyRing<F: Field> {
    pub field: F,
    pub nvars: usize,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        PolyRing { field, nvars }
    }

    fn from_unsorted(&self, mut terms: Vec<(Mono, F::Elem)>) -> Poly<F> {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let f = &self.field;
        let mut out: Vec<(Mono, F::Elem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = f.add(lc, &c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !f.is_zero(c));
        Poly { terms: out }
    }

    pub fn constant(&self, c: F::Elem) -> Poly<F> {
        if self.field.is_zero(&c) {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::ONE, c)],
            }
        }
    }

    pub fn one(&self) -> Poly<F> {
        self.constant(self.field.one())
    }

    pub fn var(&self, i: usize) -> Poly<F> {
        Poly {
            terms: vec![(Mono::var(i), self.field.one())],
        }
    }

    pub fn monomial(&self, m: Mono, c: F::Elem) -> Poly<F> {
        if self.field.is_zero(&c) {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// `Σ c_i x_i`
    pub fn linear(&self, c: &[F::Elem]) -> Poly<F> {
        self.from_unsorted(
            c.iter()
                .enumerate()
                .map(|(i, x)| (Mono::var(i), x.clone()))
                .collect(),
        )
    }

    pub fn linear_int(&self, c: &[i64]) -> Poly<F> {
        let v: Vec<F::Elem> = c.iter().map(|&x| self.field.from_i64(x)).collect();
        self.linear(&v)
    }

    /// Coefficients of a linear form.
    pub fn linear_coeffs(&self, p: &Poly<F>) -> Vec<F::Elem> {
        (0..self.nvars)
            .map(|i| p.coeff(Mono::var(i)).cloned().unwrap_or_else(|| self.field.zero()))
            .collect()
    }

    pub fn add(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        let f = &self.field;
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            let ord = match (a.terms.get(i), b.terms.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(a.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = f.add(&a.terms[i].1, &b.terms[j].1);
                    if !f.is_zero(&c) {
                        out.push((a.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Poly { terms: out }
    }

    pub fn neg(&self, a: &Poly<F>) -> Poly<F> {
        Poly {
            terms: a
                .terms
                .iter()
                .map(|(m, c)| (*m, self.field.neg(c)))
                .collect(),
        }
    }

    pub fn sub(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &Poly<F>, c: &F::Elem) -> Poly<F> {
        if self.field.is_zero(c) {
            return Poly::zero();
        }
        Poly {
            terms: a
                .terms
                .iter()
                .map(|(m, x)| (*m, self.field.mul(x, c)))
                .collect(),
        }
    }

    pub fn mul_mono(&self, a: &Poly<F>, m: Mono) -> Poly<F> {
        Poly {
            terms: a.terms.iter().map(|(x, c)| (x.mul(m), c.clone())).collect(),
        }
    }

    pub fn mul(&self, a: &Poly<F>, b: &Poly<F>) -> Poly<F> {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        if b.terms.len() == 1 && b.terms[0].0 == Mono::ONE {
            return self.scale(a, &b.terms[0].1);
        }
        if a.terms.len() == 1 && a.terms[0].0 == Mono::ONE {
            return self.scale(b, &a.terms[0].1);
        }
        let f = &self.field;
        let mut acc: HashMap<Mono, F::Elem> = HashMap::with_capacity(a.terms.len() * b.terms.len());
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                let e = acc.entry(m1.mul(*m2)).or_insert_with(|| f.zero());
                f.mul_add_assign(e, c1, c2);
            }
        }
        let mut terms: Vec<(Mono, F::Elem)> = acc.into_iter().filter(|(_, c)| !f.is_zero(c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    pub fn pow(&self, a: &Poly<F>, e: u32) -> Poly<F> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Substitutes `x_i ↦ images[i]`.
    pub fn substitute(&self, p: &Poly<F>, images: &[Poly<F>]) -> Poly<F> {
        let mut powers: Vec<Vec<Poly<F>>> = vec![vec![self.one()]; self.nvars];
        let mut terms: Vec<(Mono, F::Elem)> = Vec::new();
        for (m, c) in &p.terms {
            let mut t = self.constant(c.clone());
            for (i, pw) in powers.iter_mut().enumerate() {
                let e = m.exp(i) as usize;
                while pw.len() <= e {
                    let next = self.mul(pw.last().expect("nonempty"), &images[i]);
                    pw.push(next);
                }
                if e > 0 {
                    t = self.mul(&t, &pw[e]);
                }
            }
            terms.extend(t.terms);
        }
        self.from_unsorted(terms)
    }

    pub fn eval(&self, p: &Poly<F>, point: &[F::Elem]) -> F::Elem {
        let f = &self.field;
        let mut s = f.zero();
        for (m, c) in &p.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.nvars) {
                let e = m.exp(i);
                if e > 0 {
                    t = f.mul(&t, &f.pow(x, e as u64));
                }
            }
            s = f.add(&s, &t);
        }
        s
    }

    /// Exact quotient of `p` by a nonzero linear form `l`, or `None`.
    pub fn div_linear(&self, p: &Poly<F>, l: &Poly<F>) -> Option<Poly<F>> {
        let f = &self.field;
        let lc = self.linear_coeffs(l);
        // Eliminate along the last variable with a nonzero coefficient.
        let v = (0..self.nvars).rev().find(|&i| !f.is_zero(&lc[i]))?;
        let inv = f.inv(&lc[v]).expect("nonzero");
        let mut rem = p.clone();
        let mut quot: Vec<(Mono, F::Elem)> = Vec::new();
        let xv = Mono::var(v);
        while rem.terms.iter().any(|(m, _)| m.exp(v) > 0) {
            // Cancel the term with the highest power of x_v.
            let (m, c) = rem
                .terms
                .iter()
                .filter(|(m, _)| m.exp(v) > 0)
                .max_by_key(|(m, _)| (m.exp(v), m.0))
                .cloned()
                .expect("found");
            let q = m.div(xv);
            let qc = f.mul(&c, &inv);
            quot.push((q, qc.clone()));
            rem = self.sub(&rem, &self.scale(&self.mul_mono(l, q), &qc));
        }
        if rem.is_zero() {
            Some(self.from_unsorted(quot))
        } else {
            None
        }
    }

    /// Monomials of total exponent `k`, sorted.
    pub fn mono_basis(&self, k: u32) -> Vec<Mono> {
        let mut out = Vec::new();
        let mut e = vec![0u32; self.nvars];
        fn rec(i: usize, left: u32, e: &mut Vec<u32>, out: &mut Vec<Mono>) {
            if i + 1 == e.len() {
                e[i] = left;
                out.push(Mono::from_exps(e));
                return;
            }
            for x in 0..=left {
                e[i] = x;
                rec(i + 1, left - x, e, out);
            }
        }
        if self.nvars == 0 {
            if k == 0 {
                out.push(Mono::ONE);
            }
            return out;
        }
        rec(0, k, &mut e, &mut out);
        out.sort();
        out
    }

    pub fn dim_degree(&self, k: u32) -> usize {
        binomial(k as usize + self.nvars - 1, self.nvars - 1)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Numerator over a multiset of monic linear forms.
#[derive(Clone, Debug)]
pub struct RootFraction<F: Field> {
    pub numerator: Poly<F>,
    pub denominator: Vec<Poly<F>>,
}

impl<F: Field> PartialEq for RootFraction<F> {
    fn eq(&self, other: &Self) -> bool {
        self.numerator == other.numerator && self.denominator == other.denominator
    }
}

/// Per-generator data of the realization.
#[derive(Clone, Debug)]
pub struct GeneratorData<F: Field> {
    pub alpha: Poly<F>,
    /// Coefficients of the evaluation functional on linear forms.
    pub functional: Vec<F::Elem>,
    pub delta: Poly<F>,
    pub fin: usize,
}

/// `R = Sym(X_* ⊗ k)` with the W-action, roots, coroot functionals and chosen `δ_s`.
#[derive(Clone, Debug)]
pub struct Realization<F: Field> {
    pub weyl: Arc<AffineWeyl>,
    pub ring: PolyRing<F>,
    /// Images of the variables under each element of W_f.
    images: Vec<Vec<Poly<F>>>,
    pub gens: Vec<GeneratorData<F>>,
    /// X*/ZR torsion orders (empty when free).
    pub root_quotient_torsion: Vec<i64>,
    /// X_*/ZR^∨ torsion orders.
    pub coroot_quotient_torsion: Vec<i64>,
    /// Whether X_*/ZR^∨ has no ℓ-torsion.
    pub coroot_quotient_ell_free: bool,
}

impl<F: Field> Realization<F> {
    pub fn field(&self) -> &F {
        &self.ring.field
    }

    pub fn nvars(&self) -> usize {
        self.ring.nvars
    }

    pub fn act_fin(&self, fin: usize, p: &Poly<F>) -> Poly<F> {
        if fin == 0 || p.is_zero() {
            return p.clone();
        }
        if p.terms.len() == 1 && p.terms[0].0 == Mono::ONE {
            return p.clone();
        }
        self.ring.substitute(p, &self.images[fin])
    }

    /// Action of `w` through its image in W_f.
    pub fn act(&self, w: &AffineWeylElement, p: &Poly<F>) -> Poly<F> {
        self.act_fin(self.weyl.finite_image(w), p)
    }

    pub fn alpha(&self, s: usize) -> &Poly<F> {
        &self.gens[s].alpha
    }

    pub fn delta(&self, s: usize) -> &Poly<F> {
        &self.gens[s].delta
    }

    /// Evaluation of the coroot functional of generator `s` on a linear form.
    pub fn pair(&self, s: usize, linear: &Poly<F>) -> F::Elem {
        let f = self.field();
        let c = self.ring.linear_coeffs(linear);
        c.iter()
            .zip(&self.gens[s].functional)
            .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
    }

    /// `(p − s(p)) / α_s`
    pub fn demazure(&self, s: usize, p: &Poly<F>) -> Result<Poly<F>> {
        let g = &self.gens[s];
        let d = self.ring.sub(p, &self.act_fin(g.fin, p));
        self.ring
            .div_linear(&d, &g.alpha)
            .ok_or_else(|| Error::InexactDivision(format!("demazure at generator {s}")))
    }

    /// Linear forms `w(α_s)` up to scalar, normalized to be monic.
    pub fn root_forms(&self) -> Vec<Poly<F>> {
        let mut out: Vec<Poly<F>> = Vec::new();
        for fin in 0..self.weyl.finite_order() {
            for g in &self.gens {
                let l = self.monic(&self.act_fin(fin, &g.alpha)).0;
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
        out
    }

    /// `(monic form, scalar)` with `l = scalar · monic`.
    pub fn monic(&self, l: &Poly<F>) -> (Poly<F>, F::Elem) {
        let f = self.field();
        let lead = l.terms.last().map(|(_, c)| c.clone()).unwrap_or_else(|| f.one());
        let inv = f.inv(&lead).unwrap_or_else(|| f.one());
        (self.ring.scale(l, &inv), lead)
    }

    pub fn fraction(&self, numerator: Poly<F>, denominator: Vec<Poly<F>>) -> RootFraction<F> {
        let f = self.field();
        let mut num = numerator;
        let mut den = Vec::new();
        for d in denominator {
            let (m, c) = self.monic(&d);
            num = self.ring.scale(&num, &f.inv(&c).expect("nonzero form"));
            den.push(m);
        }
        let key = |p: &Poly<F>| {
            p.terms
                .iter()
                .map(|(m, c)| (m.0, f.render(c)))
                .collect::<Vec<_>>()
        };
        den.sort_by_cached_key(key);
        RootFraction {
            numerator: num,
            denominator: den,
        }
    }

    /// Cancels every denominator form dividing the numerator.
    pub fn fraction_normalize(&self, f: &RootFraction<F>) -> RootFraction<F> {
        if f.numerator.is_zero() {
            return RootFraction {
                numerator: Poly::zero(),
                denominator: Vec::new(),
            };
        }
        let mut num = f.numerator.clone();
        let mut den = Vec::new();
        for d in &f.denominator {
            match self.ring.div_linear(&num, d) {
                Some(q) => num = q,
                None => den.push(d.clone()),
            }
        }
        RootFraction {
            numerator: num,
            denominator: den,
        }
    }

    pub fn fraction_mul(&self, a: &RootFraction<F>, b: &RootFraction<F>) -> RootFraction<F> {
        let mut den = a.denominator.clone();
        den.extend(b.denominator.iter().cloned());
        let f = self.fraction(self.ring.mul(&a.numerator, &b.numerator), den);
        self.fraction_normalize(&f)
    }

    pub fn fraction_add(&self, a: &RootFraction<F>, b: &RootFraction<F>) -> RootFraction<F> {
        // Common denominator is the multiset union with maximal multiplicities.
        let mut common = a.denominator.clone();
        let mut rest_b = Vec::new();
        let mut pool = a.denominator.clone();
        for d in &b.denominator {
            if let Some(i) = pool.iter().position(|x| x == d) {
                pool.remove(i);
            } else {
                common.push(d.clone());
                rest_b.push(d.clone());
            }
        }
        let mut rest_a = common.clone();
        for d in &a.denominator {
            let i = rest_a.iter().position(|x| x == d).expect("subset");
            rest_a.remove(i);
        }
        let mut rest_b_full = common.clone();
        for d in &b.denominator {
            let i = rest_b_full.iter().position(|x| x == d).expect("subset");
            rest_b_full.remove(i);
        }
        let r = &self.ring;
        let na = rest_a.iter().fold(a.numerator.clone(), |acc, d| r.mul(&acc, d));
        let nb = rest_b_full.iter().fold(b.numerator.clone(), |acc, d| r.mul(&acc, d));
        let f = self.fraction(r.add(&na, &nb), common);
        self.fraction_normalize(&f)
    }

    /// Whether every denominator form is some `w(α_s)`.
    pub fn denominators_are_roots(&self, f: &RootFraction<F>) -> bool {
        let forms = self.root_forms();
        f.denominator.iter().all(|d| forms.contains(d))
    }
}

/// Solves `⟨φ_k, δ⟩ = rhs_k` over the field; canonical solution with free
/// coordinates set to zero.
fn solve_functionals<F: Field>(field: &F, eqs: &[(Vec<F::Elem>, F::Elem)], n: usize) -> Option<Vec<F::Elem>> {
    let mut e = Echelon::new(field, n + 1);
    for (phi, rhs) in eqs {
        let mut row = phi.clone();
        row.push(rhs.clone());
        e.insert(row);
    }
    let rref = e.rref();
    if rref.iter().any(|(p, _)| *p == n) {
        return None;
    }
    let mut x = vec![field.zero(); n];
    for (p, row) in &rref {
        x[*p] = row[n].clone();
    }
    Some(x)
}

/// Builds and checks the realization of `weyl` over `field`.
pub fn validate_realization<F: Field>(weyl: Arc<AffineWeyl>, field: F) -> Result<Realization<F>> {
    let n = weyl.lattice_rank();
    let ring = PolyRing::new(field.clone(), n);
    let images: Vec<Vec<Poly<F>>> = (0..weyl.finite_order())
        .map(|fin| {
            let m = weyl.coweight_matrix(fin);
            (0..n)
                .map(|i| ring.linear_int(&(0..n).map(|j| m[j][i]).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let to_f = |v: &[i64]| v.iter().map(|&x| field.from_i64(x)).collect::<Vec<F::Elem>>();
    let datum = &weyl.datum;
    let r = datum.rank;
    let name = |i: usize| format!("s{i}");

    let mut gens: Vec<Option<GeneratorData<F>>> = vec![None; r + 1];
    for i in 1..=r {
        let root = &datum.simple_roots[i - 1];
        let coroot = &datum.simple_coroots[i - 1];
        let alpha = ring.linear_int(coroot);
        if alpha.is_zero() {
            return Err(Error::Degenerate {
                generator: name(i),
                reason: "α_s vanishes in the coefficient field".into(),
            });
        }
        let functional = to_f(root);
        // Prefer the fundamental coweight; otherwise any δ with ⟨α, δ⟩ = 1.
        let all: Vec<(Vec<F::Elem>, F::Elem)> = (0..r)
            .map(|j| (to_f(&datum.simple_roots[j]), field.from_i64(i64::from(j == i - 1))))
            .collect();
        let delta = solve_functionals(&field, &all, n)
            .or_else(|| solve_functionals(&field, &[(functional.clone(), field.one())], n))
            .ok_or_else(|| Error::Degenerate {
                generator: name(i),
                reason: "no δ_s with ⟨α_s^∨, δ_s⟩ = 1".into(),
            })?;
        gens[i] = Some(GeneratorData {
            alpha,
            functional,
            delta: ring.linear(&delta),
            fin: weyl.generator(i).fin,
        });
    }

    // Affine generator: α = −β^∨, functional −β.
    let beta = &weyl.roots[weyl.affine_root];
    let alpha0 = ring.linear_int(&beta.coroot.iter().map(|x| -x).collect::<Vec<_>>());
    if alpha0.is_zero() {
        return Err(Error::Degenerate {
            generator: name(0),
            reason: "α_s vanishes in the coefficient field".into(),
        });
    }
    let functional0 = to_f(&beta.weight.iter().map(|x| -x).collect::<Vec<_>>());
    let pair0 = |d: &Poly<F>| {
        let c = ring.linear_coeffs(d);
        c.iter()
            .zip(&functional0)
            .fold(field.zero(), |acc, (a, b)| field.add(&acc, &field.mul(a, b)))
    };
    let s0 = weyl.generator(0).clone();
    let mut delta0 = None;
    if let Ok((w, sp)) = weyl.conjugation_datum(&s0, 2 * weyl.finite_order() + 2) {
        let ds = &gens[sp].as_ref().expect("finite generator").delta;
        let d = ring.substitute(ds, &images[w.fin]);
        let p = pair0(&d);
        if field.is_one(&p) {
            delta0 = Some(d);
        } else if field.is_one(&field.neg(&p)) {
            delta0 = Some(ring.neg(&d));
        }
    }
    let delta0 = match delta0 {
        Some(d) => d,
        None => ring.linear(
            &solve_functionals(&field, &[(functional0.clone(), field.one())], n).ok_or_else(|| {
                Error::Degenerate {
                    generator: name(0),
                    reason: "no δ_s with ⟨α_s^∨, δ_s⟩ = 1".into(),
                }
            })?,
        ),
    };
    gens[0] = Some(GeneratorData {
        alpha: alpha0,
        functional: functional0,
        delta: delta0,
        fin: s0.fin,
    });

    let ell = field.characteristic() as i64;
    let coroot_quotient_torsion = datum.coroot_quotient_torsion();
    let coroot_quotient_ell_free = ell == 0 || coroot_quotient_torsion.iter().all(|d| d % ell != 0);
    let real = Realization {
        root_quotient_torsion: datum.root_quotient_torsion(),
        coroot_quotient_torsion,
        coroot_quotient_ell_free,
        weyl: weyl.clone(),
        ring,
        images,
        gens: gens.into_iter().map(|g| g.expect("all generators")).collect(),
    };
    // Post-conditions: pairing 1 and s(α_s) = −α_s.
    for (i, g) in real.gens.iter().enumerate() {
        if !real.field().is_one(&real.pair(i, &g.delta)) {
            return Err(Error::Degenerate {
                generator: name(i),
                reason: "⟨α_s^∨, δ_s⟩ ≠ 1".into(),
            });
        }
        let sa = real.act_fin(g.fin, &g.alpha);
        if sa != real.ring.neg(&g.alpha) {
            return Err(Error::Degenerate {
                generator: name(i),
                reason: "s(α_s) ≠ −α_s".into(),
            });
        }
    }
    Ok(real)
}

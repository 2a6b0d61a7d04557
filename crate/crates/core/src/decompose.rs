//! Endomorphism algebras, splitting of flagged objects and the ℓ-KL tables.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abe::{
    bs_generator, compose, find_isomorphism, flag_counts, flag_from_character, hom_graded_unchecked,
    hom_total_rank, identity_morphism, kernel_object, morphism_combination, solve_combination,
    std_object, tensor, FlaggedObject, Morphism,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::hecke::{Hecke, HeckeElement, LaurentPoly};
use crate::linalg::Echelon;
use crate::poly::{Mono, Realization};
use crate::weyl::{AffineWeyl, AffineWeylElement};

/// Retry budget for random algebra elements in `split`.
pub const SPLIT_RETRIES: usize = 16;
pub const DEFAULT_SEED: u64 = 0x5eed_1e55;

/// Degree-0 endomorphisms with structure constants: `b_i b_j = Σ_k c[i][j][k] b_k`
/// where `b_i b_j` means `b_i ∘ b_j`.
#[derive(Clone, Debug)]
pub struct End0Algebra<F: Field> {
    pub basis: Vec<Morphism<F>>,
    pub structure: Vec<Vec<Vec<F::Elem>>>,
    pub identity: Vec<F::Elem>,
    field: F,
}

impl<F: Field> End0Algebra<F> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mul(&self, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let n = self.dim();
        let mut out = vec![f.zero(); n];
        for i in 0..n {
            if f.is_zero(&a[i]) {
                continue;
            }
            for j in 0..n {
                if f.is_zero(&b[j]) {
                    continue;
                }
                let ab = f.mul(&a[i], &b[j]);
                for (k, c) in self.structure[i][j].iter().enumerate() {
                    if !f.is_zero(c) {
                        f.mul_add_assign(&mut out[k], &ab, c);
                    }
                }
            }
        }
        out
    }

    pub fn element(&self, real: &Realization<F>, c: &[F::Elem]) -> Morphism<F> {
        morphism_combination(real, &self.basis, c)
    }

    /// Evaluates a univariate polynomial (low degree first) at `a`.
    pub fn eval_poly(&self, p: &[F::Elem], a: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut out = vec![f.zero(); self.dim()];
        for c in p.iter().rev() {
            out = self.mul(&out, a);
            for (x, y) in out.iter_mut().zip(&self.identity) {
                f.mul_add_assign(x, c, y);
            }
        }
        out
    }

    /// Minimal polynomial of `a`, monic, low degree first.
    pub fn minimal_polynomial(&self, a: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let n = self.dim();
        let mut ech = Echelon::with_tags(f, n, n + 1);
        let mut pow = self.identity.clone();
        for k in 0..=n {
            if let Some(c) = ech.express(&pow) {
                let mut out: Vec<F::Elem> = c[..k].iter().map(|x| f.neg(x)).collect();
                out.push(f.one());
                return out;
            }
            ech.insert_tagged(pow.clone(), k);
            pow = self.mul(&pow, a);
        }
        unreachable!("minimal polynomial degree exceeds the dimension")
    }
}

pub fn end0<F: Field>(m: &FlaggedObject<F>) -> Result<End0Algebra<F>> {
    let real = &m.real;
    let f = real.field().clone();
    let basis = hom_graded_unchecked(m, m, 0).basis;
    let n = basis.len();
    let mut structure = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = compose(real, &basis[j], &basis[i]);
            structure[i][j] = solve_combination(real, &basis, &p)
                .ok_or_else(|| Error::Computation("End⁰ not closed under composition".into()))?;
        }
    }
    let identity = solve_combination(real, &basis, &identity_morphism(m))
        .ok_or_else(|| Error::Computation("identity outside End⁰".into()))?;
    Ok(End0Algebra {
        basis,
        structure,
        identity,
        field: f,
    })
}

mod upoly {
    //! Univariate polynomials over a field, low degree first.
    use crate::field::Field;

    pub fn trim<F: Field>(f: &F, p: &mut Vec<F::Elem>) {
        while p.last().is_some_and(|c| f.is_zero(c)) {
            p.pop();
        }
    }

    pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![f.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                f.mul_add_assign(&mut out[i + j], x, y);
            }
        }
        trim(f, &mut out);
        out
    }

    pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let n = a.len().max(b.len());
        let mut out: Vec<F::Elem> = (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
                let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
                f.sub(&x, &y)
            })
            .collect();
        trim(f, &mut out);
        out
    }

    pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
        let mut r = a.to_vec();
        trim(f, &mut r);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead = f.inv(b.last().expect("nonzero divisor")).expect("nonzero");
        let mut q = vec![f.zero(); r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let k = r.len() - b.len();
            let c = f.mul(r.last().expect("nonempty"), &lead);
            for (i, y) in b.iter().enumerate() {
                let t = f.mul(&c, y);
                r[k + i] = f.sub(&r[k + i], &t);
            }
            q[k] = c;
            trim(f, &mut r);
        }
        trim(f, &mut q);
        (q, r)
    }

    /// `(g, s, t)` with `s a + t b = g`, `g` monic.
    pub fn gcdext<F: Field>(
        f: &F,
        a: &[F::Elem],
        b: &[F::Elem],
    ) -> (Vec<F::Elem>, Vec<F::Elem>, Vec<F::Elem>) {
        let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
        let (mut s0, mut s1) = (vec![f.one()], Vec::new());
        let (mut t0, mut t1) = (Vec::new(), vec![f.one()]);
        trim(f, &mut r0);
        trim(f, &mut r1);
        while !r1.is_empty() {
            let (q, r) = divrem(f, &r0, &r1);
            let s = sub(f, &s0, &mul(f, &q, &s1));
            let t = sub(f, &t0, &mul(f, &q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        let lead = f.inv(r0.last().expect("nonzero gcd")).expect("nonzero");
        let sc = |p: &Vec<F::Elem>| p.iter().map(|c| f.mul(c, &lead)).collect::<Vec<_>>();
        (sc(&r0), sc(&s0), sc(&t0))
    }

    pub fn eval<F: Field>(f: &F, p: &[F::Elem], x: &F::Elem) -> F::Elem {
        let mut acc = f.zero();
        for c in p.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }
}

/// Roots in the prime field (all residues) or, over Q, among small rationals.
fn find_root<F: Field>(f: &F, p: &[F::Elem]) -> Option<F::Elem> {
    let candidates: Vec<F::Elem> = match f.characteristic() {
        0 => {
            let mut v = Vec::new();
            for den in 1..=6i64 {
                for num in -48..=48i64 {
                    v.push(f.div(&f.from_i64(num), &f.from_i64(den)).expect("nonzero"));
                }
            }
            v
        }
        c => (0..c.min(1 << 16) as i64).map(|x| f.from_i64(x)).collect(),
    };
    candidates.into_iter().find(|x| f.is_zero(&upoly::eval(f, p, x)))
}

/// Multiplicity and cofactor of the root `x` in `p`: `p = (t − x)^a q`.
fn split_root<F: Field>(f: &F, p: &[F::Elem], x: &F::Elem) -> (usize, Vec<F::Elem>) {
    let lin = vec![f.neg(x), f.one()];
    let mut q = p.to_vec();
    let mut a = 0;
    loop {
        let (qq, r) = upoly::divrem(f, &q, &lin);
        if !r.is_empty() {
            return (a, q);
        }
        q = qq;
        a += 1;
    }
}

/// Rank over the fraction field of an idempotent block: the rank of its
/// constant part.
fn idempotent_counts<F: Field>(m: &FlaggedObject<F>, e: &Morphism<F>) -> HashMap<AffineWeylElement, usize> {
    let f = m.field();
    let mut out = HashMap::new();
    for x in m.support() {
        let idx = m.lines_at(&x);
        let rows: Vec<Vec<F::Elem>> = idx
            .iter()
            .map(|&j| {
                idx.iter()
                    .map(|&k| e.a[j][k].coeff(Mono::ONE).cloned().unwrap_or_else(|| f.zero()))
                    .collect()
            })
            .collect();
        let r = crate::linalg::rank(f, &rows, idx.len());
        if r > 0 {
            out.insert(x, r);
        }
    }
    out
}

/// Summand of `m` cut out by an idempotent, with its character.
fn image_of_idempotent<F: Field>(m: &FlaggedObject<F>, e: &Morphism<F>) -> Result<(FlaggedObject<F>, Morphism<F>)> {
    let real = &m.real;
    let ring = &real.ring;
    let id = identity_morphism(m);
    let mut c = id.clone();
    for (j, row) in c.a.iter_mut().enumerate() {
        for (k, p) in row.iter_mut().enumerate() {
            *p = ring.sub(&id.a[j][k], &e.a[j][k]);
        }
    }
    let counts = idempotent_counts(m, e);
    let (mut k, incl) = kernel_object(m, &[(m, &c)], &counts)?;
    k.flag = flag_from_character(&crate::abe::gamma_character(&k)?)?;
    k.multiplicative = m.multiplicative;
    Ok((k, incl))
}

/// A summand class: `object⟨·⟩` occurring with the given multiplicity, and
/// `ch = v^shift · ch(object)`.
#[derive(Clone, Debug)]
pub struct Summand<F: Field> {
    pub object: FlaggedObject<F>,
    pub top: AffineWeylElement,
    pub shift: i32,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct Decomposition<F: Field> {
    /// Indecomposable pieces with their inclusions into the original object.
    pub pieces: Vec<(FlaggedObject<F>, Morphism<F>)>,
    pub summands: Vec<Summand<F>>,
}

/// Unique Bruhat-maximal element of the flag support.
pub fn top_element<F: Field>(m: &FlaggedObject<F>) -> Result<AffineWeylElement> {
    let weyl = &m.real.weyl;
    let supp = m.support();
    let maxima: Vec<&AffineWeylElement> = supp
        .iter()
        .filter(|x| {
            !supp
                .iter()
                .any(|y| y != *x && weyl.bruhat_leq(x, y).unwrap_or(false))
        })
        .collect();
    match maxima.as_slice() {
        [x] => Ok((*x).clone()),
        _ => Err(Error::Computation("flag support has no unique maximum".into())),
    }
}

/// v-exponent of the top line of the flag.
fn top_shift<F: Field>(m: &FlaggedObject<F>, top: &AffineWeylElement) -> i32 {
    m.flag
        .iter()
        .filter(|l| &l.element == top)
        .map(|l| l.shift)
        .min()
        .unwrap_or(0)
}

fn split_rec<F: Field>(
    m: FlaggedObject<F>,
    incl: Morphism<F>,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(FlaggedObject<F>, Morphism<F>)>,
) -> Result<()> {
    let real = m.real.clone();
    let f = real.field().clone();
    let alg = end0(&m)?;
    if alg.dim() == 1 {
        out.push((m, incl));
        return Ok(());
    }
    let mut saw_nonsplit = false;
    for attempt in 0..SPLIT_RETRIES {
        let a: Vec<F::Elem> = (0..alg.dim())
            .map(|i| {
                if attempt == 0 {
                    f.from_i64(i as i64 + 1)
                } else {
                    f.random(rng)
                }
            })
            .collect();
        let mu = alg.minimal_polynomial(&a);
        let Some(x) = find_root(&f, &mu) else {
            saw_nonsplit = true;
            continue;
        };
        let (mult, q) = split_root(&f, &mu, &x);
        if q.len() <= 1 {
            continue;
        }
        // e ≡ 1 mod (t − x)^mult and e ≡ 0 mod q.
        let mut lin_pow = vec![f.one()];
        for _ in 0..mult {
            lin_pow = upoly::mul(&f, &lin_pow, &[f.neg(&x), f.one()]);
        }
        let (_, _, t) = upoly::gcdext(&f, &lin_pow, &q);
        let epoly = upoly::divrem(&f, &upoly::mul(&f, &t, &q), &mu).1;
        let e = alg.eval_poly(&epoly, &a);
        let one_minus: Vec<F::Elem> = alg.identity.iter().zip(&e).map(|(i, x)| f.sub(i, x)).collect();
        for idem in [e, one_minus] {
            let em = alg.element(&real, &idem);
            let (k, inc) = image_of_idempotent(&m, &em)?;
            let total = compose(&real, &inc, &incl);
            split_rec(k, total, rng, out)?;
        }
        return Ok(());
    }
    if saw_nonsplit {
        return Err(Error::NonSplit(format!(
            "End⁰ of dimension {} did not split over the coefficient field",
            alg.dim()
        )));
    }
    out.push((m, incl));
    Ok(())
}

/// Krull–Schmidt decomposition by Fitting splitting of random degree-0
/// endomorphisms.
pub fn split<F: Field>(m: &FlaggedObject<F>, seed: u64) -> Result<Decomposition<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pieces = Vec::new();
    split_rec(m.clone(), identity_morphism(m), &mut rng, &mut pieces)?;
    let mut summands: Vec<Summand<F>> = Vec::new();
    for (p, _) in &pieces {
        let top = top_element(p)?;
        let shift = top_shift(p, &top);
        let mut placed = false;
        for s in summands.iter_mut() {
            if s.top == top && s.shift == shift && find_isomorphism(&s.object, p, seed)?.is_some() {
                s.multiplicity += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            summands.push(Summand {
                object: p.clone(),
                top,
                shift,
                multiplicity: 1,
            });
        }
    }
    Ok(Decomposition { pieces, summands })
}

/// Checks `m ≅ ⊕ pieces` by solving for projections `π_i` with
/// `π_i ι_j = δ_ij` and testing `Σ ι_i π_i = id`.
pub fn verify_decomposition<F: Field>(m: &FlaggedObject<F>, dec: &Decomposition<F>) -> Result<bool> {
    let real = &m.real;
    let ring = &real.ring;
    let mut total: Option<Morphism<F>> = None;
    for (i, (pi_obj, _)) in dec.pieces.iter().enumerate() {
        let homs = hom_graded_unchecked(m, pi_obj, 0).basis;
        if homs.is_empty() {
            return Ok(false);
        }
        // Linear conditions on the coefficients of a combination of `homs`.
        let mut eqs_basis: Vec<Vec<Morphism<F>>> = vec![Vec::new(); homs.len()];
        let mut targets: Vec<Morphism<F>> = Vec::new();
        for (j, (pj_obj, inc_j)) in dec.pieces.iter().enumerate() {
            for (b, h) in homs.iter().enumerate() {
                eqs_basis[b].push(compose(real, inc_j, h));
            }
            targets.push(if i == j {
                identity_morphism(pi_obj)
            } else {
                Morphism {
                    degree: 0,
                    a: vec![vec![crate::poly::Poly::zero(); pi_obj.lines.len()]; pj_obj.lines.len()],
                }
            });
        }
        let stack = |ms: &[Morphism<F>]| Morphism {
            degree: 0,
            a: ms.iter().flat_map(|x| x.a.clone()).collect(),
        };
        let stacked: Vec<Morphism<F>> = eqs_basis.iter().map(|v| stack(v)).collect();
        let Some(c) = solve_combination(real, &stacked, &stack(&targets)) else {
            return Ok(false);
        };
        let pi = morphism_combination(real, &homs, &c);
        let term = compose(real, &pi, &dec.pieces[i].1);
        total = Some(match total {
            None => term,
            Some(t) => Morphism {
                degree: 0,
                a: t.a
                    .iter()
                    .zip(&term.a)
                    .map(|(r, s)| r.iter().zip(s).map(|(x, y)| ring.add(x, y)).collect())
                    .collect(),
            },
        });
    }
    Ok(total.is_some_and(|t| crate::abe::morphisms_equal(&t, &identity_morphism(m))))
}

/// Rank of the pairing `(g, h) ↦ [h ∘ g]` at the top line of `b`, and the
/// maps realizing a maximal invertible minor.
fn pairing_rank<F: Field>(
    b: &FlaggedObject<F>,
    top_line: usize,
    m: &FlaggedObject<F>,
    k: i32,
) -> (usize, Vec<Morphism<F>>) {
    let f = m.field();
    let gs = hom_graded_unchecked(b, m, k).basis;
    if gs.is_empty() {
        return (0, Vec::new());
    }
    let hs = hom_graded_unchecked(m, b, -k).basis;
    if hs.is_empty() {
        return (0, Vec::new());
    }
    let constant = |g: &Morphism<F>, h: &Morphism<F>| {
        let mut acc = f.zero();
        for (j, x) in g.a[top_line].iter().enumerate() {
            let y = &h.a[j][top_line];
            if x.is_zero() || y.is_zero() {
                continue;
            }
            if let (Some(cx), Some(cy)) = (x.coeff(Mono::ONE), y.coeff(Mono::ONE)) {
                f.mul_add_assign(&mut acc, cx, cy);
            }
        }
        acc
    };
    // Columns indexed by h; select independent columns via the transpose.
    let mut ech = Echelon::new(f, gs.len());
    let mut chosen = Vec::new();
    for h in &hs {
        let col: Vec<F::Elem> = gs.iter().map(|g| constant(g, h)).collect();
        if ech.insert(col) {
            chosen.push(h.clone());
        }
    }
    (chosen.len(), chosen)
}

/// The indecomposable objects `B^ℓ_w` for `w ∈ W′` and their characters.
pub struct LklEngine<F: Field> {
    pub real: Arc<Realization<F>>,
    pub objects: BTreeMap<AffineWeylElement, Arc<FlaggedObject<F>>>,
    pub chars: BTreeMap<AffineWeylElement, HeckeElement>,
    generators: Vec<Arc<FlaggedObject<F>>>,
}

impl<F: Field> LklEngine<F> {
    pub fn new(real: Arc<Realization<F>>) -> Result<Self> {
        let generators = (0..real.weyl.num_generators())
            .map(|s| bs_generator(&real, s).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let e = real.weyl.identity();
        let be = std_object(&real, &e, 0);
        let mut objects = BTreeMap::new();
        let mut chars = BTreeMap::new();
        chars.insert(e.clone(), be.character());
        objects.insert(e, Arc::new(be));
        Ok(LklEngine {
            real,
            objects,
            chars,
            generators,
        })
    }

    pub fn weyl(&self) -> &AffineWeyl {
        &self.real.weyl
    }

    pub fn generator(&self, s: usize) -> &FlaggedObject<F> {
        &self.generators[s]
    }

    /// Multiplicities `(y, shift) ↦ n` of known indecomposables `B_y⟨shift⟩`
    /// in `m`, peeled from the top; returns them with the remaining
    /// character and the projections realizing them.
    pub fn peel(
        &self,
        m: &FlaggedObject<F>,
        exclude: Option<&AffineWeylElement>,
    ) -> Result<(Vec<(AffineWeylElement, i32, usize)>, HeckeElement, Vec<(AffineWeylElement, i32, Morphism<F>)>)> {
        let weyl = self.weyl();
        let mut residual = m.character();
        let mut found = Vec::new();
        let mut projections = Vec::new();
        // Summands B_y only have support below y, so one pass from the top suffices.
        let mut cands: Vec<AffineWeylElement> = residual
            .support()
            .filter(|y| Some(*y) != exclude && self.objects.contains_key(*y))
            .cloned()
            .collect();
        cands.sort_by_key(|y| std::cmp::Reverse(weyl.sort_key(y)));
        for y in cands {
            let by = &self.objects[&y];
            let top_line = by.lines_at(&y)[0];
            let coeff = residual.coeff(&y);
            for (exp, c) in coeff.terms().collect::<Vec<_>>() {
                if c <= 0 {
                    return Err(Error::Computation(format!(
                        "negative residual multiplicity at {}",
                        weyl.format(&y)
                    )));
                }
                // B_y⟨k⟩ has top term v^{-k} H_y.
                let k = -exp;
                let (r, hs) = pairing_rank(by, top_line, m, k);
                if r > c as usize {
                    return Err(Error::Computation("pairing rank exceeds character bound".into()));
                }
                if r == 0 {
                    continue;
                }
                found.push((y.clone(), k, r));
                let sub = self.chars[&y].scale(&LaurentPoly::monomial(exp, r as i64));
                residual = residual.sub(&sub);
                for hmap in hs {
                    projections.push((y.clone(), k, hmap));
                }
            }
        }
        Ok((found, residual, projections))
    }

    /// Computes `B^ℓ_w` from `B^ℓ_{w'} ⋆ B_s`, `w = w's`.
    pub fn compute(&self, w: &AffineWeylElement) -> Result<(FlaggedObject<F>, HeckeElement)> {
        let weyl = self.weyl();
        let word = weyl.reduced_word(w);
        let s = *word.last().expect("nontrivial element");
        let wp = weyl.multiply(w, weyl.generator(s));
        let bwp = self
            .objects
            .get(&wp)
            .ok_or_else(|| Error::Computation(format!("missing {}", weyl.format(&wp))))?;
        let m = tensor(bwp, &self.generators[s])?;
        let (_, residual, projections) = self.peel(&m, Some(w))?;
        if residual.coeff(w) != LaurentPoly::one() {
            return Err(Error::Computation(format!(
                "top coefficient of {} is {}",
                weyl.format(w),
                residual.coeff(w)
            )));
        }
        for (_, p) in &residual.terms {
            if !p.is_nonnegative() {
                return Err(Error::Computation("residual character is not positive".into()));
            }
        }
        let flag = flag_from_character(&residual)?;
        let expected = flag_counts(&flag);
        let targets: Vec<&FlaggedObject<F>> = projections.iter().map(|(y, _, _)| &*self.objects[y]).collect();
        let maps: Vec<(&FlaggedObject<F>, &Morphism<F>)> = targets
            .iter()
            .zip(&projections)
            .map(|(t, (_, _, h))| (*t, h))
            .collect();
        let (mut bw, _) = kernel_object(&m, &maps, &expected)?;
        bw.flag = flag;
        bw.multiplicative = true;
        Ok((bw, residual))
    }

    /// Fills in all `w ∈ W′` with `ℓ(w) ≤ bound`, one length stratum at a time.
    pub fn run(&mut self, bound: usize) -> Result<()> {
        let weyl = self.real.weyl.clone();
        let ball = weyl.ball_sorted(bound);
        for len in 1..=bound {
            let stratum: Vec<AffineWeylElement> = ball
                .iter()
                .filter(|w| weyl.length(w) == len && weyl.in_w_prime(w) && !self.objects.contains_key(*w))
                .cloned()
                .collect();
            let this = &*self;
            let results: Vec<Result<(AffineWeylElement, FlaggedObject<F>, HeckeElement)>> = stratum
                .par_iter()
                .map(|w| this.compute(w).map(|(o, c)| (w.clone(), o, c)))
                .collect();
            for r in results {
                let (w, o, c) = r?;
                self.objects.insert(w.clone(), Arc::new(o));
                self.chars.insert(w, c);
            }
        }
        Ok(())
    }

    /// Character of `B^ℓ_ω ⋆ B^ℓ_w`-type labels: `H_ω · ch(B^ℓ_{w})`.
    pub fn character(&self, w: &AffineWeylElement) -> Option<HeckeElement> {
        let weyl = self.weyl();
        let (omega, rest) = weyl.omega_decompose(w);
        let c = self.chars.get(&rest)?;
        Some(Hecke::new(weyl).mul_omega_left(&omega, c))
    }

    /// Remaining character after peeling all known `B_y`, `y ≠ w`, from the
    /// Bott–Samelson object of `word`.
    pub fn word_character(&self, w: &AffineWeylElement, word: &[usize]) -> Result<HeckeElement> {
        let weyl = self.weyl();
        let mut acc = std_object(&self.real, &weyl.identity(), 0);
        for &s in word {
            acc = tensor(&acc, &self.generators[s])?;
        }
        let (_, residual, _) = self.peel(&acc, Some(w))?;
        Ok(residual)
    }

    pub fn object(&self, w: &AffineWeylElement) -> Option<&Arc<FlaggedObject<F>>> {
        self.objects.get(w)
    }

    /// Reduced-word independence for `w`: every reduced word leaves the same
    /// character after peeling.
    pub fn check_word_independence(&self, w: &AffineWeylElement) -> Result<bool> {
        let reference = &self.chars[w];
        for word in self.weyl().all_reduced_words(w) {
            if &self.word_character(w, &word)? != reference {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn table(&self, label: &str, ell: Option<u64>, bound: usize) -> LklTable {
        let weyl = self.weyl();
        let mut entries = Vec::new();
        for (w, c) in &self.chars {
            if weyl.length(w) > bound {
                continue;
            }
            for (y, p) in &c.terms {
                entries.push(LklEntry {
                    w: w.clone(),
                    y: y.clone(),
                    poly: p.clone(),
                });
            }
        }
        let mut t = LklTable {
            cartan_label: label.to_string(),
            ell,
            length_bound: bound,
            entries,
        };
        t.sort(weyl);
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LklEntry {
    pub w: AffineWeylElement,
    pub y: AffineWeylElement,
    pub poly: LaurentPoly,
}

/// `ℓh_{y,w}` for `w ∈ W′`; other entries follow by Ω-translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LklTable {
    pub cartan_label: String,
    /// `None` for characteristic zero.
    pub ell: Option<u64>,
    pub length_bound: usize,
    pub entries: Vec<LklEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    #[serde(rename = "type")]
    kind: String,
    label: String,
    ell: serde_json::Value,
    bound: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    w: String,
    y: String,
    poly: LaurentPoly,
}

fn ell_value(ell: Option<u64>) -> serde_json::Value {
    match ell {
        Some(p) => serde_json::Value::from(p),
        None => serde_json::Value::from("rationals"),
    }
}

fn ell_parse(v: &serde_json::Value) -> Result<Option<u64>> {
    match v {
        serde_json::Value::Number(n) => n
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("bad ell {n}"))),
        serde_json::Value::String(s) if s == "rationals" => Ok(None),
        other => Err(Error::Parse(format!("bad ell {other}"))),
    }
}

impl LklTable {
    pub fn sort(&mut self, weyl: &AffineWeyl) {
        self.entries
            .sort_by_cached_key(|e| (weyl.sort_key(&e.w), weyl.sort_key(&e.y)));
    }

    pub fn get(&self, weyl: &AffineWeyl, y: &AffineWeylElement, w: &AffineWeylElement) -> LaurentPoly {
        let (ow, rw) = weyl.omega_decompose(w);
        let (oy, ry) = weyl.omega_decompose(y);
        if ow != oy {
            return LaurentPoly::zero();
        }
        self.entries
            .iter()
            .find(|e| e.w == rw && e.y == ry)
            .map(|e| e.poly.clone())
            .unwrap_or_else(LaurentPoly::zero)
    }

    pub fn labels(&self) -> Vec<AffineWeylElement> {
        let mut out: Vec<AffineWeylElement> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.w) {
                out.push(e.w.clone());
            }
        }
        out
    }

    pub fn to_json(&self, weyl: &AffineWeyl) -> String {
        let doc = TableDoc {
            kind: "lkl".into(),
            label: self.cartan_label.clone(),
            ell: ell_value(self.ell),
            bound: self.length_bound,
            entries: self
                .entries
                .iter()
                .map(|e| EntryDoc {
                    w: weyl.format(&e.w),
                    y: weyl.format(&e.y),
                    poly: e.poly.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(weyl: &AffineWeyl, s: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.kind != "lkl" {
            return Err(Error::Parse(format!("expected an lkl table, found {}", doc.kind)));
        }
        let entries = doc
            .entries
            .iter()
            .map(|e| {
                Ok(LklEntry {
                    w: weyl.parse(&e.w)?,
                    y: weyl.parse(&e.y)?,
                    poly: e.poly.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LklTable {
            cartan_label: doc.label,
            ell: ell_parse(&doc.ell)?,
            length_bound: doc.bound,
            entries,
        })
    }

    /// One `w,y,exp:coeff;…` record per line after a header.
    pub fn to_csv(&self, weyl: &AffineWeyl) -> String {
        let mut out = format!(
            "# lkl {} {} {}\nw,y,poly\n",
            self.cartan_label,
            ell_value(self.ell).to_string().trim_matches('"'),
            self.length_bound
        );
        for e in &self.entries {
            let poly: Vec<String> = e.poly.terms().map(|(x, c)| format!("{x}:{c}")).collect();
            out.push_str(&format!("{},{},{}\n", weyl.format(&e.w), weyl.format(&e.y), poly.join(";")));
        }
        out
    }

    pub fn from_csv(weyl: &AffineWeyl, s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let head = lines.next().ok_or_else(|| Error::Parse("empty table".into()))?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "#" || parts[1] != "lkl" {
            return Err(Error::Parse(format!("bad header {head:?}")));
        }
        let ell = if parts[3] == "rationals" {
            None
        } else {
            Some(parts[3].parse().map_err(|_| Error::Parse(format!("bad ell {}", parts[3])))?)
        };
        let bound = parts[4].parse().map_err(|_| Error::Parse(format!("bad bound {}", parts[4])))?;
        let mut entries = Vec::new();
        for line in lines.skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad record {line:?}")));
            }
            let mut poly = LaurentPoly::zero();
            for t in f[2].split(';').filter(|t| !t.is_empty()) {
                let (x, c) = t.split_once(':').ok_or_else(|| Error::Parse(format!("bad term {t:?}")))?;
                let x: i32 = x.parse().map_err(|_| Error::Parse(format!("bad exponent {x:?}")))?;
                let c: i64 = c.parse().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?;
                poly.add_term(x, c);
            }
            entries.push(LklEntry {
                w: weyl.parse(f[0])?,
                y: weyl.parse(f[1])?,
                poly,
            });
        }
        Ok(LklTable {
            cartan_label: parts[2].to_string(),
            ell,
            length_bound: bound,
            entries,
        })
    }

    pub fn to_latex(&self, weyl: &AffineWeyl) -> String {
        let mut out = String::from("\\begin{tabular}{lll}\n$w$ & $y$ & $h_{y,w}$ \\\\\n\\hline\n");
        for e in &self.entries {
            out.push_str(&format!(
                "\\texttt{{{}}} & \\texttt{{{}}} & ${}$ \\\\\n",
                weyl.format(&e.w),
                weyl.format(&e.y),
                e.poly
            ));
        }
        out.push_str("\\end{tabular}\n");
        out
    }

    /// Entry `(w, y) = ℓh_{y,w}(1)`, rows and columns in table order.
    pub fn tilting(&self) -> TiltingTable {
        let labels = self.labels();
        let mut support: Vec<AffineWeylElement> = labels.clone();
        for e in &self.entries {
            if !support.contains(&e.y) {
                support.push(e.y.clone());
            }
        }
        let matrix = labels
            .iter()
            .map(|w| {
                support
                    .iter()
                    .map(|y| {
                        self.entries
                            .iter()
                            .find(|e| &e.w == w && &e.y == y)
                            .map_or(0, |e| e.poly.eval_one())
                    })
                    .collect()
            })
            .collect();
        TiltingTable {
            rows: labels,
            cols: support,
            matrix,
        }
    }
}

/// Classical table from the bar-involution computation in the Hecke algebra.
pub fn classical_table(weyl: &AffineWeyl, label: &str, bound: usize) -> LklTable {
    let h = Hecke::new(weyl);
    let mut entries = Vec::new();
    for w in weyl.ball_sorted(bound) {
        if !weyl.in_w_prime(&w) {
            continue;
        }
        for (y, p) in &h.kl_basis(&w).terms {
            entries.push(LklEntry {
                w: w.clone(),
                y: y.clone(),
                poly: p.clone(),
            });
        }
    }
    let mut t = LklTable {
        cartan_label: label.to_string(),
        ell: None,
        length_bound: bound,
        entries,
    };
    t.sort(weyl);
    t
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TiltingTable {
    pub rows: Vec<AffineWeylElement>,
    pub cols: Vec<AffineWeylElement>,
    pub matrix: Vec<Vec<i64>>,
}

impl TiltingTable {
    pub fn entry(&self, w: &AffineWeylElement, y: &AffineWeylElement) -> i64 {
        match (
            self.rows.iter().position(|x| x == w),
            self.cols.iter().position(|x| x == y),
        ) {
            (Some(i), Some(j)) => self.matrix[i][j],
            _ => 0,
        }
    }

    pub fn to_csv(&self, weyl: &AffineWeyl) -> String {
        let mut out = String::from("w");
        for y in &self.cols {
            out.push(',');
            out.push_str(&weyl.format(y));
        }
        out.push('\n');
        for (w, row) in self.rows.iter().zip(&self.matrix) {
            out.push_str(&weyl.format(w));
            for x in row {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_latex(&self, weyl: &AffineWeyl) -> String {
        let mut out = format!("\\begin{{tabular}}{{l{}}}\n$w$", "r".repeat(self.cols.len()));
        for y in &self.cols {
            out.push_str(&format!(" & ${}$", weyl.format(y)));
        }
        out.push_str(" \\\\\n\\hline\n");
        for (w, row) in self.rows.iter().zip(&self.matrix) {
            out.push_str(&format!("${}$", weyl.format(w)));
            for x in row {
                out.push_str(&format!(" & {x}"));
            }
            out.push_str(" \\\\\n");
        }
        out.push_str("\\end{tabular}\n");
        out
    }

    pub fn to_json(&self, weyl: &AffineWeyl) -> String {
        serde_json::json!({
            "type": "tilting",
            "rows": self.rows.iter().map(|w| weyl.format(w)).collect::<Vec<_>>(),
            "cols": self.cols.iter().map(|w| weyl.format(w)).collect::<Vec<_>>(),
            "matrix": self.matrix,
        })
        .to_string()
    }
}

/// Comparison of `rank_R Hom•(B_w, B_y)` with `Σ_z ℓh_{z,w}(1) ℓh_{z,y}(1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomCheck {
    pub w: String,
    pub y: String,
    pub graded_rank: Vec<(i32, i64)>,
    pub hom_rank: i64,
    pub formula: i64,
    pub equal: bool,
}

pub fn hom_dimension_check<F: Field>(
    engine: &LklEngine<F>,
    w: &AffineWeylElement,
    y: &AffineWeylElement,
) -> Result<HomCheck> {
    let weyl = engine.weyl();
    let bw = engine
        .object(w)
        .ok_or_else(|| Error::Computation(format!("missing {}", weyl.format(w))))?;
    let by = engine
        .object(y)
        .ok_or_else(|| Error::Computation(format!("missing {}", weyl.format(y))))?;
    let grk = hom_total_rank(bw, by)?;
    let hom_rank = grk.eval_one();
    let cw = &engine.chars[w];
    let cy = &engine.chars[y];
    let formula = cw
        .terms
        .iter()
        .map(|(z, p)| p.eval_one() * cy.coeff(z).eval_one())
        .sum();
    Ok(HomCheck {
        w: weyl.format(w),
        y: weyl.format(y),
        graded_rank: grk.terms().collect(),
        hom_rank,
        formula,
        equal: hom_rank == formula,
    })
}

/// Whether `switch(B_w) ≅ B_{w⁻¹}`.
pub fn switch_matches<F: Field>(engine: &LklEngine<F>, w: &AffineWeylElement, seed: u64) -> Result<bool> {
    let weyl = engine.weyl();
    let wi = weyl.inverse(w);
    let (Some(bw), Some(bwi)) = (engine.object(w), engine.object(&wi)) else {
        return Ok(false);
    };
    let sw = crate::abe::switch(bw)?;
    Ok(find_isomorphism(&sw, bwi, seed)?.is_some())
}

/// Degree-0 pairing helper exposed for tests: the constant part of
/// `h ∘ g` at the line `line`.
pub fn top_constant<F: Field>(real: &Realization<F>, g: &Morphism<F>, h: &Morphism<F>, line: usize) -> F::Elem {
    let f = real.field();
    let c = compose(real, g, h);
    c.a[line][line].coeff(Mono::ONE).cloned().unwrap_or_else(|| f.zero())
}

//! The multiplicative side: `𝒪(T)`, its invariants, the fiber product
//! `𝒪(D) = 𝒪(T) ⊗_{𝒪(T/W_f)} 𝒪(T)` and its modules after truncation, plus
//! the rank-one and rank-two Steinberg section checks.
//!
//! A truncated module is a finite-dimensional space with commuting actions
//! of `e^{ε_i} ⊗ 1` and `1 ⊗ e^{ε_i}`. All truncations are built over the
//! local algebra `B_m = 𝒪(T)/𝓙^m 𝒪(T)`, computed inside power series at the
//! identity of `T`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Echelon, Mat};
use crate::poly::{Mono, Poly, PolyRing};
pub use crate::report::CheckRecord;
use crate::weyl::{pairing, AffineWeyl};

/// Element of the group algebra `k[X*(T)]`.
#[derive(Clone, Debug)]
pub struct Laurent<F: Field> {
    pub terms: BTreeMap<Vec<i64>, F::Elem>,
}

impl<F: Field> PartialEq for Laurent<F> {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

#[derive(Clone, Debug)]
pub struct LaurentAlgebra<F: Field> {
    pub field: F,
    pub rank: usize,
}

impl<F: Field> LaurentAlgebra<F> {
    pub fn new(field: F, rank: usize) -> Self {
        LaurentAlgebra { field, rank }
    }

    pub fn zero(&self) -> Laurent<F> {
        Laurent { terms: BTreeMap::new() }
    }

    pub fn mono(&self, lambda: &[i64]) -> Laurent<F> {
        self.term(lambda, self.field.one())
    }

    pub fn term(&self, lambda: &[i64], c: F::Elem) -> Laurent<F> {
        let mut terms = BTreeMap::new();
        if !self.field.is_zero(&c) {
            terms.insert(lambda.to_vec(), c);
        }
        Laurent { terms }
    }

    pub fn one(&self) -> Laurent<F> {
        self.mono(&vec![0; self.rank])
    }

    pub fn add(&self, a: &Laurent<F>, b: &Laurent<F>) -> Laurent<F> {
        let f = &self.field;
        let mut out = a.terms.clone();
        for (k, v) in &b.terms {
            let e = out.entry(k.clone()).or_insert_with(|| f.zero());
            *e = f.add(e, v);
            if f.is_zero(e) {
                out.remove(k);
            }
        }
        Laurent { terms: out }
    }

    pub fn scale(&self, a: &Laurent<F>, c: &F::Elem) -> Laurent<F> {
        let f = &self.field;
        Laurent {
            terms: a
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), f.mul(v, c)))
                .filter(|(_, v)| !f.is_zero(v))
                .collect(),
        }
    }

    pub fn sub(&self, a: &Laurent<F>, b: &Laurent<F>) -> Laurent<F> {
        self.add(a, &self.scale(b, &self.field.from_i64(-1)))
    }

    pub fn mul(&self, a: &Laurent<F>, b: &Laurent<F>) -> Laurent<F> {
        let f = &self.field;
        let mut out: BTreeMap<Vec<i64>, F::Elem> = BTreeMap::new();
        for (ka, va) in &a.terms {
            for (kb, vb) in &b.terms {
                let k: Vec<i64> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                let e = out.entry(k).or_insert_with(|| f.zero());
                f.mul_add_assign(e, va, vb);
            }
        }
        out.retain(|_, v| !f.is_zero(v));
        Laurent { terms: out }
    }

    /// `w · f` for a lattice automorphism given as a matrix on `X*`.
    pub fn act(&self, mat: &[Vec<i64>], a: &Laurent<F>) -> Laurent<F> {
        let mut out = self.zero();
        for (k, v) in &a.terms {
            let img: Vec<i64> = mat.iter().map(|row| row.iter().zip(k).map(|(x, y)| x * y).sum()).collect();
            out = self.add(&out, &self.term(&img, v.clone()));
        }
        out
    }

    pub fn is_zero(&self, a: &Laurent<F>) -> bool {
        a.terms.is_empty()
    }

    /// Evaluation at the identity of `T`.
    pub fn augmentation(&self, a: &Laurent<F>) -> F::Elem {
        let f = &self.field;
        a.terms.values().fold(f.zero(), |acc, v| f.add(&acc, v))
    }

    pub fn render(&self, a: &Laurent<F>) -> String {
        if a.terms.is_empty() {
            return "0".into();
        }
        let names = ["x", "y", "z", "u"];
        let mut parts = Vec::new();
        for (k, v) in a.terms.iter().rev() {
            let mut mono = String::new();
            for (i, &e) in k.iter().enumerate() {
                match e {
                    0 => {}
                    1 => mono.push_str(names[i]),
                    _ => mono.push_str(&format!("{}^{}", names[i], e)),
                }
            }
            let c = self.field.render(v);
            parts.push(match (mono.is_empty(), c.as_str()) {
                (true, _) => c.clone(),
                (false, "1") => mono,
                (false, "-1") => format!("-{mono}"),
                _ => format!("{c}{mono}"),
            });
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

fn simple_root_indices(weyl: &AffineWeyl) -> Vec<usize> {
    let r = weyl.rank();
    (0..r)
        .map(|i| {
            weyl.roots
                .iter()
                .position(|rt| rt.positive && rt.coeffs.iter().enumerate().all(|(j, &c)| c == i64::from(i == j)))
                .expect("simple root present")
        })
        .collect()
}

fn check_supported(weyl: &AffineWeyl) -> Result<()> {
    let d = &weyl.datum;
    if !d.is_semisimple() || d.rank > 2 || d.rank == 0 {
        return Err(Error::Usage(format!(
            "multiplicative side supports semisimple rank 1-2 data, not {}",
            d.cartan_label
        )));
    }
    // Simply connected: the coroots span X_*.
    if d.coroot_quotient_torsion().iter().any(|&t| t != 1) {
        return Err(Error::Usage(format!(
            "multiplicative side needs a simply connected datum, not {}",
            d.cartan_label
        )));
    }
    Ok(())
}

/// W_f-orbit of a weight.
pub fn orbit(weyl: &AffineWeyl, lambda: &[i64]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for w in 0..weyl.finite_order() {
        let img = weyl.act_weight(w, lambda);
        if !out.contains(&img) {
            out.push(img);
        }
    }
    out.sort();
    out
}

pub fn orbit_sum<F: Field>(alg: &LaurentAlgebra<F>, weyl: &AffineWeyl, lambda: &[i64]) -> Laurent<F> {
    orbit(weyl, lambda)
        .iter()
        .fold(alg.zero(), |acc, mu| alg.add(&acc, &alg.mono(mu)))
}

/// Fundamental weights in `X*` coordinates: the dual basis to the simple coroots.
pub fn fundamental_weights(weyl: &AffineWeyl) -> Result<Vec<Vec<i64>>> {
    let r = weyl.rank();
    let n = weyl.lattice_rank();
    if r != n {
        return Err(Error::Usage("fundamental weights need a semisimple datum".into()));
    }
    let simple = simple_root_indices(weyl);
    let cor: Vec<Vec<i64>> = simple.iter().map(|&i| weyl.roots[i].coroot.clone()).collect();
    // Solve ⟨ω_i, α_j^∨⟩ = δ_ij over Z (the coroot matrix is unimodular here).
    let rat = crate::field::Rationals;
    let mat: Mat<_> = (0..n)
        .map(|a| (0..r).map(|j| rat.from_i64(cor[j][a])).collect())
        .collect();
    // Rows indexed by coordinate a, columns by j: M[a][j] = α_j^∨[a]; ω_i = ith row of M^{-1}.
    let inv = linalg::inverse(&rat, &mat).ok_or_else(|| Error::Computation("coroots not a basis".into()))?;
    (0..r)
        .map(|i| {
            (0..n)
                .map(|a| {
                    rat.to_i64(&inv[i][a])
                        .ok_or_else(|| Error::Usage("datum is not simply connected".into()))
                })
                .collect()
        })
        .collect()
}

/// Orbit sums of the fundamental weights.
pub fn invariant_generators<F: Field>(weyl: &AffineWeyl, field: &F) -> Result<Vec<Laurent<F>>> {
    check_supported(weyl)?;
    let alg = LaurentAlgebra::new(field.clone(), weyl.lattice_rank());
    let gens: Vec<Laurent<F>> = fundamental_weights(weyl)?
        .iter()
        .map(|w| orbit_sum(&alg, weyl, w))
        .collect();
    for g in &gens {
        for fin in 0..weyl.finite_order() {
            if alg.act(weyl.weight_matrix(fin), g) != *g {
                return Err(Error::Computation("orbit sum is not invariant".into()));
            }
        }
    }
    Ok(gens)
}

/// Steinberg basis `e_w = e^{-w⁻¹(Σ_{i : w⁻¹α_i < 0} ω_i)}`.
pub fn steinberg_weights(weyl: &AffineWeyl) -> Result<Vec<Vec<i64>>> {
    let fw = fundamental_weights(weyl)?;
    let simple = simple_root_indices(weyl);
    let n = weyl.lattice_rank();
    let mut out = Vec::new();
    for w in 0..weyl.finite_order() {
        let wi = weyl.finite_inverse(w);
        let mut lam = vec![0; n];
        for (i, &ri) in simple.iter().enumerate() {
            let img = weyl.act_weight(wi, &weyl.roots[ri].weight);
            let neg = weyl
                .roots
                .iter()
                .find(|r| r.weight == img)
                .map(|r| !r.positive)
                .unwrap_or(false);
            if neg {
                for a in 0..n {
                    lam[a] += fw[i][a];
                }
            }
        }
        let img = weyl.act_weight(wi, &lam);
        out.push(img.iter().map(|x| -x).collect());
    }
    Ok(out)
}

fn dominant_box(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for v in &out {
            for k in 0..=bound {
                let mut w = v.clone();
                w.push(k);
                if w.iter().sum::<i64>() <= bound {
                    next.push(w);
                }
            }
        }
        out = next;
    }
    out
}

/// `𝒪(T)` as a module over the invariants, with the Steinberg basis.
pub struct SteinbergBasis<F: Field> {
    pub alg: LaurentAlgebra<F>,
    pub weights: Vec<Vec<i64>>,
    pub basis: Vec<Laurent<F>>,
    /// Dominant weights whose orbit sums span the invariants used in expansions.
    fundamental: Vec<Vec<i64>>,
    weyl_order: usize,
    orbit_sums: Vec<(Vec<i64>, Laurent<F>)>,
}

impl<F: Field> SteinbergBasis<F> {
    pub fn new(weyl: &AffineWeyl, field: &F) -> Result<Self> {
        check_supported(weyl)?;
        let alg = LaurentAlgebra::new(field.clone(), weyl.lattice_rank());
        let weights = steinberg_weights(weyl)?;
        let basis = weights.iter().map(|w| alg.mono(w)).collect();
        let fundamental = fundamental_weights(weyl)?;
        let mut orbit_sums = Vec::new();
        for mu in dominant_box(weyl.rank(), 12) {
            let lam: Vec<i64> = (0..weyl.lattice_rank())
                .map(|a| (0..weyl.rank()).map(|i| mu[i] * fundamental[i][a]).sum())
                .collect();
            orbit_sums.push((mu, orbit_sum(&alg, weyl, &lam)));
        }
        Ok(SteinbergBasis {
            alg,
            weights,
            basis,
            fundamental,
            weyl_order: weyl.finite_order(),
            orbit_sums,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Invariant coefficients `c_w` with `f = Σ_w c_w e_w`, searching orbit
    /// sums `m_μ` with `|μ| ≤ bound`.
    pub fn expand_with(&self, f: &Laurent<F>, bound: i64) -> Option<Vec<Laurent<F>>> {
        let fld = &self.alg.field;
        let mus: Vec<&(Vec<i64>, Laurent<F>)> = self
            .orbit_sums
            .iter()
            .filter(|(mu, _)| mu.iter().sum::<i64>() <= bound)
            .collect();
        let mut cols: Vec<(usize, usize, Laurent<F>)> = Vec::new();
        for (w, e) in self.basis.iter().enumerate() {
            for (k, (_, m)) in mus.iter().enumerate() {
                cols.push((w, k, self.alg.mul(m, e)));
            }
        }
        let mut keys: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        for (_, _, p) in &cols {
            for k in p.terms.keys() {
                let n = keys.len();
                keys.entry(k.clone()).or_insert(n);
            }
        }
        for k in f.terms.keys() {
            if !keys.contains_key(k) {
                return None;
            }
        }
        let vec_of = |p: &Laurent<F>| {
            let mut v = vec![fld.zero(); keys.len()];
            for (k, c) in &p.terms {
                v[keys[k]] = c.clone();
            }
            v
        };
        let mut ech = Echelon::with_tags(fld, keys.len(), cols.len());
        for (t, (_, _, p)) in cols.iter().enumerate() {
            ech.insert_tagged(vec_of(p), t);
        }
        let sol = ech.express(&vec_of(f))?;
        let mut out = vec![self.alg.zero(); self.basis.len()];
        for (t, (w, k, _)) in cols.iter().enumerate() {
            if !fld.is_zero(&sol[t]) {
                out[*w] = self.alg.add(&out[*w], &self.alg.scale(&mus[*k].1, &sol[t]));
            }
        }
        Some(out)
    }

    pub fn expand(&self, f: &Laurent<F>) -> Result<Vec<Laurent<F>>> {
        let span: i64 = f
            .terms
            .keys()
            .map(|k| k.iter().map(|x| x.abs()).sum::<i64>())
            .max()
            .unwrap_or(0);
        for bound in 0..=(span + 4).min(12) {
            if let Some(c) = self.expand_with(f, bound) {
                return Ok(c);
            }
        }
        Err(Error::WindowExceeded(span as i32))
    }

    /// Whether `Σ c_w e_w = 0` has only the trivial solution with orbit-sum
    /// coefficients of size `≤ bound`.
    pub fn independent_up_to(&self, bound: i64) -> bool {
        let fld = &self.alg.field;
        let mus: Vec<&Laurent<F>> = self
            .orbit_sums
            .iter()
            .filter(|(mu, _)| mu.iter().sum::<i64>() <= bound)
            .map(|(_, m)| m)
            .collect();
        let mut keys: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut cols = Vec::new();
        for e in &self.basis {
            for m in &mus {
                let p = self.alg.mul(m, e);
                for k in p.terms.keys() {
                    let n = keys.len();
                    keys.entry(k.clone()).or_insert(n);
                }
                cols.push(p);
            }
        }
        let mut ech = Echelon::new(fld, keys.len());
        let mut rank = 0;
        for p in &cols {
            let mut v = vec![fld.zero(); keys.len()];
            for (k, c) in &p.terms {
                v[keys[k]] = c.clone();
            }
            if ech.insert(v) {
                rank += 1;
            }
        }
        rank == cols.len()
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl_order
    }

    pub fn fundamental(&self) -> &[Vec<i64>] {
        &self.fundamental
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PittieSteinbergReport {
    pub rank: usize,
    pub weyl_order: usize,
    pub basis: Vec<String>,
    pub window: i64,
    pub tested: usize,
    pub all_expand: bool,
    pub independent: bool,
    pub pass: bool,
}

/// Every `e^λ` with `|λ_i| ≤ window` expands in the Steinberg basis with
/// invariant coefficients, and the basis is independent over the invariants.
pub fn pittie_steinberg_check<F: Field>(weyl: &AffineWeyl, field: &F, window: i64) -> Result<PittieSteinbergReport> {
    let sb = SteinbergBasis::new(weyl, field)?;
    let n = weyl.lattice_rank();
    let mut lams = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &lams {
            for k in -window..=window {
                let mut w: Vec<i64> = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        lams = next;
    }
    let mut all_expand = true;
    for lam in &lams {
        let f = sb.alg.mono(lam);
        match sb.expand(&f) {
            Ok(c) => {
                let back = c
                    .iter()
                    .zip(&sb.basis)
                    .fold(sb.alg.zero(), |acc, (ci, e)| sb.alg.add(&acc, &sb.alg.mul(ci, e)));
                all_expand &= back == f;
            }
            Err(_) => all_expand = false,
        }
    }
    let independent = sb.independent_up_to(2 * window + 2);
    let rank = sb.rank();
    Ok(PittieSteinbergReport {
        rank,
        weyl_order: sb.weyl_order,
        basis: sb.basis.iter().map(|b| sb.alg.render(b)).collect(),
        window,
        tested: lams.len(),
        all_expand,
        independent,
        pass: all_expand && independent && rank == sb.weyl_order,
    })
}

/// The local algebra `𝒪(T)/𝓙^m 𝒪(T)` as a quotient of power series
/// `k[[z]]/(z)^N` with `e^{ε_i} = 1 + z_i`, `N` chosen so the quotient is stable.
pub struct LocalTorus<F: Field> {
    pub alg: LaurentAlgebra<F>,
    pub level: usize,
    pub order: u32,
    ring: PolyRing<F>,
    monos: Vec<Mono>,
    index: HashMap<Mono, usize>,
    /// Quotient basis: ambient coordinates not among the pivots.
    pub basis: Vec<usize>,
    residual: Vec<Vec<(usize, F::Elem)>>,
    table: Vec<Vec<Vec<F::Elem>>>,
    x: Vec<Vec<F::Elem>>,
    xinv: Vec<Vec<F::Elem>>,
}

fn series_ring<F: Field>(field: &F, n: usize, order: u32) -> (PolyRing<F>, Vec<Mono>, HashMap<Mono, usize>) {
    let ring = PolyRing::new(field.clone(), n);
    let mut monos = Vec::new();
    for k in 0..order {
        monos.extend(ring.mono_basis(k));
    }
    let index = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    (ring, monos, index)
}

fn truncate<F: Field>(p: &Poly<F>, order: u32) -> Poly<F> {
    Poly {
        terms: p.terms.iter().filter(|(m, _)| m.total() < order).cloned().collect(),
    }
}

fn mono_pow(i: usize, j: u32) -> Mono {
    let mut e = [0u32; 4];
    e[i] = j;
    Mono::from_exps(&e)
}

fn series_of<F: Field>(ring: &PolyRing<F>, a: &Laurent<F>, order: u32) -> Poly<F> {
    let mut out = Poly::zero();
    for (k, c) in &a.terms {
        out = ring.add(&out, &ring.scale(&series_of_integral(ring, k, order), c));
    }
    out
}

/// Integral version of `series_of_mono`: binomial coefficients computed in i128
/// before reduction, so it is valid in every characteristic.
fn series_of_integral<F: Field>(ring: &PolyRing<F>, lambda: &[i64], order: u32) -> Poly<F> {
    let f = &ring.field;
    let mut acc = ring.one();
    for (i, &k) in lambda.iter().enumerate() {
        let mut s = Poly::zero();
        let mut c: i128 = 1;
        for j in 0..order {
            let coeff = match f.characteristic() {
                0 => f.from_i64(i64::try_from(c).expect("binomial coefficient fits in i64")),
                p => f.from_i64(c.rem_euclid(p as i128) as i64),
            };
            s = ring.add(&s, &ring.monomial(mono_pow(i, j), coeff));
            c = c * (k as i128 - j as i128) / (j as i128 + 1);
        }
        acc = truncate(&ring.mul(&acc, &s), order);
    }
    acc
}

impl<F: Field> LocalTorus<F> {
    pub fn new(weyl: &AffineWeyl, field: &F, level: usize) -> Result<Self> {
        check_supported(weyl)?;
        let invs = invariant_generators(weyl, field)?;
        let alg = LaurentAlgebra::new(field.clone(), weyl.lattice_rank());
        let shifted: Vec<Laurent<F>> = invs
            .iter()
            .map(|g| alg.sub(g, &alg.scale(&alg.one(), &alg.augmentation(g))))
            .collect();
        let mut order = 2 * level as u32 + 2;
        let mut prev: Option<usize> = None;
        loop {
            let t = Self::build(&alg, &shifted, level, order);
            let d = t.basis.len();
            if prev == Some(d) {
                return Ok(Self::build(&alg, &shifted, level, order - 1));
            }
            prev = Some(d);
            order += 1;
            if order > 40 {
                return Err(Error::Computation("local quotient did not stabilize".into()));
            }
        }
    }

    fn build(alg: &LaurentAlgebra<F>, shifted: &[Laurent<F>], level: usize, order: u32) -> Self {
        let field = &alg.field;
        let n = alg.rank;
        let (ring, monos, index) = series_ring(field, n, order);
        let gens: Vec<Poly<F>> = shifted.iter().map(|g| series_of(&ring, g, order)).collect();
        // Products of `level` generators, then times every monomial.
        let mut prods = vec![ring.one()];
        for _ in 0..level {
            let mut next = Vec::new();
            for p in &prods {
                for g in &gens {
                    next.push(truncate(&ring.mul(p, g), order));
                }
            }
            prods = next;
        }
        let dim = monos.len();
        let mut ech = Echelon::new(field, dim);
        for p in &prods {
            for m in &monos {
                let q = truncate(&ring.mul_mono(p, *m), order);
                let mut v = vec![field.zero(); dim];
                for (mm, c) in &q.terms {
                    v[index[mm]] = c.clone();
                }
                ech.insert(v);
            }
        }
        let rref = ech.rref();
        let mut is_pivot = vec![false; dim];
        for (p, _) in &rref {
            is_pivot[*p] = true;
        }
        let basis: Vec<usize> = (0..dim).filter(|&c| !is_pivot[c]).collect();
        let mut pos = vec![usize::MAX; dim];
        for (k, &c) in basis.iter().enumerate() {
            pos[c] = k;
        }
        let mut residual = vec![Vec::new(); dim];
        for &c in &basis {
            residual[c] = vec![(pos[c], field.one())];
        }
        for (p, row) in &rref {
            residual[*p] = basis
                .iter()
                .enumerate()
                .filter(|(_, &c)| !field.is_zero(&row[c]))
                .map(|(k, &c)| (k, field.neg(&row[c])))
                .collect();
        }
        let mut t = LocalTorus {
            alg: alg.clone(),
            level,
            order,
            ring,
            monos,
            index,
            basis,
            residual,
            table: Vec::new(),
            x: Vec::new(),
            xinv: Vec::new(),
        };
        let d = t.basis.len();
        let mut table = vec![vec![Vec::new(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let m = t.monos[t.basis[i]].mul(t.monos[t.basis[j]]);
                table[i][j] = if m.total() < order {
                    t.reduce_mono(m)
                } else {
                    vec![field.zero(); d]
                };
            }
        }
        t.table = table;
        t.x = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                t.from_laurent(&alg.mono(&e))
            })
            .collect();
        t.xinv = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = -1;
                t.from_laurent(&alg.mono(&e))
            })
            .collect();
        t
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn reduce_mono(&self, m: Mono) -> Vec<F::Elem> {
        let f = &self.alg.field;
        let mut v = vec![f.zero(); self.dim()];
        for (k, c) in &self.residual[self.index[&m]] {
            v[*k] = f.add(&v[*k], c);
        }
        v
    }

    pub fn reduce(&self, p: &Poly<F>) -> Vec<F::Elem> {
        let f = &self.alg.field;
        let mut v = vec![f.zero(); self.dim()];
        for (m, c) in &p.terms {
            if m.total() >= self.order {
                continue;
            }
            for (k, r) in &self.residual[self.index[m]] {
                f.mul_add_assign(&mut v[*k], c, r);
            }
        }
        v
    }

    pub fn from_laurent(&self, a: &Laurent<F>) -> Vec<F::Elem> {
        self.reduce(&series_of(&self.ring, a, self.order))
    }

    pub fn one(&self) -> Vec<F::Elem> {
        self.from_laurent(&self.alg.one())
    }

    pub fn mul(&self, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.alg.field;
        let d = self.dim();
        let mut out = vec![f.zero(); d];
        for i in 0..d {
            if f.is_zero(&a[i]) {
                continue;
            }
            for j in 0..d {
                if f.is_zero(&b[j]) {
                    continue;
                }
                let c = f.mul(&a[i], &b[j]);
                for (k, t) in self.table[i][j].iter().enumerate() {
                    if !f.is_zero(t) {
                        f.mul_add_assign(&mut out[k], &c, t);
                    }
                }
            }
        }
        out
    }

    /// Matrix of multiplication by `a` (columns are images of basis vectors).
    pub fn mult_matrix(&self, a: &[F::Elem]) -> Mat<F::Elem> {
        let f = &self.alg.field;
        let d = self.dim();
        let cols: Vec<Vec<F::Elem>> = (0..d)
            .map(|j| {
                let mut e = vec![f.zero(); d];
                e[j] = f.one();
                self.mul(a, &e)
            })
            .collect();
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Matrix of the algebra automorphism induced by a lattice automorphism.
    pub fn automorphism(&self, mat: &[Vec<i64>]) -> Mat<F::Elem> {
        let f = &self.alg.field;
        let d = self.dim();
        let n = self.alg.rank;
        let imgs: Vec<Vec<F::Elem>> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                let img: Vec<i64> = mat.iter().map(|row| row[i]).collect();
                let _ = e;
                self.from_laurent(&self.alg.mono(&img))
            })
            .collect();
        let zs: Vec<Vec<F::Elem>> = imgs
            .iter()
            .map(|v| {
                let mut w = v.clone();
                let one = self.one();
                for (a, b) in w.iter_mut().zip(&one) {
                    *a = f.sub(a, b);
                }
                w
            })
            .collect();
        let cols: Vec<Vec<F::Elem>> = self
            .basis
            .iter()
            .map(|&c| {
                let m = self.monos[c];
                let mut acc = self.one();
                for (i, z) in zs.iter().enumerate() {
                    for _ in 0..m.exp(i) {
                        acc = self.mul(&acc, z);
                    }
                }
                acc
            })
            .collect();
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Dimension of the `W_f`-fixed subspace.
    pub fn invariant_dim(&self, weyl: &AffineWeyl) -> usize {
        let f = &self.alg.field;
        let d = self.dim();
        let mut eqs = Vec::new();
        for fin in 0..weyl.finite_order() {
            let a = self.automorphism(weyl.weight_matrix(fin));
            for (i, row) in a.into_iter().enumerate() {
                let mut r = row;
                r[i] = f.sub(&r[i], &f.one());
                eqs.push(r);
            }
        }
        linalg::nullspace(f, &eqs, d).len()
    }
}

/// A truncated `𝒪(D)`-module: `left[i]`, `right[i]` are the actions of
/// `e^{ε_i} ⊗ 1` and `1 ⊗ e^{ε_i}`; `generator` generates it when present.
#[derive(Clone, Debug)]
pub struct TruncModule<F: Field> {
    pub name: String,
    pub dim: usize,
    pub left: Vec<Mat<F::Elem>>,
    pub right: Vec<Mat<F::Elem>>,
    pub generator: Option<Vec<F::Elem>>,
}

fn mat_vec<F: Field>(f: &F, a: &Mat<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    a.iter()
        .map(|row| {
            let mut acc = f.zero();
            for (x, y) in row.iter().zip(v) {
                if !f.is_zero(x) && !f.is_zero(y) {
                    f.mul_add_assign(&mut acc, x, y);
                }
            }
            acc
        })
        .collect()
}

fn block_diag<F: Field>(f: &F, blocks: &[&Mat<F::Elem>]) -> Mat<F::Elem> {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = vec![vec![f.zero(); n]; n];
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                out[off + i][off + j] = x.clone();
            }
        }
        off += b.len();
    }
    out
}

/// Modules over `𝒪(D)` truncated at level `m` for one root datum.
pub struct MultContext<F: Field> {
    pub weyl: AffineWeyl,
    pub torus: LocalTorus<F>,
    pub steinberg: SteinbergBasis<F>,
    field: F,
}

impl<F: Field> MultContext<F> {
    pub fn new(weyl: &AffineWeyl, field: &F, level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::Usage("truncation level must be at least 1".into()));
        }
        Ok(MultContext {
            weyl: weyl.clone(),
            torus: LocalTorus::new(weyl, field, level)?,
            steinberg: SteinbergBasis::new(weyl, field)?,
            field: field.clone(),
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    fn unit(&self, i: usize, sign: i64) -> Vec<i64> {
        let mut e = vec![0; self.weyl.lattice_rank()];
        e[i] = sign;
        e
    }

    fn laurent_op(&self, a: &Laurent<F>) -> Mat<F::Elem> {
        self.torus.mult_matrix(&self.torus.from_laurent(a))
    }

    /// `𝓜_w`: `𝒪(T)` with `f ⊗ g` acting by `f · w(g)`.
    pub fn m_module(&self, w: usize) -> TruncModule<F> {
        let alg = &self.torus.alg;
        let n = self.weyl.lattice_rank();
        let left = (0..n).map(|i| self.laurent_op(&alg.mono(&self.unit(i, 1)))).collect();
        let right = (0..n)
            .map(|i| {
                let img = self.weyl.act_weight(w, &self.unit(i, 1));
                self.laurent_op(&alg.mono(&img))
            })
            .collect();
        TruncModule {
            name: format!("M[{}]", word_name(&self.weyl, w)),
            dim: self.torus.dim(),
            left,
            right,
            generator: Some(self.torus.one()),
        }
    }

    /// `𝓑_s = 𝒪(T ×_{T/⟨s⟩} T)`, free over the left `𝒪(T)` with basis
    /// `1⊗1, 1⊗e^{ω_i}`.
    pub fn b_module(&self, i: usize) -> Result<TruncModule<F>> {
        let alg = &self.torus.alg;
        let n = self.weyl.lattice_rank();
        let f = &self.field;
        let simple = simple_root_indices(&self.weyl);
        let root = &self.weyl.roots[simple[i]];
        let omega = fundamental_weights(&self.weyl)?[i].clone();
        let alpha = root.weight.clone();
        let x = alg.mono(&omega);
        // g = g0 + g1·x with g0, g1 ∈ 𝒪(T)^s.
        let decompose = |lam: &[i64]| -> (Laurent<F>, Laurent<F>) {
            let k = pairing(lam, &root.coroot);
            let mut g1 = alg.zero();
            if k > 0 {
                for j in 0..k {
                    let mu: Vec<i64> = (0..n).map(|a| lam[a] - omega[a] - j * alpha[a]).collect();
                    g1 = alg.add(&g1, &alg.mono(&mu));
                }
            } else if k < 0 {
                for j in 0..-k {
                    let mu: Vec<i64> = (0..n).map(|a| lam[a] - k * alpha[a] - omega[a] - j * alpha[a]).collect();
                    g1 = alg.sub(&g1, &alg.mono(&mu));
                }
            }
            let g0 = alg.sub(&alg.mono(lam), &alg.mul(&g1, &x));
            (g0, g1)
        };
        let d = self.torus.dim();
        let mut right = Vec::new();
        for a in 0..n {
            let lam = self.unit(a, 1);
            let (f0, f1) = decompose(&lam);
            let xl: Vec<i64> = (0..n).map(|b| lam[b] + omega[b]).collect();
            let (h0, h1) = decompose(&xl);
            // (c, d) ↦ (f0 c + h0 d, f1 c + h1 d).
            let blocks = [
                [self.laurent_op(&f0), self.laurent_op(&h0)],
                [self.laurent_op(&f1), self.laurent_op(&h1)],
            ];
            let mut m = vec![vec![f.zero(); 2 * d]; 2 * d];
            for (bi, brow) in blocks.iter().enumerate() {
                for (bj, b) in brow.iter().enumerate() {
                    for r in 0..d {
                        for c in 0..d {
                            m[bi * d + r][bj * d + c] = b[r][c].clone();
                        }
                    }
                }
            }
            right.push(m);
        }
        let left = (0..n)
            .map(|a| {
                let op = self.laurent_op(&alg.mono(&self.unit(a, 1)));
                block_diag(f, &[&op, &op])
            })
            .collect();
        let mut gen = self.torus.one();
        gen.extend(vec![f.zero(); d]);
        Ok(TruncModule {
            name: format!("B[{}]", i + 1),
            dim: 2 * d,
            left,
            right,
            generator: Some(gen),
        })
    }

    /// `𝒪(D)` itself, free over the left factor on the Steinberg basis.
    pub fn d_algebra(&self) -> Result<TruncModule<F>> {
        let alg = &self.torus.alg;
        let sb = &self.steinberg;
        let n = self.weyl.lattice_rank();
        let f = &self.field;
        let d = self.torus.dim();
        let k = sb.rank();
        let mut right = Vec::new();
        for a in 0..n {
            // Column block w: image of 1 ⊗ e_w under 1 ⊗ e^{ε_a}.
            let mut m = vec![vec![f.zero(); k * d]; k * d];
            for (w, e) in sb.basis.iter().enumerate() {
                let prod = alg.mul(e, &alg.mono(&self.unit(a, 1)));
                let coeffs = sb.expand(&prod)?;
                for (u, c) in coeffs.iter().enumerate() {
                    let op = self.laurent_op(c);
                    for r in 0..d {
                        for cc in 0..d {
                            m[u * d + r][w * d + cc] = op[r][cc].clone();
                        }
                    }
                }
            }
            right.push(m);
        }
        let left = (0..n)
            .map(|a| {
                let op = self.laurent_op(&alg.mono(&self.unit(a, 1)));
                let blocks: Vec<&Mat<F::Elem>> = (0..k).map(|_| &op).collect();
                block_diag(f, &blocks)
            })
            .collect();
        let e_index = sb
            .weights
            .iter()
            .position(|w| w.iter().all(|&x| x == 0))
            .ok_or_else(|| Error::Computation("Steinberg basis lacks 1".into()))?;
        let mut gen = vec![f.zero(); k * d];
        for (r, x) in self.torus.one().into_iter().enumerate() {
            gen[e_index * d + r] = x;
        }
        Ok(TruncModule {
            name: "O(D)".into(),
            dim: k * d,
            left,
            right,
            generator: Some(gen),
        })
    }

    /// `M ⊛ N = M ⊗_{𝒪(T)} N`, the middle factors identified.
    pub fn convolve(&self, m: &TruncModule<F>, n: &TruncModule<F>) -> TruncModule<F> {
        let f = &self.field;
        let dm = m.dim;
        let dn = n.dim;
        let total = dm * dn;
        let idx = |i: usize, j: usize| i * dn + j;
        let mut ech = Echelon::new(f, total);
        for a in 0..m.right.len() {
            let rm = &m.right[a];
            let ln = &n.left[a];
            for i in 0..dm {
                for j in 0..dn {
                    // R_a v_i ⊗ u_j − v_i ⊗ L_a u_j.
                    let mut v = vec![f.zero(); total];
                    for (r, row) in rm.iter().enumerate() {
                        if !f.is_zero(&row[i]) {
                            v[idx(r, j)] = f.add(&v[idx(r, j)], &row[i]);
                        }
                    }
                    for (r, row) in ln.iter().enumerate() {
                        if !f.is_zero(&row[j]) {
                            v[idx(i, r)] = f.sub(&v[idx(i, r)], &row[j]);
                        }
                    }
                    ech.insert(v);
                }
            }
        }
        let q = Quotient::new(f, &ech, total);
        let lift_op = |op: &dyn Fn(usize, usize) -> Vec<(usize, F::Elem)>| -> Mat<F::Elem> {
            let cols: Vec<Vec<F::Elem>> = q
                .basis
                .iter()
                .map(|&c| {
                    let (i, j) = (c / dn, c % dn);
                    let mut v = vec![f.zero(); total];
                    for (k, x) in op(i, j) {
                        v[k] = f.add(&v[k], &x);
                    }
                    q.reduce(f, &v)
                })
                .collect();
            let d = q.basis.len();
            (0..d).map(|r| (0..d).map(|c| cols[c][r].clone()).collect()).collect()
        };
        let left: Vec<Mat<F::Elem>> = m
            .left
            .iter()
            .map(|lm| {
                lift_op(&|i, j| {
                    (0..dm)
                        .filter(|&r| !f.is_zero(&lm[r][i]))
                        .map(|r| (idx(r, j), lm[r][i].clone()))
                        .collect()
                })
            })
            .collect();
        let right: Vec<Mat<F::Elem>> = n
            .right
            .iter()
            .map(|rn| {
                lift_op(&|i, j| {
                    (0..dn)
                        .filter(|&r| !f.is_zero(&rn[r][j]))
                        .map(|r| (idx(i, r), rn[r][j].clone()))
                        .collect()
                })
            })
            .collect();
        let generator = match (&m.generator, &n.generator) {
            (Some(g), Some(h)) => {
                let mut v = vec![f.zero(); total];
                for (i, x) in g.iter().enumerate() {
                    for (j, y) in h.iter().enumerate() {
                        if !f.is_zero(x) && !f.is_zero(y) {
                            v[idx(i, j)] = f.mul(x, y);
                        }
                    }
                }
                Some(q.reduce(f, &v))
            }
            _ => None,
        };
        TruncModule {
            name: format!("{}*{}", m.name, n.name),
            dim: q.basis.len(),
            left,
            right,
            generator,
        }
    }

    pub fn direct_sum(&self, m: &TruncModule<F>, n: &TruncModule<F>) -> TruncModule<F> {
        let f = &self.field;
        let pair = |a: &[Mat<F::Elem>], b: &[Mat<F::Elem>]| -> Vec<Mat<F::Elem>> {
            a.iter().zip(b).map(|(x, y)| block_diag(f, &[x, y])).collect()
        };
        TruncModule {
            name: format!("{}+{}", m.name, n.name),
            dim: m.dim + n.dim,
            left: pair(&m.left, &n.left),
            right: pair(&m.right, &n.right),
            generator: None,
        }
    }

    /// Quotient of `m` by the submodule generated by `rels`.
    pub fn quotient(&self, m: &TruncModule<F>, rels: &[Vec<F::Elem>]) -> TruncModule<F> {
        let f = &self.field;
        let ops: Vec<&Mat<F::Elem>> = m.left.iter().chain(&m.right).collect();
        let mut ech = Echelon::new(f, m.dim);
        let mut queue: Vec<Vec<F::Elem>> = rels.to_vec();
        while let Some(v) = queue.pop() {
            let r = ech.reduce(&v);
            if r.iter().all(|x| f.is_zero(x)) {
                continue;
            }
            ech.insert(r.clone());
            for op in &ops {
                queue.push(mat_vec(f, op, &r));
            }
        }
        let q = Quotient::new(f, &ech, m.dim);
        let conj = |op: &Mat<F::Elem>| -> Mat<F::Elem> {
            let cols: Vec<Vec<F::Elem>> = q
                .basis
                .iter()
                .map(|&c| {
                    let col: Vec<F::Elem> = op.iter().map(|row| row[c].clone()).collect();
                    q.reduce(f, &col)
                })
                .collect();
            let d = q.basis.len();
            (0..d).map(|r| (0..d).map(|c| cols[c][r].clone()).collect()).collect()
        };
        TruncModule {
            name: format!("{}/rel", m.name),
            dim: q.basis.len(),
            left: m.left.iter().map(conj).collect(),
            right: m.right.iter().map(conj).collect(),
            generator: m.generator.as_ref().map(|g| q.reduce(f, g)),
        }
    }

    /// The element `Σ f_k ⊗ g_k` applied to the generator of a cyclic module.
    pub fn element(&self, m: &TruncModule<F>, terms: &[(Vec<i64>, Vec<i64>, i64)]) -> Result<Vec<F::Elem>> {
        let f = &self.field;
        let g = m
            .generator
            .clone()
            .ok_or_else(|| Error::Computation("module is not cyclic".into()))?;
        let mut out = vec![f.zero(); m.dim];
        for (lam, mu, c) in terms {
            let mut v = g.clone();
            for (ops, e) in [(&m.right, mu), (&m.left, lam)] {
                for (i, &k) in e.iter().enumerate() {
                    let op = if k >= 0 {
                        ops[i].clone()
                    } else {
                        linalg::inverse(f, &ops[i]).ok_or_else(|| Error::Computation("singular action".into()))?
                    };
                    for _ in 0..k.abs() {
                        v = mat_vec(f, &op, &v);
                    }
                }
            }
            let cc = f.from_i64(*c);
            for (o, x) in out.iter_mut().zip(&v) {
                f.mul_add_assign(o, &cc, x);
            }
        }
        Ok(out)
    }

    /// Mutually inverse module maps `m → n`, `n → m`, if `m ≅ n`.
    pub fn isomorphism(&self, m: &TruncModule<F>, n: &TruncModule<F>) -> Option<(Mat<F::Elem>, Mat<F::Elem>)> {
        if m.dim != n.dim {
            return None;
        }
        let f = &self.field;
        let d = m.dim;
        let ops_m: Vec<&Mat<F::Elem>> = m.left.iter().chain(&m.right).collect();
        let ops_n: Vec<&Mat<F::Elem>> = n.left.iter().chain(&n.right).collect();
        // Solutions Φ with Φ X = X' Φ; unknown Φ[r][c] at r·d + c.
        let cyclic = m.generator.as_ref().and_then(|g| cyclic_homs(f, g, &ops_m, &ops_n, d));
        let sols = if let Some(sols) = cyclic {
            sols
        } else {
            let mut eqs = Vec::new();
            for (x, y) in ops_m.iter().zip(&ops_n) {
                for r in 0..d {
                    for c in 0..d {
                        let mut row = vec![f.zero(); d * d];
                        for k in 0..d {
                            // (Φ X)[r][c] = Σ_k Φ[r][k] X[k][c]; (X' Φ)[r][c] = Σ_k X'[r][k] Φ[k][c].
                            row[r * d + k] = f.add(&row[r * d + k], &x[k][c]);
                            row[k * d + c] = f.sub(&row[k * d + c], &y[r][k]);
                        }
                        if row.iter().any(|v| !f.is_zero(v)) {
                            eqs.push(row);
                        }
                    }
                }
            }
            linalg::nullspace(f, &eqs, d * d)
                .into_iter()
                .map(|v| (0..d).map(|r| v[r * d..(r + 1) * d].to_vec()).collect())
                .collect()
        };
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for attempt in 0..16 {
            let mut phi = vec![vec![f.zero(); d]; d];
            for (k, s) in sols.iter().enumerate() {
                let c = if attempt == 0 {
                    f.from_i64(k as i64 + 1)
                } else {
                    f.random(&mut rng)
                };
                for r in 0..d {
                    for cc in 0..d {
                        f.mul_add_assign(&mut phi[r][cc], &c, &s[r][cc]);
                    }
                }
            }
            if let Some(inv) = linalg::inverse(f, &phi) {
                let ok = ops_m.iter().zip(&ops_n).all(|(x, y)| {
                    linalg::mat_mul(f, &phi, x) == linalg::mat_mul(f, y, &phi)
                        && linalg::mat_mul(f, &inv, y) == linalg::mat_mul(f, x, &inv)
                });
                if ok {
                    return Some((phi, inv));
                }
            }
        }
        None
    }
}

/// Module maps out of a cyclic module, parametrized by the image of the generator.
fn cyclic_homs<F: Field>(
    f: &F,
    gen: &[F::Elem],
    ops_m: &[&Mat<F::Elem>],
    ops_n: &[&Mat<F::Elem>],
    d: usize,
) -> Option<Vec<Mat<F::Elem>>> {
    // Words P_k with P_k g a basis, and the action of each operator on it.
    let mut ech = Echelon::with_tags(f, d, d);
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut vecs: Vec<Vec<F::Elem>> = Vec::new();
    let mut queue = std::collections::VecDeque::from([(Vec::new(), gen.to_vec())]);
    while let Some((w, v)) = queue.pop_front() {
        if words.len() == d || !ech.insert_tagged(v.clone(), words.len()) {
            continue;
        }
        words.push(w.clone());
        vecs.push(v.clone());
        for (o, op) in ops_m.iter().enumerate() {
            let mut w2 = w.clone();
            w2.push(o);
            queue.push_back((w2, mat_vec(f, op, &v)));
        }
    }
    if words.len() != d {
        return None;
    }
    // Images of the words applied to an unknown v' in N, as d×d matrices.
    let word_mat = |w: &[usize]| -> Mat<F::Elem> {
        let mut m = linalg::identity(f, d);
        for &o in w {
            m = linalg::mat_mul(f, ops_n[o], &m);
        }
        m
    };
    let mats: Vec<Mat<F::Elem>> = words.iter().map(|w| word_mat(w)).collect();
    let mut eqs = Vec::new();
    for (k, v) in vecs.iter().enumerate() {
        for (o, op) in ops_m.iter().enumerate() {
            let img = mat_vec(f, op, v);
            let c = ech.express(&img)?;
            // X'·(P_k v') − Σ_j c_j P_j v' = 0.
            let lhs = linalg::mat_mul(f, ops_n[o], &mats[k]);
            for r in 0..d {
                let mut row = lhs[r].clone();
                for (j, cj) in c.iter().enumerate() {
                    if f.is_zero(cj) {
                        continue;
                    }
                    for col in 0..d {
                        let t = f.mul(cj, &mats[j][r][col]);
                        row[col] = f.sub(&row[col], &t);
                    }
                }
                if row.iter().any(|x| !f.is_zero(x)) {
                    eqs.push(row);
                }
            }
        }
    }
    // Φ = [P_0 v' | … | P_{d-1} v'] in the basis {P_k g}; convert to the standard basis.
    let basis_mat: Mat<F::Elem> = (0..d).map(|r| (0..d).map(|k| vecs[k][r].clone()).collect()).collect();
    let binv = linalg::inverse(f, &basis_mat)?;
    Some(
        linalg::nullspace(f, &eqs, d)
            .into_iter()
            .map(|vp| {
                let imgs: Mat<F::Elem> = (0..d)
                    .map(|r| (0..d).map(|k| mat_vec(f, &mats[k], &vp)[r].clone()).collect())
                    .collect();
                linalg::mat_mul(f, &imgs, &binv)
            })
            .collect(),
    )
}

/// Quotient of `k^n` by an echelon subspace, with reduction to the nonpivot basis.
struct Quotient<F: Field> {
    basis: Vec<usize>,
    rref: Vec<(usize, Vec<F::Elem>)>,
}

impl<F: Field> Quotient<F> {
    fn new(f: &F, ech: &Echelon<F>, n: usize) -> Self {
        let rref = ech.rref();
        let mut is_pivot = vec![false; n];
        for (p, _) in &rref {
            is_pivot[*p] = true;
        }
        let _ = f;
        Quotient {
            basis: (0..n).filter(|&c| !is_pivot[c]).collect(),
            rref,
        }
    }

    fn reduce(&self, f: &F, v: &[F::Elem]) -> Vec<F::Elem> {
        let mut w = v.to_vec();
        for (p, row) in &self.rref {
            if f.is_zero(&w[*p]) {
                continue;
            }
            let c = w[*p].clone();
            for (x, y) in w.iter_mut().zip(row) {
                if !f.is_zero(y) {
                    let t = f.mul(&c, y);
                    *x = f.sub(x, &t);
                }
            }
        }
        self.basis.iter().map(|&c| w[c].clone()).collect()
    }
}

fn word_name(weyl: &AffineWeyl, fin: usize) -> String {
    let w = weyl.finite_element(fin).word;
    if w.is_empty() {
        "e".into()
    } else {
        w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("")
    }
}

/// Both sequences `𝓜_e ↪ 𝓑_s ↠ 𝓜_s` and `𝓜_s ↪ 𝓑_s ↠ 𝓜_e` at the context's level.
pub fn exactness_check<F: Field>(ctx: &MultContext<F>, i: usize) -> Result<Vec<CheckRecord>> {
    let f = ctx.field();
    let alg = &ctx.torus.alg;
    let s_fin = ctx.weyl.finite_index_of_matrix(ctx.weyl.weight_matrix(simple_reflection_fin(&ctx.weyl, i)));
    let s = s_fin.ok_or_else(|| Error::Computation("simple reflection missing".into()))?;
    let b = ctx.b_module(i)?;
    let me = ctx.m_module(0);
    let ms = ctx.m_module(s);
    let d = ctx.torus.dim();
    let omega = fundamental_weights(&ctx.weyl)?[i].clone();
    let x = ctx.torus.from_laurent(&alg.mono(&omega));
    let sx = ctx.torus.from_laurent(&alg.mono(&ctx.weyl.act_weight(s, &omega)));
    let tag = format!("level={} s={}", ctx.torus.level, i + 1);
    let mut out = Vec::new();
    for (first, (sub, quot, g0, qx)) in [(&me, &ms, &sx, &sx), (&ms, &me, &x, &x)].into_iter().enumerate() {
        // ι(c) = (c·g0, −c); π(c, d) = c + d·qx.
        let g0m = ctx.torus.mult_matrix(g0);
        let qxm = ctx.torus.mult_matrix(qx);
        let mut iota = vec![vec![f.zero(); d]; 2 * d];
        let mut pi = vec![vec![f.zero(); 2 * d]; d];
        for r in 0..d {
            for c in 0..d {
                iota[r][c] = g0m[r][c].clone();
                pi[r][d + c] = qxm[r][c].clone();
            }
            iota[d + r][r] = f.from_i64(-1);
            pi[r][r] = f.one();
        }
        let is_map = |a: &Mat<F::Elem>, src: &TruncModule<F>, tgt: &TruncModule<F>| {
            src.left
                .iter()
                .zip(&tgt.left)
                .chain(src.right.iter().zip(&tgt.right))
                .all(|(x, y)| linalg::mat_mul(f, a, x) == linalg::mat_mul(f, y, a))
        };
        let seq = if first == 0 { "Me->Bs->Ms" } else { "Ms->Bs->Me" };
        let comp = linalg::mat_mul(f, &pi, &iota);
        let rank_iota = linalg::rank(f, &iota, d);
        let rank_pi = linalg::rank(f, &pi, 2 * d);
        let kernel_pi = linalg::nullspace(f, &pi, 2 * d).len();
        out.push(CheckRecord::new(
            "exact-dims",
            format!("{tag} {seq}"),
            format!("{} {} {}", d, 2 * d, d),
            format!("{} {} {}", sub.dim, b.dim, quot.dim),
        ));
        out.push(CheckRecord::flag("exact-maps-equivariant", format!("{tag} {seq}"), is_map(&iota, sub, &b) && is_map(&pi, &b, quot)));
        out.push(CheckRecord::flag(
            "exact-composite-zero",
            format!("{tag} {seq}"),
            comp.iter().all(|r| r.iter().all(|x| f.is_zero(x))),
        ));
        out.push(CheckRecord::new("exact-injective", format!("{tag} {seq}"), d, rank_iota));
        out.push(CheckRecord::new("exact-surjective", format!("{tag} {seq}"), d, rank_pi));
        out.push(CheckRecord::new("exact-middle", format!("{tag} {seq}"), rank_iota, kernel_pi));
    }
    Ok(out)
}

fn simple_reflection_fin(weyl: &AffineWeyl, i: usize) -> usize {
    weyl.finite_image(weyl.generator(i + 1))
}

/// Truncation dimensions: `dim 𝒪(T)/𝓙^m𝒪(T) = #W_f · dim 𝒪(T/W_f)/𝓙^m` and
/// the fixed-point dimension.
pub fn completion_check<F: Field>(weyl: &AffineWeyl, field: &F, level: usize) -> Result<Vec<CheckRecord>> {
    let t = LocalTorus::new(weyl, field, level)?;
    let r = weyl.rank();
    let inv_dim = crate::poly::binomial(level - 1 + r, r);
    let tag = format!("{} level={}", weyl.datum.cartan_label, level);
    Ok(vec![
        CheckRecord::new("completion-dim", tag.clone(), weyl.finite_order() * inv_dim, t.dim()),
        CheckRecord::new("completion-invariants", tag, inv_dim, t.invariant_dim(weyl)),
    ])
}

/// Additive analogue: `dim R/(R^W_+)^m R = #W_f · dim R^W/(R^W_+)^m` for the
/// realization's polynomial ring; needs `char k ∤ #W_f`.
pub fn additive_completion_check<F: Field>(
    real: &crate::poly::Realization<F>,
    level: usize,
) -> Result<Vec<CheckRecord>> {
    let weyl = &real.weyl;
    let f = real.field();
    let order = weyl.finite_order() as u64;
    let p = f.characteristic();
    if p != 0 && order % p == 0 {
        return Err(Error::Usage("characteristic divides the Weyl group order".into()));
    }
    let ring = &real.ring;
    const TOP: u32 = 40;
    let to_vec = |q: &Poly<F>, monos: &[Mono]| -> Vec<F::Elem> {
        monos
            .iter()
            .map(|m| q.coeff(*m).cloned().unwrap_or_else(|| f.zero()))
            .collect()
    };
    let from_vec = |v: &[F::Elem], monos: &[Mono]| Poly {
        terms: monos
            .iter()
            .zip(v)
            .filter(|(_, c)| !f.is_zero(c))
            .map(|(m, c)| (*m, c.clone()))
            .collect(),
    };
    let basis_of = |ps: &[Poly<F>], monos: &[Mono]| -> Vec<Poly<F>> {
        let mut ech = Echelon::new(f, monos.len());
        for q in ps {
            ech.insert(to_vec(q, monos));
        }
        ech.rows().iter().map(|v| from_vec(v, monos)).collect()
    };
    // invariants[e]: basis of R^W in degree e; powers[k][e]: basis of (A_+^k)_e.
    let mut invariants: Vec<Vec<Poly<F>>> = vec![vec![ring.one()]];
    let mut powers: Vec<Vec<Vec<Poly<F>>>> = vec![vec![vec![ring.one()]]; level + 1];
    for k in 1..=level {
        powers[k] = vec![Vec::new()];
    }
    let mut quotient = 0usize;
    let mut inv_quotient = 0usize;
    let mut zeros = 0;
    for e in 1..=TOP {
        let monos = ring.mono_basis(e);
        let mut eqs = Vec::new();
        for fin in 0..weyl.finite_order() {
            let imgs: Vec<Vec<F::Elem>> = monos
                .iter()
                .map(|m| to_vec(&real.act_fin(fin, &ring.monomial(*m, f.one())), &monos))
                .collect();
            for r in 0..monos.len() {
                let mut row: Vec<F::Elem> = imgs.iter().map(|img| img[r].clone()).collect();
                row[r] = f.sub(&row[r], &f.one());
                eqs.push(row);
            }
        }
        invariants.push(
            linalg::nullspace(f, &eqs, monos.len())
                .iter()
                .map(|v| from_vec(v, &monos))
                .collect(),
        );
        for k in 1..=level {
            let mut prods = Vec::new();
            for d in 1..=e as usize {
                for a in &invariants[d] {
                    for b in powers[k - 1].get(e as usize - d).into_iter().flatten() {
                        prods.push(ring.mul(a, b));
                    }
                }
            }
            let b = basis_of(&prods, &monos);
            powers[k].push(b);
        }
        let mut ideal = Vec::new();
        for d in 0..=e as usize {
            for q in &powers[level][d] {
                for m in ring.mono_basis(e - d as u32) {
                    ideal.push(ring.mul_mono(q, m));
                }
            }
        }
        let q = monos.len() - basis_of(&ideal, &monos).len();
        quotient += q;
        inv_quotient += invariants[e as usize].len() - powers[level][e as usize].len();
        zeros = if q == 0 { zeros + 1 } else { 0 };
        if zeros >= 3 {
            break;
        }
    }
    // Degree zero contributes 1 to both quotients.
    quotient += 1;
    inv_quotient += 1;
    let tag = format!("{} level={} additive", weyl.datum.cartan_label, level);
    Ok(vec![
        CheckRecord::flag("additive-window", tag.clone(), zeros >= 3),
        CheckRecord::new(
            "additive-completion-dim",
            tag,
            weyl.finite_order() * inv_quotient,
            quotient,
        ),
    ])
}

/// χ ∘ Σ = id on the companion-matrix section, regularity, and determinant 1.
pub fn steinberg_section_check(n: usize) -> Result<Vec<CheckRecord>> {
    if !(2..=3).contains(&n) {
        return Err(Error::Usage("Steinberg section check supports SL2 and SL3".into()));
    }
    let q = crate::field::Rationals;
    let ring = PolyRing::new(q.clone(), n - 1);
    let mut out = Vec::new();
    for sign in [1i64, -1] {
        // Companion matrix of t^n − c_1 t^{n−1} + … + (−1)^{n−1} c_{n−1} t + (−1)^n,
        // with the lift sign applied to the subdiagonal and the corner.
        let mut sig: Vec<Vec<Poly<crate::field::Rationals>>> = vec![vec![Poly::zero(); n]; n];
        for i in 1..n {
            sig[i][i - 1] = ring.constant(q.from_i64(sign));
        }
        // Last column: coefficients so that charpoly is as above.
        let mut lastcol: Vec<Poly<crate::field::Rationals>> = Vec::new();
        for i in 0..n {
            // Entry i of the last column is (−1)^{n−1−i}·(coefficient) · sign^{…}.
            let k = n - i; // uses c_{k} with c_n := 1, c_0 unused
            let base = if k == n { ring.one() } else { ring.var(k - 1) };
            let sgn = if (n - 1 - i) % 2 == 0 { 1 } else { -1 };
            let s_pow = if sign == 1 || i == n - 1 { 1 } else { [1, -1][(n - 1 - i) % 2] };
            lastcol.push(ring.scale(&base, &q.from_i64(sgn * s_pow)));
        }
        for i in 0..n {
            sig[i][n - 1] = ring.add(&sig[i][n - 1], &lastcol[i]);
        }
        // Fix the last column with c_n = 1, c_i = variables, reading the charpoly back.
        let cp = char_poly(&ring, &sig);
        // cp[k] = coefficient of t^k; want t^n − c_1 t^{n−1} + c_2 t^{n−2} − … .
        let mut chi_ok = true;
        for k in 1..n {
            let expect = ring.scale(&ring.var(k - 1), &q.from_i64(if k % 2 == 0 { 1 } else { -1 }));
            chi_ok &= cp[n - k] == expect;
        }
        let det_expect = ring.constant(q.from_i64(if n % 2 == 0 { 1 } else { -1 }));
        let det_ok = cp[0] == det_expect;
        let regular = regular_companion(&ring, &sig);
        let tag = format!("SL{n} lift={sign:+}");
        out.push(CheckRecord::flag("sigma-characters", tag.clone(), chi_ok));
        out.push(CheckRecord::flag("sigma-det-one", tag.clone(), det_ok));
        out.push(CheckRecord::flag("sigma-regular", tag, regular));
    }
    Ok(out)
}

/// Coefficients of `det(t·I − M)`, low degree first.
fn char_poly<F: Field>(ring: &PolyRing<F>, m: &[Vec<Poly<F>>]) -> Vec<Poly<F>> {
    // Faddeev–LeVerrier needs division by k; use cofactor expansion over R[t]
    // with t tracked as a list of coefficients.
    let n = m.len();
    type TPoly<F> = Vec<Poly<F>>;
    let tmul = |a: &TPoly<F>, b: &TPoly<F>| -> TPoly<F> {
        let mut out = vec![Poly::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = ring.add(&out[i + j], &ring.mul(x, y));
            }
        }
        out
    };
    let tadd = |a: &TPoly<F>, b: &TPoly<F>| -> TPoly<F> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(Poly::zero);
                let y = b.get(i).cloned().unwrap_or_else(Poly::zero);
                ring.add(&x, &y)
            })
            .collect()
    };
    let entry = |i: usize, j: usize| -> TPoly<F> {
        let c = ring.neg(&m[i][j]);
        if i == j {
            vec![c, ring.one()]
        } else {
            vec![c]
        }
    };
    fn det<F: Field>(
        rows: &[usize],
        cols: &[usize],
        entry: &dyn Fn(usize, usize) -> Vec<Poly<F>>,
        tmul: &dyn Fn(&Vec<Poly<F>>, &Vec<Poly<F>>) -> Vec<Poly<F>>,
        tadd: &dyn Fn(&Vec<Poly<F>>, &Vec<Poly<F>>) -> Vec<Poly<F>>,
        ring: &PolyRing<F>,
    ) -> Vec<Poly<F>> {
        if rows.len() == 1 {
            return entry(rows[0], cols[0]);
        }
        let mut acc: Vec<Poly<F>> = vec![Poly::zero()];
        for (k, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = det(&rows[1..], &rest, entry, tmul, tadd, ring);
            let mut term = tmul(&entry(rows[0], c), &minor);
            if k % 2 == 1 {
                term = term.iter().map(|p| ring.neg(p)).collect();
            }
            acc = tadd(&acc, &term);
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    let mut cp = det(&idx, &idx, &entry, &tmul, &tadd, ring);
    cp.resize(n + 1, Poly::zero());
    cp
}

/// `I, Σ, …, Σ^{n−1}` are independent: some `n × n` minor of their flattened
/// entries is a nonzero constant.
fn regular_companion<F: Field>(ring: &PolyRing<F>, m: &[Vec<Poly<F>>]) -> bool {
    let n = m.len();
    let f = &ring.field;
    let mut pows = vec![(0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { Poly::zero() }).collect::<Vec<_>>())
        .collect::<Vec<_>>()];
    for _ in 1..n {
        let last = pows.last().expect("nonempty");
        let next: Vec<Vec<Poly<F>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(Poly::zero(), |acc, k| ring.add(&acc, &ring.mul(&last[i][k], &m[k][j]))))
                    .collect()
            })
            .collect();
        pows.push(next);
    }
    // First columns of the powers: e_1, Σe_1, … are a basis for a companion matrix.
    let rows: Vec<Vec<F::Elem>> = pows
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| {
                    let e = &p[i][0];
                    if e.terms.iter().all(|(mm, _)| *mm == Mono::ONE) {
                        e.coeff(Mono::ONE).cloned().unwrap_or_else(|| f.zero())
                    } else {
                        f.zero()
                    }
                })
                .collect()
        })
        .collect();
    linalg::rank(f, &rows, n) == n
}

/// `𝒪(𝕁_Σ) = k[c][a,b]/(a² + abc + b² − 1)` and the fiberwise Jacobian criterion.
pub fn jsigma_rank1<F: Field>(field: &F) -> Vec<CheckRecord> {
    let ring = PolyRing::new(field.clone(), 3);
    let (c, a, b) = (ring.var(0), ring.var(1), ring.var(2));
    // det(aI + bΣ) for Σ = [[0, −1], [1, c]].
    let m00 = a.clone();
    let m01 = ring.neg(&b);
    let m10 = b.clone();
    let m11 = ring.add(&a, &ring.mul(&b, &c));
    let det = ring.sub(&ring.mul(&m00, &m11), &ring.mul(&m01, &m10));
    let fpoly = ring.sub(&det, &ring.one());
    let expect = ring.sub(
        &ring.add(&ring.add(&ring.mul(&a, &a), &ring.mul(&ring.mul(&a, &b), &c)), &ring.mul(&b, &b)),
        &ring.one(),
    );
    let fa = ring.add(&ring.scale(&a, &field.from_i64(2)), &ring.mul(&b, &c));
    let fb = ring.add(&ring.scale(&b, &field.from_i64(2)), &ring.mul(&a, &c));
    let p = field.characteristic();
    let tag = format!("char={p}");
    let mut out = vec![CheckRecord::flag("jsigma-presentation", tag.clone(), fpoly == expect)];
    if p == 2 {
        // Fiber over c = 0: f = (a + b + 1)², both partials vanish identically.
        let at0 = |q: &Poly<F>| ring.substitute(q, &[Poly::zero(), a.clone(), b.clone()]);
        let lin = ring.add(&ring.add(&a, &b), &ring.one());
        let square = at0(&fpoly) == ring.mul(&lin, &lin);
        let singular = at0(&fa).is_zero() && at0(&fb).is_zero();
        out.push(CheckRecord::flag("jsigma-char2-square-fiber", tag.clone(), square));
        out.push(CheckRecord::flag("jsigma-char2-singular", tag, singular));
    } else {
        // a·f_a + b·f_b − 2f = 2, so (f, f_a, f_b) is the unit ideal when 2 is invertible.
        let comb = ring.sub(
            &ring.add(&ring.mul(&a, &fa), &ring.mul(&b, &fb)),
            &ring.scale(&fpoly, &field.from_i64(2)),
        );
        let unit = comb == ring.constant(field.from_i64(2)) && !field.is_zero(&field.from_i64(2));
        out.push(CheckRecord::flag("jsigma-smooth-certificate", tag, unit));
    }
    out
}

/// Presentation of `𝓜_w` inside `𝒪(D)`: relations `e^{ε_i} ⊗ 1 − 1 ⊗ e^{w⁻¹ε_i}`.
pub fn m_relations(weyl: &AffineWeyl, w: usize) -> Vec<(Vec<i64>, Vec<i64>, i64)> {
    let n = weyl.lattice_rank();
    let wi = weyl.finite_inverse(w);
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        out.push((e.clone(), vec![0; n], 1));
        out.push((vec![0; n], weyl.act_weight(wi, &e), -1));
    }
    out
}

/// Human-readable relation `x_i − y^{…}` with negative powers cleared.
pub fn render_relations(weyl: &AffineWeyl, w: usize) -> Vec<String> {
    let n = weyl.lattice_rank();
    let wi = weyl.finite_inverse(w);
    let xs = ["x", "y"];
    let ys = ["y", "z"];
    let names: (&[&str], &[&str]) = if n == 1 { (&xs[..1], &ys[..1]) } else { (&["x1", "x2"], &["y1", "y2"]) };
    (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            let img = weyl.act_weight(wi, &e);
            // x_i · y^{neg} − y^{pos}
            let mono = |v: &[i64], vars: &[&str]| -> String {
                let s: Vec<String> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k != 0)
                    .map(|(j, &k)| if k == 1 { vars[j].to_string() } else { format!("{}^{}", vars[j], k) })
                    .collect();
                if s.is_empty() {
                    "1".into()
                } else {
                    s.join("")
                }
            };
            let neg: Vec<i64> = img.iter().map(|&k| (-k).max(0)).collect();
            let pos: Vec<i64> = img.iter().map(|&k| k.max(0)).collect();
            let lhs = format!("{}{}", names.0[i], if neg.iter().all(|&k| k == 0) { String::new() } else { mono(&neg, names.1) });
            format!("{} - {}", lhs, mono(&pos, names.1))
        })
        .collect()
}

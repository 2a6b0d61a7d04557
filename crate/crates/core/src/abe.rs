//! Objects of the graded Abe category with Δ-flags, stored through their
//! localization.
//!
//! An object is a free graded left R-module `L` inside `⊕_x M_Q^x`. We keep a
//! basis `f_j` of `⊕_x M_Q^x` adapted to the stalks: `f_j` lies in the
//! component of the element `lines[j].elem`, and the image of `L` in each
//! component `x` is exactly `⊕_{j at x} R f_j`. Lattice basis vectors are the
//! rows of `d`: `row_i = Σ_j d[i][j] f_j`, all entries polynomial. The right
//! action is `f_j · r = x_j(r) f_j`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::hecke::{Hecke, HeckeElement, LaurentPoly};
use crate::linalg::Echelon;
use crate::poly::{Mono, Poly, Realization, RootFraction};
use crate::weyl::AffineWeylElement;

/// A line of the Δ-flag: the character contribution `v^shift H_element`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlagLine {
    pub element: AffineWeylElement,
    pub shift: i32,
}

/// Stalk basis vector: component and degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub elem: AffineWeylElement,
    pub deg: i32,
}

/// Coordinates of the homogeneous degree-`e` part of `⊕_j R f_j`.
#[derive(Clone, Debug)]
pub struct Ambient {
    pub offsets: Vec<usize>,
    pub monos: Vec<Vec<Mono>>,
    pub dim: usize,
}

impl Ambient {
    pub fn index(&self, j: usize, m: Mono) -> Option<usize> {
        self.monos[j]
            .binary_search(&m)
            .ok()
            .map(|i| self.offsets[j] + i)
    }
}

/// Degree-`e` slice of a lattice: its span and the residual map modulo it.
#[derive(Debug)]
pub struct DegreeData<F: Field> {
    pub ambient: Ambient,
    pub echelon: Echelon<F>,
    pub nonpivots: Vec<usize>,
    /// For each ambient coordinate, its residual in the nonpivot coordinates.
    pub residual: Vec<Vec<(usize, F::Elem)>>,
}

pub struct FlaggedObject<F: Field> {
    pub real: Arc<Realization<F>>,
    pub lines: Vec<Line>,
    pub row_degs: Vec<i32>,
    pub d: Vec<Vec<Poly<F>>>,
    pub flag: Vec<FlagLine>,
    /// Whether `ch` of this object multiplies with `ch` of its tensor partners
    /// (true for the Bott–Samelson generators, F_ω and their summands).
    pub multiplicative: bool,
    cache: Mutex<HashMap<i32, Arc<DegreeData<F>>>>,
}

impl<F: Field> Clone for FlaggedObject<F> {
    fn clone(&self) -> Self {
        FlaggedObject {
            real: self.real.clone(),
            lines: self.lines.clone(),
            row_degs: self.row_degs.clone(),
            d: self.d.clone(),
            flag: self.flag.clone(),
            multiplicative: self.multiplicative,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<F: Field> std::fmt::Debug for FlaggedObject<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlaggedObject")
            .field("lines", &self.lines)
            .field("row_degs", &self.row_degs)
            .field("flag", &self.flag)
            .finish()
    }
}

/// Degree-`d` morphism: `φ(f_j) = Σ_k a[j][k] g_k`, nonzero only between
/// lines of the same element.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism<F: Field> {
    pub degree: i32,
    pub a: Vec<Vec<Poly<F>>>,
}

#[derive(Clone, Debug)]
pub struct GradedHomSpace<F: Field> {
    pub degree: i32,
    pub basis: Vec<Morphism<F>>,
}

impl<F: Field> GradedHomSpace<F> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn parity_div(x: i32) -> Option<u32> {
    if x >= 0 && x % 2 == 0 {
        Some((x / 2) as u32)
    } else {
        None
    }
}

impl<F: Field> FlaggedObject<F> {
    pub fn new_raw(
        real: Arc<Realization<F>>,
        lines: Vec<Line>,
        row_degs: Vec<i32>,
        d: Vec<Vec<Poly<F>>>,
        flag: Vec<FlagLine>,
        multiplicative: bool,
    ) -> Self {
        FlaggedObject {
            real,
            lines,
            row_degs,
            d,
            flag,
            multiplicative,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn rank(&self) -> usize {
        self.row_degs.len()
    }

    pub fn field(&self) -> &F {
        self.real.field()
    }

    pub fn min_deg(&self) -> i32 {
        self.row_degs.iter().copied().min().unwrap_or(0)
    }

    pub fn max_deg(&self) -> i32 {
        self.row_degs.iter().copied().max().unwrap_or(0)
    }

    /// Character `Σ v^shift H_x` read off the flag.
    pub fn character(&self) -> HeckeElement {
        let mut h = HeckeElement::zero();
        for l in &self.flag {
            h.add_term(&l.element, &LaurentPoly::monomial(l.shift, 1));
        }
        h
    }

    /// Distinct flag elements in order of first appearance.
    pub fn support(&self) -> Vec<AffineWeylElement> {
        let mut out: Vec<AffineWeylElement> = Vec::new();
        for l in &self.lines {
            if !out.contains(&l.elem) {
                out.push(l.elem.clone());
            }
        }
        out
    }

    pub fn lines_at(&self, x: &AffineWeylElement) -> Vec<usize> {
        (0..self.lines.len()).filter(|&j| &self.lines[j].elem == x).collect()
    }

    pub fn ambient(&self, e: i32) -> Ambient {
        let ring = &self.real.ring;
        let mut offsets = Vec::with_capacity(self.lines.len());
        let mut monos = Vec::with_capacity(self.lines.len());
        let mut dim = 0;
        for l in &self.lines {
            offsets.push(dim);
            let m = match parity_div(e - l.deg) {
                Some(k) => ring.mono_basis(k),
                None => Vec::new(),
            };
            dim += m.len();
            monos.push(m);
        }
        Ambient { offsets, monos, dim }
    }

    /// Dense coordinates of a homogeneous degree-`e` vector of polynomials.
    pub fn to_coords(&self, amb: &Ambient, v: &[Poly<F>]) -> Vec<F::Elem> {
        let f = self.field();
        let mut out = vec![f.zero(); amb.dim];
        for (j, p) in v.iter().enumerate() {
            for (m, c) in &p.terms {
                let i = amb.index(j, *m).expect("homogeneous vector of the right degree");
                out[i] = c.clone();
            }
        }
        out
    }

    pub fn from_coords(&self, amb: &Ambient, c: &[F::Elem]) -> Vec<Poly<F>> {
        let f = self.field();
        (0..self.lines.len())
            .map(|j| {
                let terms: Vec<(Mono, F::Elem)> = amb.monos[j]
                    .iter()
                    .enumerate()
                    .filter_map(|(i, m)| {
                        let x = &c[amb.offsets[j] + i];
                        (!f.is_zero(x)).then(|| (*m, x.clone()))
                    })
                    .collect();
                Poly { terms }
            })
            .collect()
    }

    /// Spanning (in fact basis) vectors `m · row_i` of the degree-`e` part.
    pub fn lattice_span(&self, e: i32, amb: &Ambient) -> Vec<(usize, Mono, Vec<F::Elem>)> {
        let ring = &self.real.ring;
        let f = self.field();
        let mut out = Vec::new();
        for (i, &li) in self.row_degs.iter().enumerate() {
            let Some(k) = parity_div(e - li) else { continue };
            for m in ring.mono_basis(k) {
                let mut v = vec![f.zero(); amb.dim];
                for (j, p) in self.d[i].iter().enumerate() {
                    for (pm, c) in &p.terms {
                        let idx = amb.index(j, pm.mul(m)).expect("degree bookkeeping");
                        v[idx] = c.clone();
                    }
                }
                out.push((i, m, v));
            }
        }
        out
    }

    pub fn degree_data(&self, e: i32) -> Arc<DegreeData<F>> {
        if let Some(dd) = self.cache.lock().expect("cache").get(&e) {
            return dd.clone();
        }
        let f = self.field();
        let amb = self.ambient(e);
        let mut ech = Echelon::new(f, amb.dim);
        for (_, _, v) in self.lattice_span(e, &amb) {
            ech.insert(v);
        }
        let rref = ech.rref();
        let mut is_pivot = vec![false; amb.dim];
        for (p, _) in &rref {
            is_pivot[*p] = true;
        }
        let nonpivots: Vec<usize> = (0..amb.dim).filter(|&c| !is_pivot[c]).collect();
        let mut np_index = vec![usize::MAX; amb.dim];
        for (k, &c) in nonpivots.iter().enumerate() {
            np_index[c] = k;
        }
        let mut residual: Vec<Vec<(usize, F::Elem)>> = vec![Vec::new(); amb.dim];
        for &c in &nonpivots {
            residual[c] = vec![(np_index[c], f.one())];
        }
        for (p, row) in &rref {
            residual[*p] = nonpivots
                .iter()
                .enumerate()
                .filter(|(_, &c)| !f.is_zero(&row[c]))
                .map(|(k, &c)| (k, f.neg(&row[c])))
                .collect();
        }
        let dd = Arc::new(DegreeData {
            ambient: amb,
            echelon: ech,
            nonpivots,
            residual,
        });
        self.cache.lock().expect("cache").insert(e, dd.clone());
        dd
    }

    /// Whether a homogeneous degree-`e` vector (flag coordinates) lies in the lattice.
    pub fn contains(&self, e: i32, v: &[Poly<F>]) -> bool {
        let dd = self.degree_data(e);
        let amb = &dd.ambient;
        for (j, p) in v.iter().enumerate() {
            for (m, _) in &p.terms {
                if amb.index(j, *m).is_none() {
                    return false;
                }
            }
        }
        dd.echelon.contains(&self.to_coords(amb, v))
    }

    /// Checks `row_i · x_v ∈ L` for every row and variable.
    pub fn check_right_polynomiality(&self) -> bool {
        let ring = &self.real.ring;
        for (i, &li) in self.row_degs.iter().enumerate() {
            for v in 0..ring.nvars {
                let xv = ring.var(v);
                let w: Vec<Poly<F>> = self.d[i]
                    .iter()
                    .zip(&self.lines)
                    .map(|(p, l)| ring.mul(p, &self.real.act(&l.elem, &xv)))
                    .collect();
                if !self.contains(li + 2, &w) {
                    return false;
                }
            }
        }
        true
    }

    /// The localization matrix as root fractions (rows: lattice basis,
    /// columns: stalk basis).
    pub fn loc_matrix(&self) -> Vec<Vec<RootFraction<F>>> {
        self.d
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| self.real.fraction(p.clone(), Vec::new()))
                    .collect()
            })
            .collect()
    }

    /// Graded dimension of the degree-`e` part.
    pub fn graded_dim(&self, e: i32) -> usize {
        let ring = &self.real.ring;
        self.row_degs
            .iter()
            .filter_map(|&l| parity_div(e - l))
            .map(|k| ring.dim_degree(k))
            .sum()
    }
}

/// `F_w` with lattice generator in degree `n`.
pub fn std_object<F: Field>(real: &Arc<Realization<F>>, w: &AffineWeylElement, n: i32) -> FlaggedObject<F> {
    let len = real.weyl.length(w) as i32;
    FlaggedObject::new_raw(
        real.clone(),
        vec![Line {
            elem: w.clone(),
            deg: n,
        }],
        vec![n],
        vec![vec![real.ring.one()]],
        vec![FlagLine {
            element: w.clone(),
            shift: len - n,
        }],
        len == 0,
    )
}

/// `B_s = R ⊗_{R^s} R (1)` for generator number `s`, built directly from `δ_s`.
pub fn bs_direct<F: Field>(real: &Arc<Realization<F>>, s: usize) -> FlaggedObject<F> {
    let weyl = &real.weyl;
    let e = weyl.identity();
    let sw = weyl.generator(s).clone();
    let ring = &real.ring;
    let delta = real.delta(s).clone();
    let sdelta = real.act(&sw, &delta);
    FlaggedObject::new_raw(
        real.clone(),
        vec![
            Line { elem: e.clone(), deg: -1 },
            Line { elem: sw.clone(), deg: -1 },
        ],
        vec![-1, 1],
        vec![vec![ring.one(), ring.one()], vec![delta, sdelta]],
        vec![
            FlagLine { element: e, shift: 1 },
            FlagLine { element: sw, shift: 0 },
        ],
        true,
    )
}

/// `B_s`; for the affine generator it is transported as `F_w ⋆ B_{s'} ⋆ F_{w⁻¹}`
/// from the conjugation datum when one exists.
pub fn bs_generator<F: Field>(real: &Arc<Realization<F>>, s: usize) -> Result<FlaggedObject<F>> {
    let weyl = &real.weyl;
    if weyl.is_finite_generator(s) {
        return Ok(bs_direct(real, s));
    }
    let sw = weyl.generator(s).clone();
    match weyl.conjugation_datum(&sw, 2 * weyl.finite_order() + 2) {
        Ok((w, sp)) => {
            let fw = std_object(real, &w, 0);
            let fwi = std_object(real, &weyl.inverse(&w), 0);
            let b = tensor(&tensor(&fw, &bs_direct(real, sp))?, &fwi)?;
            let mut b = b;
            b.flag = vec![
                FlagLine { element: weyl.identity(), shift: 1 },
                FlagLine { element: sw, shift: 0 },
            ];
            b.multiplicative = true;
            Ok(b)
        }
        Err(_) => Ok(bs_direct(real, s)),
    }
}

/// Builds an object from lattice generators given in coordinates of a
/// (not necessarily adapted) basis `cols`, re-adapting the stalk bases.
/// `expected[x]` is the rank of the localization at `x`.
pub fn from_generators<F: Field>(
    real: &Arc<Realization<F>>,
    cols: &[Line],
    gens: &[(i32, Vec<Poly<F>>)],
    expected: &HashMap<AffineWeylElement, usize>,
) -> Result<FlaggedObject<F>> {
    from_generators_with_basis(real, cols, gens, expected).map(|(o, _)| o)
}

/// As `from_generators`, also returning the new stalk basis in old
/// coordinates (row `t`: `f'_t = Σ_c b[t][c] f_c`).
pub fn from_generators_with_basis<F: Field>(
    real: &Arc<Realization<F>>,
    cols: &[Line],
    gens: &[(i32, Vec<Poly<F>>)],
    expected: &HashMap<AffineWeylElement, usize>,
) -> Result<(FlaggedObject<F>, Vec<Vec<Poly<F>>>)> {
    let ring = &real.ring;
    let f = real.field();
    let mut groups: Vec<(AffineWeylElement, Vec<usize>)> = Vec::new();
    for (c, l) in cols.iter().enumerate() {
        match groups.iter_mut().find(|(x, _)| *x == l.elem) {
            Some((_, v)) => v.push(c),
            None => groups.push((l.elem.clone(), vec![c])),
        }
    }
    let ngens = gens.len();
    let mut new_lines: Vec<Line> = Vec::new();
    let mut change: Vec<Vec<Poly<F>>> = Vec::new();
    let mut new_d: Vec<Vec<Poly<F>>> = vec![Vec::new(); ngens];
    for (x, cs) in &groups {
        let want = expected.get(x).copied().unwrap_or(0);
        if want == 0 {
            continue;
        }
        let sub_lines: Vec<Line> = cs.iter().map(|&c| cols[c].clone()).collect();
        let proj = |i: usize| -> Vec<Poly<F>> { cs.iter().map(|&c| gens[i].1[c].clone()).collect() };
        let tmp = FlaggedObject::new_raw(real.clone(), sub_lines, vec![], vec![], vec![], false);
        let mut order: Vec<usize> = (0..ngens)
            .filter(|&i| proj(i).iter().any(|p| !p.is_zero()))
            .collect();
        order.sort_by_key(|&i| gens[i].0);
        // Minimal generators of the projection module, degree by degree.
        let mut selected: Vec<usize> = Vec::new();
        let mut degrees: Vec<i32> = order.iter().map(|&i| gens[i].0).collect();
        degrees.dedup();
        for &e in &degrees {
            let amb = tmp.ambient(e);
            let mut ech = Echelon::new(f, amb.dim);
            for &i in &order {
                let li = gens[i].0;
                if li >= e {
                    continue;
                }
                let Some(k) = parity_div(e - li) else { continue };
                let p = proj(i);
                for m in ring.mono_basis(k) {
                    let v: Vec<Poly<F>> = p.iter().map(|q| ring.mul_mono(q, m)).collect();
                    ech.insert(tmp.to_coords(&amb, &v));
                }
            }
            for &i in order.iter().filter(|&&i| gens[i].0 == e) {
                if ech.insert(tmp.to_coords(&amb, &proj(i))) {
                    selected.push(i);
                }
            }
        }
        if selected.len() != want {
            return Err(Error::NotFree(format!(
                "{}: {} generators for rank {}",
                real.weyl.format(x),
                selected.len(),
                want
            )));
        }
        // Express every projection in the selected generators.
        let sel_lines: Vec<Line> = selected
            .iter()
            .map(|&t| Line {
                elem: x.clone(),
                deg: gens[t].0,
            })
            .collect();
        let mut coeffs: Vec<Vec<Poly<F>>> = vec![vec![Poly::zero(); selected.len()]; ngens];
        let mut by_deg: HashMap<i32, Vec<usize>> = HashMap::new();
        for i in 0..ngens {
            if proj(i).iter().any(|p| !p.is_zero()) {
                by_deg.entry(gens[i].0).or_default().push(i);
            }
        }
        let mut degs: Vec<i32> = by_deg.keys().copied().collect();
        degs.sort();
        for e in degs {
            let amb = tmp.ambient(e);
            let mut tags: Vec<(usize, Mono)> = Vec::new();
            let mut vecs = Vec::new();
            for (t, &g) in selected.iter().enumerate() {
                let Some(k) = parity_div(e - gens[g].0) else { continue };
                let p = proj(g);
                for m in ring.mono_basis(k) {
                    let v: Vec<Poly<F>> = p.iter().map(|q| ring.mul_mono(q, m)).collect();
                    vecs.push(tmp.to_coords(&amb, &v));
                    tags.push((t, m));
                }
            }
            let mut ech = Echelon::with_tags(f, amb.dim, tags.len());
            for (n, v) in vecs.into_iter().enumerate() {
                if !ech.insert_tagged(v, n) {
                    return Err(Error::NotFree(format!(
                        "{}: selected generators are dependent",
                        real.weyl.format(x)
                    )));
                }
            }
            for &i in &by_deg[&e] {
                let c = ech
                    .express(&tmp.to_coords(&amb, &proj(i)))
                    .ok_or_else(|| Error::Computation("projection outside its span".into()))?;
                for (n, (t, m)) in tags.iter().enumerate() {
                    if !f.is_zero(&c[n]) {
                        coeffs[i][*t] = ring.add(&coeffs[i][*t], &ring.monomial(*m, c[n].clone()));
                    }
                }
            }
        }
        for i in 0..ngens {
            new_d[i].extend(coeffs[i].drain(..));
        }
        for &t in &selected {
            let mut row = vec![Poly::zero(); cols.len()];
            for &c in cs {
                row[c] = gens[t].1[c].clone();
            }
            change.push(row);
        }
        new_lines.extend(sel_lines);
    }
    let obj = FlaggedObject::new_raw(
        real.clone(),
        new_lines,
        gens.iter().map(|g| g.0).collect(),
        new_d,
        Vec::new(),
        false,
    );
    Ok((obj, change))
}

/// `M ⋆ N = M ⊗_R N`.
pub fn tensor<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>) -> Result<FlaggedObject<F>> {
    let real = &m.real;
    let ring = &real.ring;
    let weyl = &real.weyl;
    let mut cols = Vec::new();
    for lm in &m.lines {
        for ln in &n.lines {
            cols.push(Line {
                elem: weyl.multiply(&lm.elem, &ln.elem),
                deg: lm.deg + ln.deg,
            });
        }
    }
    let mut expected: HashMap<AffineWeylElement, usize> = HashMap::new();
    for c in &cols {
        *expected.entry(c.elem.clone()).or_insert(0) += 1;
    }
    // Twisted copies x_j(D_N) for each element occurring in M.
    let mut twisted: HashMap<usize, Vec<Vec<Poly<F>>>> = HashMap::new();
    for lm in &m.lines {
        let fin = weyl.finite_image(&lm.elem);
        twisted.entry(fin).or_insert_with(|| {
            n.d.iter()
                .map(|row| row.iter().map(|p| real.act_fin(fin, p)).collect())
                .collect()
        });
    }
    let mut gens = Vec::with_capacity(m.rank() * n.rank());
    for (i, &li) in m.row_degs.iter().enumerate() {
        for (l, &ll) in n.row_degs.iter().enumerate() {
            let mut v = Vec::with_capacity(cols.len());
            for (j, lm) in m.lines.iter().enumerate() {
                let tw = &twisted[&weyl.finite_image(&lm.elem)];
                for k in 0..n.lines.len() {
                    v.push(ring.mul(&m.d[i][j], &tw[l][k]));
                }
            }
            gens.push((li + ll, v));
        }
    }
    let mut out = from_generators(real, &cols, &gens, &expected)?;
    if m.multiplicative && n.multiplicative {
        let h = Hecke::new(weyl);
        out.flag = flag_from_character(&h.multiply(&m.character(), &n.character()))?;
        out.multiplicative = true;
    } else {
        out.flag = flag_from_character(&gamma_character(&out)?)?;
        out.multiplicative = false;
    }
    Ok(out)
}

/// Flag lines with multiplicity from a character with nonnegative coefficients.
pub fn flag_from_character(h: &HeckeElement) -> Result<Vec<FlagLine>> {
    let mut out = Vec::new();
    for (x, p) in &h.terms {
        for (e, c) in p.terms() {
            if c < 0 {
                return Err(Error::Computation("character with negative coefficient".into()));
            }
            for _ in 0..c {
                out.push(FlagLine {
                    element: x.clone(),
                    shift: e,
                });
            }
        }
    }
    Ok(out)
}

/// Bott–Samelson object `F_ω ⋆ B_{s₁} ⋆ ⋯ ⋆ B_{sₙ}`.
pub fn bott_samelson<F: Field>(
    real: &Arc<Realization<F>>,
    omega: &AffineWeylElement,
    word: &[usize],
) -> Result<FlaggedObject<F>> {
    let mut acc = std_object(real, omega, 0);
    for &s in word {
        acc = tensor(&acc, &bs_generator(real, s)?)?;
    }
    Ok(acc)
}

/// Rank of the projection of the degree-`e` lattice part onto the given lines.
fn projected_rank<F: Field>(m: &FlaggedObject<F>, e: i32, keep: &[bool]) -> usize {
    let amb = m.ambient(e);
    let coords: Vec<usize> = (0..m.lines.len())
        .filter(|&j| keep[j])
        .flat_map(|j| amb.offsets[j]..amb.offsets[j] + amb.monos[j].len())
        .collect();
    let f = m.field();
    let mut ech = Echelon::new(f, coords.len());
    for (_, _, v) in m.lattice_span(e, &amb) {
        ech.insert(coords.iter().map(|&c| v[c].clone()).collect());
    }
    ech.rank()
}

/// Character computed from the support filtration: for each flag element
/// `x`, the generators of `Γ_{≥x}/Γ_{>x}` in degree `k` contribute
/// `v^{ℓ(x)−k} H_x`.
pub fn gamma_character<F: Field>(m: &FlaggedObject<F>) -> Result<HeckeElement> {
    let weyl = &m.real.weyl;
    let supp = m.support();
    let n = m.real.nvars() as i32;
    let leq = |a: &AffineWeylElement, b: &AffineWeylElement| weyl.bruhat_leq(a, b).unwrap_or(false);
    let maxlen = supp.iter().map(|x| weyl.length(x) as i32).max().unwrap_or(0);
    let lo = m.min_deg();
    let hi = m.max_deg() + 2 * maxlen + 2 * n + 4;
    let mut out = HeckeElement::zero();
    for x in &supp {
        // Γ_{≥x}: vanish on z with z ≱ x. Γ_{>x}: additionally vanish at x.
        let not_geq: Vec<bool> = m.lines.iter().map(|l| !leq(x, &l.elem)).collect();
        let not_gt: Vec<bool> = m
            .lines
            .iter()
            .map(|l| !leq(x, &l.elem) || &l.elem == x)
            .collect();
        let mut series: Vec<i64> = Vec::new();
        for e in lo..=hi {
            let total = m.graded_dim(e) as i64;
            let a = total - projected_rank(m, e, &not_geq) as i64;
            let b = total - projected_rank(m, e, &not_gt) as i64;
            series.push(a - b);
        }
        // Multiply by (1 − t²)^n to get generator counts.
        let mut gens = series.clone();
        for _ in 0..n {
            let mut next = gens.clone();
            for i in 2..gens.len() {
                next[i] -= gens[i - 2];
            }
            gens = next;
        }
        let cut = (hi - lo + 1) as usize - (2 * n as usize + 2);
        if gens[cut..].iter().any(|&c| c != 0) {
            return Err(Error::Computation("support filtration exceeds window".into()));
        }
        let len = weyl.length(x) as i32;
        for (i, &c) in gens.iter().enumerate() {
            if c < 0 {
                return Err(Error::Computation("support subquotient is not free".into()));
            }
            if c > 0 {
                out.add_term(x, &LaurentPoly::monomial(len - (lo + i as i32), c));
            }
        }
    }
    Ok(out)
}

/// Morphism-degree window scanned by `hom_total`: generator degrees of
/// `Hom•(M, N)` lie in `[min λ_N − max λ_M, max λ_N − min λ_M]`.
pub fn hom_window<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>) -> (i32, i32) {
    (n.min_deg() - m.max_deg(), n.max_deg() - m.min_deg())
}

/// Basis of degree-`d` morphisms `M → N`.
pub fn hom_graded<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>, d: i32) -> Result<GradedHomSpace<F>> {
    let (lo, hi) = hom_window(m, n);
    let slack = 2 * m.real.nvars() as i32 + 4;
    if d < lo - slack || d > hi + slack {
        return Err(Error::WindowExceeded(d));
    }
    Ok(hom_graded_unchecked(m, n, d))
}

pub fn hom_graded_unchecked<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>, d: i32) -> GradedHomSpace<F> {
    let real = &m.real;
    let ring = &real.ring;
    let f = real.field();
    // Unknowns: coefficients of monomials in the block entries a[j][k].
    let mut unknowns: Vec<(usize, usize, Mono)> = Vec::new();
    for (j, lm) in m.lines.iter().enumerate() {
        for (k, ln) in n.lines.iter().enumerate() {
            if lm.elem != ln.elem {
                continue;
            }
            if let Some(t) = parity_div(lm.deg + d - ln.deg) {
                for mono in ring.mono_basis(t) {
                    unknowns.push((j, k, mono));
                }
            }
        }
    }
    let nu = unknowns.len();
    if nu == 0 {
        return GradedHomSpace { degree: d, basis: Vec::new() };
    }
    let mut by_line: Vec<Vec<usize>> = vec![Vec::new(); m.lines.len()];
    for (u, (j, _, _)) in unknowns.iter().enumerate() {
        by_line[*j].push(u);
    }
    let mut eqs = Echelon::new(f, nu);
    for (i, &li) in m.row_degs.iter().enumerate() {
        if eqs.rank() == nu {
            break;
        }
        let e = li + d;
        let dd = n.degree_data(e);
        let q = dd.nonpivots.len();
        if q == 0 {
            continue;
        }
        // Residual of each unknown's contribution, as columns.
        let mut cols: Vec<Vec<(usize, F::Elem)>> = vec![Vec::new(); nu];
        let mut any = false;
        for (j, p) in m.d[i].iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for &u in &by_line[j] {
                let (_, k, mono) = unknowns[u];
                let mut acc: HashMap<usize, F::Elem> = HashMap::new();
                for (pm, c) in &p.terms {
                    let idx = dd.ambient.index(k, pm.mul(mono)).expect("degree bookkeeping");
                    for (r, x) in &dd.residual[idx] {
                        let ent = acc.entry(*r).or_insert_with(|| f.zero());
                        f.mul_add_assign(ent, c, x);
                    }
                }
                let col: Vec<(usize, F::Elem)> = acc.into_iter().filter(|(_, x)| !f.is_zero(x)).collect();
                if !col.is_empty() {
                    any = true;
                }
                cols[u] = col;
            }
        }
        if !any {
            continue;
        }
        let mut rows: Vec<Vec<F::Elem>> = vec![vec![f.zero(); nu]; q];
        for (u, col) in cols.iter().enumerate() {
            for (r, x) in col {
                rows[*r][u] = x.clone();
            }
        }
        for row in rows {
            if row.iter().any(|x| !f.is_zero(x)) {
                eqs.insert(row);
            }
        }
    }
    let basis = eqs
        .nullspace()
        .into_iter()
        .map(|sol| {
            let mut a = vec![vec![Poly::zero(); n.lines.len()]; m.lines.len()];
            for (u, c) in sol.iter().enumerate() {
                if f.is_zero(c) {
                    continue;
                }
                let (j, k, mono) = unknowns[u];
                a[j][k] = ring.add(&a[j][k], &ring.monomial(mono, c.clone()));
            }
            Morphism { degree: d, a }
        })
        .collect();
    GradedHomSpace { degree: d, basis }
}

/// `ψ ∘ φ` (first `φ`, then `ψ`).
pub fn compose<F: Field>(real: &Realization<F>, phi: &Morphism<F>, psi: &Morphism<F>) -> Morphism<F> {
    let ring = &real.ring;
    let rows = phi.a.len();
    let mid = psi.a.len();
    let cols = psi.a.first().map_or(0, |r| r.len());
    let mut a = vec![vec![Poly::zero(); cols]; rows];
    for i in 0..rows {
        for k in 0..mid {
            let x = &phi.a[i][k];
            if x.is_zero() {
                continue;
            }
            for (j, y) in psi.a[k].iter().enumerate() {
                if !y.is_zero() {
                    a[i][j] = ring.add(&a[i][j], &ring.mul(x, y));
                }
            }
        }
    }
    Morphism {
        degree: phi.degree + psi.degree,
        a,
    }
}

pub fn identity_morphism<F: Field>(m: &FlaggedObject<F>) -> Morphism<F> {
    let ring = &m.real.ring;
    let k = m.lines.len();
    Morphism {
        degree: 0,
        a: (0..k)
            .map(|i| (0..k).map(|j| if i == j { ring.one() } else { Poly::zero() }).collect())
            .collect(),
    }
}

pub fn morphism_combination<F: Field>(
    real: &Realization<F>,
    basis: &[Morphism<F>],
    coeffs: &[F::Elem],
) -> Morphism<F> {
    let ring = &real.ring;
    let f = real.field();
    let rows = basis[0].a.len();
    let cols = basis[0].a.first().map_or(0, |r| r.len());
    let mut a = vec![vec![Poly::zero(); cols]; rows];
    for (b, c) in basis.iter().zip(coeffs) {
        if f.is_zero(c) {
            continue;
        }
        for i in 0..rows {
            for j in 0..cols {
                if !b.a[i][j].is_zero() {
                    a[i][j] = ring.add(&a[i][j], &ring.scale(&b.a[i][j], c));
                }
            }
        }
    }
    Morphism {
        degree: basis[0].degree,
        a,
    }
}

pub fn morphism_is_zero<F: Field>(phi: &Morphism<F>) -> bool {
    phi.a.iter().all(|r| r.iter().all(|p| p.is_zero()))
}

/// Image of lattice row `i` of `m` under `φ`, in the flag coordinates of the target.
pub fn apply_row<F: Field>(m: &FlaggedObject<F>, phi: &Morphism<F>, i: usize) -> Vec<Poly<F>> {
    let ring = &m.real.ring;
    let cols = phi.a.first().map_or(0, |r| r.len());
    let mut out = vec![Poly::zero(); cols];
    for (j, p) in m.d[i].iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        for (k, a) in phi.a[j].iter().enumerate() {
            if !a.is_zero() {
                out[k] = ring.add(&out[k], &ring.mul(p, a));
            }
        }
    }
    out
}

/// Matrix of `φ` on lattice bases: `φ(row_i) = Σ_l E[i][l] row'_l`.
pub fn lattice_matrix<F: Field>(
    m: &FlaggedObject<F>,
    n: &FlaggedObject<F>,
    phi: &Morphism<F>,
) -> Result<Vec<Vec<Poly<F>>>> {
    let ring = &m.real.ring;
    let f = m.field();
    let mut out = vec![vec![Poly::zero(); n.rank()]; m.rank()];
    let mut cache: HashMap<i32, (Ambient, Echelon<F>, Vec<(usize, Mono)>)> = HashMap::new();
    for i in 0..m.rank() {
        let e = m.row_degs[i] + phi.degree;
        let img = apply_row(m, phi, i);
        if img.iter().all(|p| p.is_zero()) {
            continue;
        }
        let (amb, ech, tags) = cache.entry(e).or_insert_with(|| {
            let amb = n.ambient(e);
            let span = n.lattice_span(e, &amb);
            let mut ech = Echelon::with_tags(f, amb.dim, span.len());
            let mut tags = Vec::new();
            for (t, (l, mono, v)) in span.into_iter().enumerate() {
                ech.insert_tagged(v, t);
                tags.push((l, mono));
            }
            (amb, ech, tags)
        });
        let c = ech
            .express(&n.to_coords(amb, &img))
            .ok_or_else(|| Error::Computation("morphism leaves the lattice".into()))?;
        for (t, (l, mono)) in tags.iter().enumerate() {
            if !f.is_zero(&c[t]) {
                out[i][*l] = ring.add(&out[i][*l], &ring.monomial(*mono, c[t].clone()));
            }
        }
    }
    Ok(out)
}

/// Whether a degree-0 morphism is invertible (its lattice matrix reduces to an
/// invertible matrix over the field).
pub fn is_isomorphism<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>, phi: &Morphism<F>) -> Result<bool> {
    if phi.degree != 0 || m.rank() != n.rank() {
        return Ok(false);
    }
    let e = lattice_matrix(m, n, phi)?;
    let f = m.field();
    let c: Vec<Vec<F::Elem>> = e
        .iter()
        .map(|r| {
            r.iter()
                .map(|p| p.coeff(Mono::ONE).cloned().unwrap_or_else(|| f.zero()))
                .collect()
        })
        .collect();
    Ok(crate::linalg::inverse(f, &c).is_some())
}

/// A pair of mutually inverse degree-0 morphisms, if `M ≅ N`.
pub fn find_isomorphism<F: Field>(
    m: &FlaggedObject<F>,
    n: &FlaggedObject<F>,
    seed: u64,
) -> Result<Option<(Morphism<F>, Morphism<F>)>> {
    use rand::SeedableRng;
    if m.rank() != n.rank() {
        return Ok(None);
    }
    let mut md = m.row_degs.clone();
    let mut nd = n.row_degs.clone();
    md.sort();
    nd.sort();
    if md != nd {
        return Ok(None);
    }
    let real = &m.real;
    let f = real.field();
    let fwd = hom_graded_unchecked(m, n, 0);
    let back = hom_graded_unchecked(n, m, 0);
    if fwd.basis.is_empty() || back.basis.is_empty() {
        return Ok(None);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..16 {
        let coeffs: Vec<F::Elem> = if attempt == 0 && fwd.basis.len() == 1 {
            vec![f.one()]
        } else {
            (0..fwd.basis.len()).map(|_| f.random(&mut rng)).collect()
        };
        let phi = morphism_combination(real, &fwd.basis, &coeffs);
        if !is_isomorphism(m, n, &phi)? {
            continue;
        }
        // Solve ψ ∘ φ = id over the basis of Hom⁰(N, M).
        let id = identity_morphism(m);
        let prods: Vec<Morphism<F>> = back.basis.iter().map(|b| compose(real, &phi, b)).collect();
        let psi = solve_combination(real, &prods, &id)
            .map(|c| morphism_combination(real, &back.basis, &c))
            .ok_or_else(|| Error::Computation("isomorphism without inverse".into()))?;
        return Ok(Some((phi, psi)));
    }
    Ok(None)
}

/// Coefficients `c` with `Σ c_b basis_b = target`, if any.
pub fn solve_combination<F: Field>(
    real: &Realization<F>,
    basis: &[Morphism<F>],
    target: &Morphism<F>,
) -> Option<Vec<F::Elem>> {
    let f = real.field();
    let all: Vec<&Morphism<F>> = basis.iter().chain(std::iter::once(target)).collect();
    let mut keys: HashMap<(usize, usize, Mono), usize> = HashMap::new();
    for m in &all {
        for (i, r) in m.a.iter().enumerate() {
            for (j, p) in r.iter().enumerate() {
                for (mono, _) in &p.terms {
                    let n = keys.len();
                    keys.entry((i, j, *mono)).or_insert(n);
                }
            }
        }
    }
    let dim = keys.len();
    let to_vec = |m: &Morphism<F>| {
        let mut v = vec![f.zero(); dim];
        for (i, r) in m.a.iter().enumerate() {
            for (j, p) in r.iter().enumerate() {
                for (mono, c) in &p.terms {
                    v[keys[&(i, j, *mono)]] = c.clone();
                }
            }
        }
        v
    };
    let mut ech = Echelon::with_tags(f, dim, basis.len());
    for (t, b) in basis.iter().enumerate() {
        ech.insert_tagged(to_vec(b), t);
    }
    ech.express(&to_vec(target))
}

/// `M⟨k⟩`: lattice degrees raised by `k`, character multiplied by `v^{-k}`.
pub fn shifted<F: Field>(m: &FlaggedObject<F>, k: i32) -> FlaggedObject<F> {
    FlaggedObject::new_raw(
        m.real.clone(),
        m.lines
            .iter()
            .map(|l| Line {
                elem: l.elem.clone(),
                deg: l.deg + k,
            })
            .collect(),
        m.row_degs.iter().map(|d| d + k).collect(),
        m.d.clone(),
        m.flag
            .iter()
            .map(|l| FlagLine {
                element: l.element.clone(),
                shift: l.shift - k,
            })
            .collect(),
        m.multiplicative,
    )
}

/// Per-element stalk ranks read off the flag.
pub fn flag_counts(flag: &[FlagLine]) -> HashMap<AffineWeylElement, usize> {
    let mut out = HashMap::new();
    for l in flag {
        *out.entry(l.element.clone()).or_insert(0) += 1;
    }
    out
}

/// Common kernel of morphisms out of `m`, as a flagged subobject together
/// with its inclusion. `expected` gives the stalk ranks of the kernel.
pub fn kernel_object<F: Field>(
    m: &FlaggedObject<F>,
    maps: &[(&FlaggedObject<F>, &Morphism<F>)],
    expected: &HashMap<AffineWeylElement, usize>,
) -> Result<(FlaggedObject<F>, Morphism<F>)> {
    let real = &m.real;
    let ring = &real.ring;
    let f = real.field();
    let images: Vec<Vec<Vec<Poly<F>>>> = maps
        .iter()
        .map(|(_, phi)| (0..m.rank()).map(|i| apply_row(m, phi, i)).collect())
        .collect();
    let mut gens: Vec<(i32, Vec<Poly<F>>)> = Vec::new();
    let mut found: HashMap<i32, Vec<Vec<Poly<F>>>> = HashMap::new();
    let want: usize = expected.values().sum();
    for e in m.min_deg()..=m.max_deg() {
        if gens.len() == want {
            break;
        }
        let amb = m.ambient(e);
        let span = m.lattice_span(e, &amb);
        if span.is_empty() {
            continue;
        }
        // Unknowns: coefficients of the basis vectors m·row_i of L_e.
        let nu = span.len();
        let mut eqs = Echelon::new(f, nu);
        for ((tgt, phi), img) in maps.iter().zip(&images) {
            let te = e + phi.degree;
            let tamb = tgt.ambient(te);
            let mut rows: Vec<Vec<F::Elem>> = vec![vec![f.zero(); nu]; tamb.dim];
            for (u, (i, mono, _)) in span.iter().enumerate() {
                for (k, p) in img[*i].iter().enumerate() {
                    for (pm, c) in &p.terms {
                        let idx = tamb.index(k, pm.mul(*mono)).expect("degree bookkeeping");
                        rows[idx][u] = c.clone();
                    }
                }
            }
            for r in rows {
                if r.iter().any(|x| !f.is_zero(x)) {
                    eqs.insert(r);
                }
            }
        }
        let kernel: Vec<Vec<F::Elem>> = eqs
            .nullspace()
            .into_iter()
            .map(|c| {
                let mut v = vec![f.zero(); amb.dim];
                for (u, (_, _, vec)) in span.iter().enumerate() {
                    if f.is_zero(&c[u]) {
                        continue;
                    }
                    for (x, y) in v.iter_mut().zip(vec) {
                        f.mul_add_assign(x, &c[u], y);
                    }
                }
                v
            })
            .collect();
        // Drop what lower generators already produce.
        let mut ech = Echelon::new(f, amb.dim);
        for (d, vs) in &found {
            let Some(k) = parity_div(e - d) else { continue };
            if k == 0 {
                continue;
            }
            for v in vs {
                for mono in ring.mono_basis(k) {
                    let w: Vec<Poly<F>> = v.iter().map(|p| ring.mul_mono(p, mono)).collect();
                    ech.insert(m.to_coords(&amb, &w));
                }
            }
        }
        for v in kernel {
            if ech.insert(v.clone()) {
                let pv = m.from_coords(&amb, &v);
                gens.push((e, pv.clone()));
                found.entry(e).or_default().push(pv);
            }
        }
    }
    let (k, change) = from_generators_with_basis(real, &m.lines, &gens, expected)?;
    Ok((k, Morphism { degree: 0, a: change }))
}

/// Whether a morphism onto a free target is surjective on lattices.
pub fn is_surjective<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>, phi: &Morphism<F>) -> Result<bool> {
    let e = lattice_matrix(m, n, phi)?;
    let f = m.field();
    let rows: Vec<Vec<F::Elem>> = e
        .iter()
        .map(|r| {
            r.iter()
                .map(|p| p.coeff(Mono::ONE).cloned().unwrap_or_else(|| f.zero()))
                .collect()
        })
        .collect();
    Ok(crate::linalg::rank(f, &rows, n.rank()) == n.rank())
}

fn twist_inverse<F: Field>(m: &FlaggedObject<F>, v: &[Poly<F>]) -> Vec<Poly<F>> {
    let weyl = &m.real.weyl;
    v.iter()
        .zip(&m.lines)
        .map(|(p, l)| {
            let fin = weyl.finite_inverse(weyl.finite_image(&l.elem));
            m.real.act_fin(fin, p)
        })
        .collect()
}

/// Exchanges the left and right actions; the `x`-component becomes the
/// `x⁻¹`-component.
pub fn switch<F: Field>(m: &FlaggedObject<F>) -> Result<FlaggedObject<F>> {
    let real = &m.real;
    let ring = &real.ring;
    let weyl = &real.weyl;
    let f = real.field();
    let cols: Vec<Line> = m
        .lines
        .iter()
        .map(|l| Line {
            elem: weyl.inverse(&l.elem),
            deg: l.deg,
        })
        .collect();
    let tmp = FlaggedObject::new_raw(real.clone(), cols.clone(), vec![], vec![], vec![], false);
    let want = m.rank();
    let maxlen = m.support().iter().map(|x| weyl.length(x) as i32).max().unwrap_or(0);
    let top = m.max_deg() + 2 * maxlen + 4;
    let mut gens: Vec<(i32, Vec<Poly<F>>)> = Vec::new();
    let mut e = m.min_deg();
    while gens.len() < want {
        if e > top {
            return Err(Error::WindowExceeded(e));
        }
        let amb = m.ambient(e);
        let mut ech = Echelon::new(f, amb.dim);
        for (d, v) in &gens {
            let Some(k) = parity_div(e - d) else { continue };
            if k == 0 {
                continue;
            }
            for mono in ring.mono_basis(k) {
                let w: Vec<Poly<F>> = v.iter().map(|p| ring.mul_mono(p, mono)).collect();
                ech.insert(tmp.to_coords(&amb, &w));
            }
        }
        for (_, _, v) in m.lattice_span(e, &amb) {
            let tw = twist_inverse(m, &m.from_coords(&amb, &v));
            if ech.insert(tmp.to_coords(&amb, &tw)) {
                gens.push((e, tw));
            }
        }
        e += 1;
    }
    let mut expected = HashMap::new();
    for c in &cols {
        *expected.entry(c.elem.clone()).or_insert(0) += 1;
    }
    let mut out = from_generators(real, &cols, &gens, &expected)?;
    out.flag = m
        .flag
        .iter()
        .map(|l| FlagLine {
            element: weyl.inverse(&l.element),
            shift: l.shift,
        })
        .collect();
    out.multiplicative = m.multiplicative;
    Ok(out)
}

/// One of the two short exact sequences through `B_s`.
#[derive(Clone, Debug)]
pub struct ExactnessWitness<F: Field> {
    pub sub: FlaggedObject<F>,
    pub middle: FlaggedObject<F>,
    pub quotient: FlaggedObject<F>,
    pub incl: Morphism<F>,
    pub proj: Morphism<F>,
    pub composite_zero: bool,
    pub kernel_rank: usize,
    pub kernel_matches_sub: bool,
    pub surjective: bool,
}

impl<F: Field> ExactnessWitness<F> {
    pub fn exact(&self) -> bool {
        self.composite_zero && self.kernel_rank == 1 && self.kernel_matches_sub && self.surjective
    }
}

/// `F_a(1) → B_s → F_b(−1)` with `(a, b) = (e, s)`, or `(s, e)` if `swapped`.
pub fn exactness_witness<F: Field>(
    real: &Arc<Realization<F>>,
    s: usize,
    swapped: bool,
) -> Result<ExactnessWitness<F>> {
    let weyl = &real.weyl;
    let e = weyl.identity();
    let sw = weyl.generator(s).clone();
    let (a, b) = if swapped { (sw, e) } else { (e, sw) };
    let bs = bs_generator(real, s)?;
    let sub = std_object(real, &a, 1);
    let quot = std_object(real, &b, -1);
    let inc = hom_graded(&sub, &bs, 0)?;
    let pr = hom_graded(&bs, &quot, 0)?;
    if inc.dim() != 1 || pr.dim() != 1 {
        return Err(Error::Computation(format!(
            "expected one-dimensional maps, found {} and {}",
            inc.dim(),
            pr.dim()
        )));
    }
    let incl = inc.basis[0].clone();
    let proj = pr.basis[0].clone();
    let composite_zero = morphism_is_zero(&compose(real, &incl, &proj));
    let expected = flag_counts(&sub.flag);
    let (ker, _) = kernel_object(&bs, &[(&quot, &proj)], &expected)?;
    let kernel_matches_sub = find_isomorphism(&ker, &sub, 0)?.is_some();
    let surjective = is_surjective(&bs, &quot, &proj)?;
    Ok(ExactnessWitness {
        kernel_rank: ker.rank(),
        sub,
        middle: bs,
        quotient: quot,
        incl,
        proj,
        composite_zero,
        kernel_matches_sub,
        surjective,
    })
}

/// Graded rank of `Hom•(M, N)` as a left R-module, from the Hilbert series
/// of the degreewise dimensions.
pub fn hom_total_rank<F: Field>(m: &FlaggedObject<F>, n: &FlaggedObject<F>) -> Result<LaurentPoly> {
    let (lo, hi) = hom_window(m, n);
    let nv = m.real.nvars() as i32;
    let top = hi + 2 * nv + 2;
    let mut series: Vec<i64> = (lo..=top)
        .map(|d| hom_graded_unchecked(m, n, d).dim() as i64)
        .collect();
    for _ in 0..nv {
        for i in (2..series.len()).rev() {
            series[i] -= series[i - 2];
        }
    }
    let cut = (hi - lo + 1) as usize;
    if series[cut..].iter().any(|&c| c != 0) {
        return Err(Error::WindowExceeded(hi));
    }
    Ok(LaurentPoly::from_terms(
        series[..cut]
            .iter()
            .enumerate()
            .map(|(i, &c)| (lo + i as i32, c)),
    ))
}

pub fn morphisms_equal<F: Field>(a: &Morphism<F>, b: &Morphism<F>) -> bool {
    a.degree == b.degree && a.a == b.a
}

//! Root data, finite Weyl groups and the extended affine Weyl group
//! `W = W_f ⋉ X*`, with elements stored as `v·t(λ)`.
//!
//! Generators of `W'` are numbered `0` (the affine reflection `t(β)s_β`)
//! and `1..=r` (the finite simple reflections).

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootDatum {
    pub cartan_label: String,
    /// Semisimple rank.
    pub rank: usize,
    pub character_lattice_rank: usize,
    /// Coordinates in X*.
    pub simple_roots: Vec<Vec<i64>>,
    /// Coordinates in X_*.
    pub simple_coroots: Vec<Vec<i64>>,
}

pub fn pairing(lambda: &[i64], coweight: &[i64]) -> i64 {
    lambda.iter().zip(coweight).map(|(a, b)| a * b).sum()
}

/// Weight-lattice coordinates for a simply connected type with Cartan matrix `c`.
fn sc_datum(label: &str, c: &[[i64; 2]]) -> RootDatum {
    let r = c.len();
    let roots = (0..r).map(|j| (0..r).map(|i| c[i][j]).collect()).collect();
    let coroots = (0..r)
        .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
        .collect();
    RootDatum {
        cartan_label: label.to_string(),
        rank: r,
        character_lattice_rank: r,
        simple_roots: roots,
        simple_coroots: coroots,
    }
}

/// Supported labels: `A1` (SL2), `A2` (SL3), `B2`, `G2` (simply connected),
/// `PGL2` (adjoint), `GL2`, `GL3`. A trailing `~` is ignored.
pub fn build_root_datum(label: &str) -> Result<RootDatum> {
    let base = label.trim().trim_end_matches('~');
    let d = match base {
        "A1" | "SL2" => RootDatum {
            cartan_label: "A1".into(),
            rank: 1,
            character_lattice_rank: 1,
            simple_roots: vec![vec![2]],
            simple_coroots: vec![vec![1]],
        },
        "PGL2" => RootDatum {
            cartan_label: "PGL2".into(),
            rank: 1,
            character_lattice_rank: 1,
            simple_roots: vec![vec![1]],
            simple_coroots: vec![vec![2]],
        },
        "A2" | "SL3" => sc_datum("A2", &[[2, -1], [-1, 2]]),
        "B2" | "C2" => sc_datum("B2", &[[2, -1], [-2, 2]]),
        "G2" => sc_datum("G2", &[[2, -1], [-3, 2]]),
        "GL2" => RootDatum {
            cartan_label: "GL2".into(),
            rank: 1,
            character_lattice_rank: 2,
            simple_roots: vec![vec![1, -1]],
            simple_coroots: vec![vec![1, -1]],
        },
        "GL3" => RootDatum {
            cartan_label: "GL3".into(),
            rank: 2,
            character_lattice_rank: 3,
            simple_roots: vec![vec![1, -1, 0], vec![0, 1, -1]],
            simple_coroots: vec![vec![1, -1, 0], vec![0, 1, -1]],
        },
        _ => return Err(Error::UnknownLabel(label.to_string())),
    };
    d.check()?;
    Ok(d)
}

impl RootDatum {
    /// `C[i][j] = ⟨α_j, α_i^∨⟩`.
    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| pairing(&self.simple_roots[j], &self.simple_coroots[i]))
                    .collect()
            })
            .collect()
    }

    pub fn is_semisimple(&self) -> bool {
        self.rank == self.character_lattice_rank
    }

    fn check(&self) -> Result<()> {
        let c = self.cartan_matrix();
        for (i, row) in c.iter().enumerate() {
            if row[i] != 2 {
                return Err(Error::Computation(format!(
                    "{}: ⟨α_{i}, α_{i}^∨⟩ = {}",
                    self.cartan_label, row[i]
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if i != j && (x > 0 || (x == 0) != (c[j][i] == 0)) {
                    return Err(Error::Computation(format!(
                        "{}: not a generalized Cartan matrix",
                        self.cartan_label
                    )));
                }
            }
        }
        // Finite type: rank ≤ 2 with a_ij a_ji < 4.
        if self.rank > 2 || (self.rank == 2 && c[0][1] * c[1][0] >= 4) {
            return Err(Error::Computation(format!(
                "{}: unsupported or infinite type",
                self.cartan_label
            )));
        }
        Ok(())
    }

    /// Elementary divisors of the lattice spanned by the given vectors inside Z^n
    /// (Smith normal form diagonal, zeros omitted).
    fn elementary_divisors(vectors: &[Vec<i64>], n: usize) -> Vec<i64> {
        let mut m: Vec<Vec<i64>> = vectors.to_vec();
        let rows = m.len();
        let mut divs = Vec::new();
        let mut t = 0;
        for col in 0..n {
            if t == rows {
                break;
            }
            loop {
                // Move the smallest nonzero entry of the remaining block to (t, col').
                let mut best: Option<(usize, usize)> = None;
                for (i, row) in m.iter().enumerate().skip(t) {
                    for (j, &x) in row.iter().enumerate().skip(col) {
                        if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < m[bi][bj].abs()) {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((bi, bj)) = best else {
                    return divs;
                };
                m.swap(t, bi);
                for row in m.iter_mut() {
                    row.swap(col, bj);
                }
                let p = m[t][col];
                let mut done = true;
                for i in 0..rows {
                    if i != t && m[i][col] != 0 {
                        let q = m[i][col] / p;
                        for j in 0..n {
                            m[i][j] -= q * m[t][j];
                        }
                        if m[i][col] != 0 {
                            done = false;
                        }
                    }
                }
                for j in 0..n {
                    if j != col && m[t][j] != 0 {
                        let q = m[t][j] / p;
                        for row in m.iter_mut() {
                            row[j] -= q * row[col];
                        }
                        if m[t][j] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    // Divisibility of the rest is not needed for torsion detection
                    // beyond the product, so record and move on.
                    divs.push(p.abs());
                    t += 1;
                    break;
                }
            }
        }
        divs
    }

    /// Torsion orders of X*/ZR (empty means free).
    pub fn root_quotient_torsion(&self) -> Vec<i64> {
        Self::elementary_divisors(&self.simple_roots, self.character_lattice_rank)
            .into_iter()
            .filter(|&d| d > 1)
            .collect()
    }

    /// Torsion orders of X_*/ZR^∨ (empty means the derived subgroup is simply connected).
    pub fn coroot_quotient_torsion(&self) -> Vec<i64> {
        Self::elementary_divisors(&self.simple_coroots, self.character_lattice_rank)
            .into_iter()
            .filter(|&d| d > 1)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteWeylElement {
    /// Lex-least reduced word in generator numbers `1..=r`.
    pub word: Vec<usize>,
    /// Row-major action on X*: `(v λ)_i = Σ_j m[i][j] λ_j`.
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineWeylElement {
    /// Index into the finite Weyl group table of the ambient `AffineWeyl`.
    pub fin: usize,
    pub translation: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Root {
    /// Coordinates in the simple roots.
    pub coeffs: Vec<i64>,
    pub weight: Vec<i64>,
    pub coroot: Vec<i64>,
    pub positive: bool,
}

/// Finite and extended affine Weyl group data for one root datum.
#[derive(Clone, Debug)]
pub struct AffineWeyl {
    pub datum: RootDatum,
    pub roots: Vec<Root>,
    fin_mats: Vec<Vec<Vec<i64>>>,
    fin_comats: Vec<Vec<Vec<i64>>>,
    fin_words: Vec<Vec<usize>>,
    fin_index: HashMap<Vec<Vec<i64>>, usize>,
    fin_mul: Vec<Vec<usize>>,
    fin_inv: Vec<usize>,
    root_perm: Vec<Vec<usize>>,
    simple_fin: Vec<usize>,
    /// Index of the maximal short root used for the affine generator.
    pub affine_root: usize,
    gens: Vec<AffineWeylElement>,
    omega_gen: AffineWeylElement,
    omega_order: Option<usize>,
    central: Option<Vec<i64>>,
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| pairing(row, v)).collect()
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

impl AffineWeyl {
    pub fn new(datum: RootDatum) -> Result<Self> {
        let n = datum.character_lattice_rank;
        let r = datum.rank;
        let cartan = datum.cartan_matrix();

        // Simple reflections on X* and X_*.
        let refl: Vec<Vec<Vec<i64>>> = (0..r)
            .map(|i| {
                let a = &datum.simple_roots[i];
                let c = &datum.simple_coroots[i];
                (0..n)
                    .map(|p| (0..n).map(|q| i64::from(p == q) - a[p] * c[q]).collect())
                    .collect()
            })
            .collect();
        let corefl: Vec<Vec<Vec<i64>>> = (0..r)
            .map(|i| {
                let a = &datum.simple_roots[i];
                let c = &datum.simple_coroots[i];
                (0..n)
                    .map(|p| (0..n).map(|q| i64::from(p == q) - c[p] * a[q]).collect())
                    .collect()
            })
            .collect();

        // BFS over W_f with lex-least words: right multiplication by s_i.
        let mut fin_mats = vec![identity(n)];
        let mut fin_comats = vec![identity(n)];
        let mut fin_words: Vec<Vec<usize>> = vec![vec![]];
        let mut fin_index = HashMap::new();
        fin_index.insert(identity(n), 0usize);
        let mut layer = vec![0usize];
        while !layer.is_empty() {
            let mut next: Vec<usize> = Vec::new();
            for &u in &layer {
                for (i, s) in refl.iter().enumerate() {
                    let m = mat_mul(&fin_mats[u], s);
                    let mut word = fin_words[u].clone();
                    word.push(i + 1);
                    if let Some(&k) = fin_index.get(&m) {
                        if next.contains(&k) && word < fin_words[k] {
                            fin_words[k] = word;
                        }
                        continue;
                    }
                    let k = fin_mats.len();
                    fin_index.insert(m.clone(), k);
                    fin_mats.push(m);
                    fin_comats.push(mat_mul(&fin_comats[u], &corefl[i]));
                    fin_words.push(word);
                    next.push(k);
                    if fin_mats.len() > 100_000 {
                        return Err(Error::Computation("Weyl group too large".into()));
                    }
                }
            }
            layer = next;
        }
        let nf = fin_mats.len();
        let mut fin_mul = vec![vec![0; nf]; nf];
        for a in 0..nf {
            for b in 0..nf {
                fin_mul[a][b] = fin_index[&mat_mul(&fin_mats[a], &fin_mats[b])];
            }
        }
        let fin_inv = (0..nf)
            .map(|a| (0..nf).find(|&b| fin_mul[a][b] == 0).expect("inverse"))
            .collect();
        let simple_fin: Vec<usize> = (0..r).map(|i| fin_index[&refl[i]]).collect();

        // Roots as orbits of the simple (root, coroot) pairs, tracked in simple coordinates.
        let mut root_coeffs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
        let mut queue: VecDeque<(Vec<i64>, Vec<i64>)> = VecDeque::new();
        for i in 0..r {
            let e: Vec<i64> = (0..r).map(|j| i64::from(i == j)).collect();
            queue.push_back((e.clone(), e));
        }
        let mut seen = HashSet::new();
        while let Some((c, d)) = queue.pop_front() {
            if !seen.insert(c.clone()) {
                continue;
            }
            root_coeffs.push((c.clone(), d.clone()));
            for i in 0..r {
                let mut c2 = c.clone();
                let pc: i64 = (0..r).map(|j| c[j] * cartan[i][j]).sum();
                c2[i] -= pc;
                let mut d2 = d.clone();
                let pd: i64 = (0..r).map(|j| d[j] * cartan[j][i]).sum();
                d2[i] -= pd;
                queue.push_back((c2, d2));
            }
        }
        root_coeffs.sort_by_key(|(c, _)| {
            let h: i64 = c.iter().sum();
            (h < 0, h.abs(), c.iter().map(|x| -x).collect::<Vec<_>>())
        });
        let roots: Vec<Root> = root_coeffs
            .iter()
            .map(|(c, d)| {
                let weight = (0..n)
                    .map(|p| (0..r).map(|j| c[j] * datum.simple_roots[j][p]).sum())
                    .collect();
                let coroot = (0..n)
                    .map(|p| (0..r).map(|j| d[j] * datum.simple_coroots[j][p]).sum())
                    .collect();
                Root {
                    positive: c.iter().all(|&x| x >= 0),
                    coeffs: c.clone(),
                    weight,
                    coroot,
                }
            })
            .collect();
        let by_weight: HashMap<Vec<i64>, usize> = roots
            .iter()
            .enumerate()
            .map(|(i, rt)| (rt.weight.clone(), i))
            .collect();
        let root_perm: Vec<Vec<usize>> = fin_mats
            .iter()
            .map(|m| {
                roots
                    .iter()
                    .map(|rt| by_weight[&mat_vec(m, &rt.weight)])
                    .collect()
            })
            .collect();

        // Maximal short root: shortest length class, greatest height.
        let mut sym = vec![None; r];
        if r > 0 {
            sym[0] = Some(num_rational::Ratio::<i64>::from_integer(1));
        }
        for _ in 0..r {
            for i in 0..r {
                for j in 0..r {
                    if let (Some(di), None) = (sym[i], sym[j]) {
                        if cartan[i][j] != 0 {
                            // C_ij d_i = C_ji d_j
                            sym[j] = Some(di * cartan[i][j] / cartan[j][i]);
                        }
                    }
                }
            }
        }
        let sym: Vec<num_rational::Ratio<i64>> = sym
            .into_iter()
            .map(|x| x.expect("connected Dynkin diagram"))
            .collect();
        let norm = |c: &[i64]| {
            let mut s = num_rational::Ratio::<i64>::from_integer(0);
            for i in 0..r {
                for j in 0..r {
                    s += sym[i] * cartan[i][j] * c[i] * c[j];
                }
            }
            s
        };
        let min_norm = roots.iter().map(|rt| norm(&rt.coeffs)).min().expect("roots");
        let affine_root = (0..roots.len())
            .filter(|&i| roots[i].positive && norm(&roots[i].coeffs) == min_norm)
            .max_by_key(|&i| (roots[i].coeffs.iter().sum::<i64>(), std::cmp::Reverse(i)))
            .expect("short root");

        let mut w = AffineWeyl {
            datum,
            roots,
            fin_mats,
            fin_comats,
            fin_words,
            fin_index,
            fin_mul,
            fin_inv,
            root_perm,
            simple_fin,
            affine_root,
            gens: Vec::new(),
            omega_gen: AffineWeylElement {
                fin: 0,
                translation: vec![0; n],
            },
            omega_order: Some(1),
            central: None,
        };
        // s_0 = t(β)s_β = s_β t(−β)
        let beta = w.roots[affine_root].weight.clone();
        let sb = w.reflection_index(affine_root);
        let s0 = AffineWeylElement {
            fin: sb,
            translation: beta.iter().map(|x| -x).collect(),
        };
        let mut gens = vec![s0];
        for i in 0..r {
            gens.push(AffineWeylElement {
                fin: w.simple_fin[i],
                translation: vec![0; n],
            });
        }
        w.gens = gens;
        w.init_omega()?;
        Ok(w)
    }

    pub fn from_label(label: &str) -> Result<Self> {
        Self::new(build_root_datum(label)?)
    }

    /// Index of the finite reflection in root number `i`.
    fn reflection_index(&self, i: usize) -> usize {
        let a = &self.roots[i].weight;
        let c = &self.roots[i].coroot;
        let n = a.len();
        let m: Vec<Vec<i64>> = (0..n)
            .map(|p| (0..n).map(|q| i64::from(p == q) - a[p] * c[q]).collect())
            .collect();
        self.fin_index[&m]
    }

    fn init_omega(&mut self) -> Result<()> {
        let n = self.datum.character_lattice_rank;
        if self.datum.is_semisimple() {
            let omega = self.omega_group(2);
            let order = omega.len();
            let gen = omega
                .iter()
                .find(|g| {
                    let mut x = (*g).clone();
                    let mut k = 1;
                    while x != self.identity() {
                        x = self.multiply(&x, g);
                        k += 1;
                    }
                    k == order || order == 1
                })
                .cloned()
                .ok_or_else(|| Error::Computation("Omega is not cyclic".into()))?;
            self.omega_gen = gen;
            self.omega_order = Some(order);
        } else {
            // Reductive case: the central functional is orthogonal to all roots.
            if n != self.datum.rank + 1 {
                return Err(Error::Computation("unsupported center rank".into()));
            }
            let chi = vec![1i64; n];
            if self.datum.simple_roots.iter().any(|a| pairing(a, &chi) != 0) {
                return Err(Error::Computation("unsupported reductive datum".into()));
            }
            let gen = self
                .omega_group(2)
                .into_iter()
                .find(|w| pairing(&w.translation, &chi) == 1)
                .ok_or_else(|| Error::Computation("no Omega generator in box".into()))?;
            self.omega_gen = gen;
            self.omega_order = None;
            self.central = Some(chi);
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.datum.rank
    }

    pub fn lattice_rank(&self) -> usize {
        self.datum.character_lattice_rank
    }

    pub fn finite_order(&self) -> usize {
        self.fin_mats.len()
    }

    pub fn finite_element(&self, fin: usize) -> FiniteWeylElement {
        FiniteWeylElement {
            word: self.fin_words[fin].clone(),
            matrix: self.fin_mats[fin].clone(),
        }
    }

    /// All of W_f, in BFS order.
    pub fn enumerate_finite_weyl(&self) -> Vec<FiniteWeylElement> {
        (0..self.finite_order()).map(|i| self.finite_element(i)).collect()
    }

    pub fn finite_length(&self, fin: usize) -> usize {
        self.fin_words[fin].len()
    }

    pub fn finite_mul(&self, a: usize, b: usize) -> usize {
        self.fin_mul[a][b]
    }

    pub fn finite_inverse(&self, a: usize) -> usize {
        self.fin_inv[a]
    }

    /// Action of W_f on X_* (columns give images of basis vectors).
    pub fn coweight_matrix(&self, fin: usize) -> &Vec<Vec<i64>> {
        &self.fin_comats[fin]
    }

    pub fn weight_matrix(&self, fin: usize) -> &Vec<Vec<i64>> {
        &self.fin_mats[fin]
    }

    pub fn finite_index_of_matrix(&self, m: &Vec<Vec<i64>>) -> Option<usize> {
        self.fin_index.get(m).copied()
    }

    pub fn act_weight(&self, fin: usize, lambda: &[i64]) -> Vec<i64> {
        mat_vec(&self.fin_mats[fin], lambda)
    }

    pub fn act_coweight(&self, fin: usize, mu: &[i64]) -> Vec<i64> {
        mat_vec(&self.fin_comats[fin], mu)
    }

    pub fn identity(&self) -> AffineWeylElement {
        AffineWeylElement {
            fin: 0,
            translation: vec![0; self.lattice_rank()],
        }
    }

    pub fn translation(&self, lambda: &[i64]) -> AffineWeylElement {
        AffineWeylElement {
            fin: 0,
            translation: lambda.to_vec(),
        }
    }

    pub fn finite(&self, fin: usize) -> AffineWeylElement {
        AffineWeylElement {
            fin,
            translation: vec![0; self.lattice_rank()],
        }
    }

    /// `(v₁t(λ₁))(v₂t(λ₂)) = v₁v₂ t(v₂⁻¹λ₁ + λ₂)`
    pub fn multiply(&self, a: &AffineWeylElement, b: &AffineWeylElement) -> AffineWeylElement {
        let l = self.act_weight(self.fin_inv[b.fin], &a.translation);
        AffineWeylElement {
            fin: self.fin_mul[a.fin][b.fin],
            translation: l.iter().zip(&b.translation).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn multiply_checked(
        &self,
        a: &AffineWeylElement,
        b: &AffineWeylElement,
    ) -> Result<AffineWeylElement> {
        let n = self.lattice_rank();
        if a.translation.len() != n
            || b.translation.len() != n
            || a.fin >= self.finite_order()
            || b.fin >= self.finite_order()
        {
            return Err(Error::MismatchedData);
        }
        Ok(self.multiply(a, b))
    }

    pub fn inverse(&self, a: &AffineWeylElement) -> AffineWeylElement {
        let neg: Vec<i64> = a.translation.iter().map(|x| -x).collect();
        AffineWeylElement {
            fin: self.fin_inv[a.fin],
            translation: self.act_weight(a.fin, &neg),
        }
    }

    pub fn product(&self, elems: &[AffineWeylElement]) -> AffineWeylElement {
        elems
            .iter()
            .fold(self.identity(), |acc, x| self.multiply(&acc, x))
    }

    /// Length via the root formula for `w = v·t(λ)`.
    pub fn length(&self, w: &AffineWeylElement) -> usize {
        let perm = &self.root_perm[w.fin];
        let mut total = 0i64;
        for (i, rt) in self.roots.iter().enumerate() {
            if !rt.positive {
                continue;
            }
            let p = pairing(&w.translation, &rt.coroot);
            if self.roots[perm[i]].positive {
                total += p.abs();
            } else {
                total += (p + 1).abs();
            }
        }
        total as usize
    }

    /// `S = [s_0, s_1, …, s_r]`.
    pub fn simple_reflections(&self) -> &[AffineWeylElement] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &AffineWeylElement {
        &self.gens[i]
    }

    pub fn num_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn is_finite_generator(&self, i: usize) -> bool {
        i >= 1
    }

    /// Length-0 elements `v·t(λ)` with `λ` in the box `[-b, b]^n`.
    pub fn omega_group(&self, b: i64) -> Vec<AffineWeylElement> {
        let n = self.lattice_rank();
        let mut out = Vec::new();
        let mut lam = vec![-b; n];
        loop {
            for fin in 0..self.finite_order() {
                let w = AffineWeylElement {
                    fin,
                    translation: lam.clone(),
                };
                if self.length(&w) == 0 {
                    out.push(w);
                }
            }
            let mut k = 0;
            while k < n {
                lam[k] += 1;
                if lam[k] <= b {
                    break;
                }
                lam[k] = -b;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        out.sort_by_key(|w| (w.translation.iter().map(|x| x.abs()).sum::<i64>(), w.clone()));
        out
    }

    pub fn omega_generator(&self) -> &AffineWeylElement {
        &self.omega_gen
    }

    /// `None` when Ω is infinite.
    pub fn omega_order(&self) -> Option<usize> {
        self.omega_order
    }

    /// `g^k` for the chosen generator `g` of Ω.
    pub fn omega_power(&self, k: i64) -> AffineWeylElement {
        let g = if k >= 0 {
            self.omega_gen.clone()
        } else {
            self.inverse(&self.omega_gen)
        };
        let mut x = self.identity();
        for _ in 0..k.unsigned_abs() {
            x = self.multiply(&x, &g);
        }
        x
    }

    /// Exponent `k` with `ω = g^k`.
    pub fn omega_index(&self, omega: &AffineWeylElement) -> Result<i64> {
        if let Some(chi) = &self.central {
            let k = pairing(&omega.translation, chi);
            if &self.omega_power(k) == omega {
                return Ok(k);
            }
        } else if let Some(order) = self.omega_order {
            let mut x = self.identity();
            for k in 0..order {
                if &x == omega {
                    return Ok(k as i64);
                }
                x = self.multiply(&x, &self.omega_gen);
            }
        }
        Err(Error::Computation("element is not in Omega".into()))
    }

    /// `w = ω·w'` with `ω ∈ Ω` and `w' ∈ W'`; returns `(ω, w')`.
    pub fn omega_decompose(&self, w: &AffineWeylElement) -> (AffineWeylElement, AffineWeylElement) {
        let mut x = w.clone();
        let mut len = self.length(&x);
        let mut suffix: Vec<usize> = Vec::new();
        while len > 0 {
            let (i, y) = self
                .gens
                .iter()
                .enumerate()
                .map(|(i, s)| (i, self.multiply(&x, s)))
                .find(|(_, y)| self.length(y) < len)
                .expect("positive length element has a right descent");
            suffix.push(i);
            x = y;
            len -= 1;
        }
        let omega = x;
        let wp = self.multiply(&self.inverse(&omega), w);
        (omega, wp)
    }

    pub fn in_w_prime(&self, w: &AffineWeylElement) -> bool {
        let (o, _) = self.omega_decompose(w);
        o == self.identity()
    }

    /// Lex-least reduced word of the W'-part.
    pub fn reduced_word(&self, w: &AffineWeylElement) -> Vec<usize> {
        let (_, mut x) = self.omega_decompose(w);
        let mut len = self.length(&x);
        let mut word = Vec::with_capacity(len);
        while len > 0 {
            let (i, y) = self
                .gens
                .iter()
                .enumerate()
                .map(|(i, s)| (i, self.multiply(s, &x)))
                .find(|(_, y)| self.length(y) < len)
                .expect("left descent");
            word.push(i);
            x = y;
            len -= 1;
        }
        word
    }

    pub fn from_word(&self, omega: &AffineWeylElement, word: &[usize]) -> AffineWeylElement {
        word.iter()
            .fold(omega.clone(), |acc, &i| self.multiply(&acc, &self.gens[i]))
    }

    /// All reduced words of the W'-part.
    pub fn all_reduced_words(&self, w: &AffineWeylElement) -> Vec<Vec<usize>> {
        let (_, x) = self.omega_decompose(w);
        let mut out = Vec::new();
        let mut memo: HashMap<AffineWeylElement, Vec<Vec<usize>>> = HashMap::new();
        out.extend(self.words_rec(&x, &mut memo));
        out.sort();
        out
    }

    fn words_rec(
        &self,
        x: &AffineWeylElement,
        memo: &mut HashMap<AffineWeylElement, Vec<Vec<usize>>>,
    ) -> Vec<Vec<usize>> {
        if let Some(v) = memo.get(x) {
            return v.clone();
        }
        let len = self.length(x);
        let res = if len == 0 {
            vec![vec![]]
        } else {
            let mut res = Vec::new();
            for (i, s) in self.gens.iter().enumerate() {
                let y = self.multiply(x, s);
                if self.length(&y) < len {
                    for mut wd in self.words_rec(&y, memo) {
                        wd.push(i);
                        res.push(wd);
                    }
                }
            }
            res
        };
        memo.insert(x.clone(), res.clone());
        res
    }

    /// `ω-index:word`, e.g. `0:010`. Words use one character per generator.
    pub fn format(&self, w: &AffineWeylElement) -> String {
        let (o, _) = self.omega_decompose(w);
        let k = self.omega_index(&o).unwrap_or(i64::MIN);
        let word: String = self
            .reduced_word(w)
            .iter()
            .map(|&i| std::char::from_digit(i as u32, 36).expect("generator index"))
            .collect();
        format!("{k}:{word}")
    }

    pub fn parse(&self, s: &str) -> Result<AffineWeylElement> {
        let (k, word) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("element `{s}` lacks `:`")))?;
        let k: i64 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad Omega index in `{s}`")))?;
        let mut letters = Vec::new();
        for ch in word.chars() {
            let i = ch
                .to_digit(36)
                .map(|d| d as usize)
                .filter(|&d| d < self.num_generators())
                .ok_or_else(|| Error::Parse(format!("bad generator `{ch}` in `{s}`")))?;
            letters.push(i);
        }
        Ok(self.from_word(&self.omega_power(k), &letters))
    }

    /// Sort key: length, then Ω-index, then lex-least word.
    pub fn sort_key(&self, w: &AffineWeylElement) -> (usize, i64, Vec<usize>) {
        let (o, _) = self.omega_decompose(w);
        (
            self.length(w),
            self.omega_index(&o).unwrap_or(i64::MIN),
            self.reduced_word(w),
        )
    }

    /// W' elements with word distance ≤ `bound`, found by BFS in the Cayley
    /// graph of the generators, with their distances. Does not use `length`.
    pub fn enumerate_ball(&self, bound: usize) -> Vec<(AffineWeylElement, usize)> {
        let mut dist: HashMap<AffineWeylElement, usize> = HashMap::new();
        let e = self.identity();
        dist.insert(e.clone(), 0);
        let mut order = vec![(e.clone(), 0)];
        let mut layer = vec![e];
        for d in 1..=bound {
            let mut next = Vec::new();
            for u in &layer {
                for s in &self.gens {
                    let w = self.multiply(u, s);
                    if !dist.contains_key(&w) {
                        dist.insert(w.clone(), d);
                        order.push((w.clone(), d));
                        next.push(w);
                    }
                }
            }
            layer = next;
        }
        order
    }

    /// The W'-elements of length ≤ `bound`, sorted by (length, lex word).
    pub fn ball_sorted(&self, bound: usize) -> Vec<AffineWeylElement> {
        let mut v: Vec<AffineWeylElement> =
            self.enumerate_ball(bound).into_iter().map(|(w, _)| w).collect();
        v.sort_by_cached_key(|w| self.sort_key(w));
        v
    }

    /// Elements below `w` in the Bruhat order, by subwords of the lex-least
    /// reduced word.
    pub fn lower_set(&self, w: &AffineWeylElement) -> HashSet<AffineWeylElement> {
        self.lower_set_for_word(w, &self.reduced_word(w))
    }

    pub fn lower_set_for_word(
        &self,
        w: &AffineWeylElement,
        word: &[usize],
    ) -> HashSet<AffineWeylElement> {
        let (o, _) = self.omega_decompose(w);
        let mut set: HashSet<AffineWeylElement> = HashSet::new();
        set.insert(o);
        for &i in word {
            let s = &self.gens[i];
            let new: Vec<AffineWeylElement> = set.iter().map(|x| self.multiply(x, s)).collect();
            set.extend(new);
        }
        set
    }

    pub fn bruhat_leq(&self, y: &AffineWeylElement, w: &AffineWeylElement) -> Result<bool> {
        let (oy, _) = self.omega_decompose(y);
        let (ow, _) = self.omega_decompose(w);
        if oy != ow {
            return Err(Error::Incomparable(self.format(y), self.format(w)));
        }
        if self.length(y) > self.length(w) {
            return Ok(false);
        }
        Ok(self.lower_set(w).contains(y))
    }

    /// For an affine simple reflection `s`, the first `(w, s')` in the search
    /// order (length of `w`, Ω-index, lex word, then `s'`) with
    /// `s = w s' w⁻¹` and `ℓ(ws') = ℓ(w) + 1`.
    pub fn conjugation_datum(
        &self,
        s: &AffineWeylElement,
        bound: usize,
    ) -> Result<(AffineWeylElement, usize)> {
        let omegas: Vec<AffineWeylElement> = match self.omega_order {
            Some(k) => (0..k as i64).map(|i| self.omega_power(i)).collect(),
            None => [0i64, 1, -1, 2, -2].iter().map(|&i| self.omega_power(i)).collect(),
        };
        let ball = self.ball_sorted(bound);
        for len in 0..=bound {
            for o in &omegas {
                for x in ball.iter().filter(|x| self.length(x) == len) {
                    let w = self.multiply(o, x);
                    for sp in 1..self.num_generators() {
                        let g = &self.gens[sp];
                        let conj = self.product(&[w.clone(), g.clone(), self.inverse(&w)]);
                        if &conj == s && self.length(&self.multiply(&w, g)) == len + 1 {
                            return Ok((w, sp));
                        }
                    }
                }
            }
        }
        Err(Error::SearchExhausted(bound))
    }

    /// Image in W_f.
    pub fn finite_image(&self, w: &AffineWeylElement) -> usize {
        w.fin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_orders() {
        for (l, n, top) in [("A1", 2, 1), ("A2", 6, 3), ("B2", 8, 4), ("G2", 12, 6), ("GL3", 6, 3)] {
            let w = AffineWeyl::from_label(l).unwrap();
            assert_eq!(w.finite_order(), n, "{l}");
            assert_eq!(w.enumerate_finite_weyl().iter().map(|x| x.word.len()).max(), Some(top));
        }
        assert!(build_root_datum("E8").is_err());
    }

    #[test]
    fn cartan_a2() {
        let d = build_root_datum("A2").unwrap();
        assert_eq!(d.cartan_matrix(), vec![vec![2, -1], vec![-1, 2]]);
    }

    #[test]
    fn generators_have_length_one() {
        for l in ["A1", "A2", "B2", "G2", "PGL2", "GL2", "GL3"] {
            let w = AffineWeyl::from_label(l).unwrap();
            for s in w.simple_reflections() {
                assert_eq!(w.length(s), 1, "{l}");
                assert_eq!(w.multiply(s, s), w.identity());
            }
        }
    }

    #[test]
    fn affine_a1_lengths() {
        let w = AffineWeyl::from_label("A1").unwrap();
        let alpha = w.translation(&[2]);
        assert_eq!(w.length(&alpha), 2);
        assert_eq!(w.omega_order(), Some(2));
        let b2 = AffineWeyl::from_label("B2").unwrap();
        // The affine generator comes from a short root.
        let beta = &b2.roots[b2.affine_root];
        assert_eq!(pairing(&beta.weight, &beta.coroot), 2);
        assert_eq!(beta.coeffs, vec![1, 1]);
    }

    #[test]
    fn omega_conjugation_permutes_generators() {
        for l in ["A1", "A2", "B2", "GL2"] {
            let w = AffineWeyl::from_label(l).unwrap();
            let o = w.omega_generator().clone();
            assert_eq!(w.length(&o), 0);
            for s in w.simple_reflections() {
                let c = w.product(&[o.clone(), s.clone(), w.inverse(&o)]);
                assert!(w.simple_reflections().contains(&c), "{l}");
            }
        }
        let g = AffineWeyl::from_label("GL2").unwrap();
        assert_eq!(g.omega_order(), None);
        let p = AffineWeyl::from_label("PGL2").unwrap();
        assert_eq!(p.omega_order(), Some(1));
    }

    #[test]
    fn format_roundtrip() {
        let w = AffineWeyl::from_label("A2").unwrap();
        for x in w.ball_sorted(4) {
            let o = w.omega_generator().clone();
            let y = w.multiply(&o, &x);
            assert_eq!(w.parse(&w.format(&y)).unwrap(), y);
        }
        let a1 = AffineWeyl::from_label("A1").unwrap();
        let x = a1.from_word(&a1.identity(), &[0, 1, 0]);
        assert_eq!(a1.format(&x), "0:010");
    }

    #[test]
    fn conjugation_datum_a1() {
        let w = AffineWeyl::from_label("A1").unwrap();
        let s0 = w.generator(0).clone();
        let (x, sp) = w.conjugation_datum(&s0, 4).unwrap();
        assert_eq!(sp, 1);
        assert_eq!(w.product(&[w.inverse(&x), s0, x.clone()]), *w.generator(1));
        let p = AffineWeyl::from_label("PGL2").unwrap();
        assert!(p.conjugation_datum(&p.generator(0).clone(), 4).is_err());
    }

    #[test]
    fn lattice_quotients() {
        let a1 = build_root_datum("A1").unwrap();
        assert_eq!(a1.root_quotient_torsion(), vec![2]);
        assert!(a1.coroot_quotient_torsion().is_empty());
        let p = build_root_datum("PGL2").unwrap();
        assert!(p.root_quotient_torsion().is_empty());
        assert_eq!(p.coroot_quotient_torsion(), vec![2]);
        assert!(build_root_datum("GL2").unwrap().root_quotient_torsion().is_empty());
    }
}

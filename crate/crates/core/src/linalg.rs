//! Dense exact linear algebra over a `Field`.

use crate::field::Field;

/// Row echelon form built incrementally. Each stored row is normalized at its
/// pivot and has zeros in the pivots of every earlier row, so reducing a
/// vector against the rows in insertion order is exact.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    field: F,
    ncols: usize,
    rows: Vec<Vec<F::Elem>>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
    /// Optional provenance: row i equals sum_t tags[i][t] * input_t.
    tags: Option<Vec<Vec<F::Elem>>>,
    ntags: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: &F, ncols: usize) -> Self {
        Echelon {
            field: field.clone(),
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_row: vec![None; ncols],
            tags: None,
            ntags: 0,
        }
    }

    /// Echelon form that remembers how each row arose from tagged inputs.
    pub fn with_tags(field: &F, ncols: usize, ntags: usize) -> Self {
        let mut e = Self::new(field, ncols);
        e.tags = Some(Vec::new());
        e.ntags = ntags;
        e
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<F::Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn reduce_with(&self, v: &mut [F::Elem], mut comb: Option<&mut Vec<F::Elem>>) {
        let f = &self.field;
        for (i, row) in self.rows.iter().enumerate() {
            let p = self.pivots[i];
            if f.is_zero(&v[p]) {
                continue;
            }
            let c = v[p].clone();
            for j in p..self.ncols {
                if !f.is_zero(&row[j]) {
                    v[j] = f.sub(&v[j], &f.mul(&c, &row[j]));
                }
            }
            if let (Some(comb), Some(tags)) = (comb.as_deref_mut(), self.tags.as_ref()) {
                for (t, x) in tags[i].iter().enumerate() {
                    if !f.is_zero(x) {
                        comb[t] = f.sub(&comb[t], &f.mul(&c, x));
                    }
                }
            }
        }
    }

    /// Residual of `v` modulo the row space.
    pub fn reduce(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        let mut w = v.to_vec();
        self.reduce_with(&mut w, None);
        w
    }

    pub fn contains(&self, v: &[F::Elem]) -> bool {
        let w = self.reduce(v);
        w.iter().all(|x| self.field.is_zero(x))
    }

    /// Inserts `v`; returns whether it was independent of the current rows.
    pub fn insert(&mut self, v: Vec<F::Elem>) -> bool {
        self.insert_inner(v, None)
    }

    /// Inserts input number `tag`.
    pub fn insert_tagged(&mut self, v: Vec<F::Elem>, tag: usize) -> bool {
        let mut comb = vec![self.field.zero(); self.ntags];
        comb[tag] = self.field.one();
        self.insert_inner(v, Some(comb))
    }

    fn insert_inner(&mut self, mut v: Vec<F::Elem>, mut comb: Option<Vec<F::Elem>>) -> bool {
        debug_assert_eq!(v.len(), self.ncols);
        self.reduce_with(&mut v, comb.as_mut());
        let f = &self.field;
        let Some(p) = v.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&v[p]).expect("nonzero pivot");
        for x in v.iter_mut().skip(p) {
            *x = f.mul(x, &inv);
        }
        if let Some(c) = comb.as_mut() {
            for x in c.iter_mut() {
                *x = f.mul(x, &inv);
            }
        }
        self.pivot_row[p] = Some(self.rows.len());
        self.pivots.push(p);
        self.rows.push(v);
        if let (Some(tags), Some(c)) = (self.tags.as_mut(), comb) {
            tags.push(c);
        }
        true
    }

    /// Coefficients over the tagged inputs expressing `v`, if `v` is in the span.
    pub fn express(&self, v: &[F::Elem]) -> Option<Vec<F::Elem>> {
        assert!(self.tags.is_some(), "express needs a tagged echelon");
        let f = &self.field;
        let mut w = v.to_vec();
        let mut comb = vec![f.zero(); self.ntags];
        self.reduce_with(&mut w, Some(&mut comb));
        if w.iter().all(|x| f.is_zero(x)) {
            Some(comb.iter().map(|x| f.neg(x)).collect())
        } else {
            None
        }
    }

    /// Fully reduced rows (RREF), sorted by pivot.
    pub fn rref(&self) -> Vec<(usize, Vec<F::Elem>)> {
        let f = &self.field;
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        let mut out: Vec<(usize, Vec<F::Elem>)> = order
            .iter()
            .map(|&i| (self.pivots[i], self.rows[i].clone()))
            .collect();
        for k in (0..out.len()).rev() {
            let (p, _) = out[k];
            let pr = out[k].1.clone();
            for (_, row) in out.iter_mut().take(k) {
                if f.is_zero(&row[p]) {
                    continue;
                }
                let c = row[p].clone();
                for j in p..self.ncols {
                    if !f.is_zero(&pr[j]) {
                        row[j] = f.sub(&row[j], &f.mul(&c, &pr[j]));
                    }
                }
            }
        }
        out
    }

    /// Basis of the solutions `x` of `row . x = 0` for all rows.
    pub fn nullspace(&self) -> Vec<Vec<F::Elem>> {
        let f = &self.field;
        let rref = self.rref();
        let mut is_pivot = vec![false; self.ncols];
        for (p, _) in &rref {
            is_pivot[*p] = true;
        }
        let mut out = Vec::new();
        for free in 0..self.ncols {
            if is_pivot[free] {
                continue;
            }
            let mut x = vec![f.zero(); self.ncols];
            x[free] = f.one();
            for (p, row) in &rref {
                if !f.is_zero(&row[free]) {
                    x[*p] = f.neg(&row[free]);
                }
            }
            out.push(x);
        }
        out
    }
}

pub fn rank<F: Field>(field: &F, rows: &[Vec<F::Elem>], ncols: usize) -> usize {
    let mut e = Echelon::new(field, ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// Null space of the system given by equation rows over `ncols` unknowns.
pub fn nullspace<F: Field>(field: &F, eqs: &[Vec<F::Elem>], ncols: usize) -> Vec<Vec<F::Elem>> {
    let mut e = Echelon::new(field, ncols);
    for r in eqs {
        e.insert(r.clone());
    }
    e.nullspace()
}

pub type Mat<E> = Vec<Vec<E>>;

pub fn identity<F: Field>(field: &F, n: usize) -> Mat<F::Elem> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect())
        .collect()
}

pub fn mat_mul<F: Field>(field: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut c = vec![vec![field.zero(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            let x = &a[i][k];
            if field.is_zero(x) {
                continue;
            }
            for j in 0..m {
                field.mul_add_assign(&mut c[i][j], x, &bk[j]);
            }
        }
    }
    c
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse<F: Field>(field: &F, a: &Mat<F::Elem>) -> Option<Mat<F::Elem>> {
    let n = a.len();
    let mut aug: Mat<F::Elem> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !field.is_zero(&aug[r][col]))?;
        aug.swap(col, piv);
        let inv = field.inv(&aug[col][col])?;
        for x in aug[col].iter_mut() {
            *x = field.mul(x, &inv);
        }
        let prow = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || field.is_zero(&row[col]) {
                continue;
            }
            let c = row[col].clone();
            for j in 0..2 * n {
                if !field.is_zero(&prow[j]) {
                    row[j] = field.sub(&row[j], &field.mul(&c, &prow[j]));
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};

    #[test]
    fn nullspace_small() {
        let q = Rationals;
        let eqs = vec![vec![q.from_i64(1), q.from_i64(2), q.from_i64(3)]];
        let ns = nullspace(&q, &eqs, 3);
        assert_eq!(ns.len(), 2);
        for x in ns {
            let s = (0..3).fold(q.zero(), |acc, j| q.add(&acc, &q.mul(&eqs[0][j], &x[j])));
            assert!(q.is_zero(&s));
        }
    }

    #[test]
    fn express_tagged() {
        let f = PrimeField::new(5).unwrap();
        let mut e = Echelon::with_tags(&f, 2, 2);
        e.insert_tagged(vec![1, 1], 0);
        e.insert_tagged(vec![1, 4], 1);
        let c = e.express(&[2, 0]).unwrap();
        // 2*(1,0) = (1,1) + (1,4)
        assert_eq!(c, vec![1, 1]);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = PrimeField::new(7).unwrap();
        let a = vec![vec![2, 3], vec![1, 4]];
        let b = inverse(&f, &a).unwrap();
        assert_eq!(mat_mul(&f, &a, &b), identity(&f, 2));
        assert!(inverse(&f, &vec![vec![1, 2], vec![2, 4]]).is_none());
    }
}

//! Sparse exact linear algebra: incremental row echelon forms.
//!
//! Over the rationals rows are kept integral and content-reduced, so the
//! elimination is fraction-free; over prime fields pivots are normalized to 1.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::field::{Coef, Field};

pub type SparseVec = BTreeMap<usize, Coef>;

pub fn axpy(y: &mut SparseVec, a: &Coef, x: &SparseVec) {
    for (k, v) in x {
        let t = a * v;
        match y.get_mut(k) {
            Some(e) => {
                *e += &t;
                if e.is_zero() {
                    y.remove(k);
                }
            }
            None => {
                if !t.is_zero() {
                    y.insert(*k, t);
                }
            }
        }
    }
}

fn scale(x: &SparseVec, a: &Coef) -> SparseVec {
    x.iter().map(|(k, v)| (*k, a * v)).filter(|(_, v)| !v.is_zero()).collect()
}

/// Clear denominators and divide by the content; the leading entry is made positive.
fn primitive(x: SparseVec) -> SparseVec {
    let Some((_, lead)) = x.iter().next() else { return x };
    if !matches!(lead, Coef::Q(_)) {
        let inv = lead.inv();
        return scale(&x, &inv);
    }
    let mut l = BigInt::one();
    for v in x.values() {
        l = l.lcm(&v.denom());
    }
    let mut g = BigInt::zero();
    for v in x.values() {
        let n = v.numer_abs() * (&l / v.denom());
        g = g.gcd(&n);
    }
    let lead_neg = matches!(lead, Coef::Q(q) if q < &num_rational::BigRational::zero());
    let factor = Coef::Q(num_rational::BigRational::new(if lead_neg { -l } else { l }, g));
    scale(&x, &factor)
}

/// Row echelon form built one vector at a time. Pivot = smallest column index.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    /// Reduce `v` against the stored rows (leading terms only are guaranteed cleared
    /// while scanning; the result is zero iff `v` is in the span).
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut cursor = 0usize;
        loop {
            let next = v.range(cursor..).map(|(k, _)| *k).find(|k| self.rows.contains_key(k));
            let Some(k) = next else { return v };
            let row = &self.rows[&k];
            let c = v[&k].clone();
            let lead = &row[&k];
            let a = -&(&c * &lead.inv());
            axpy(&mut v, &a, row);
            cursor = k + 1;
        }
    }

    /// Insert `v`; returns true if the rank increased.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(v);
        if r.is_empty() {
            return false;
        }
        let r = primitive(r);
        let k = *r.keys().next().unwrap();
        self.rows.insert(k, r);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.values()
    }
}

/// Dense matrix helpers for small systems.
pub fn rank_dense(m: &[Vec<Coef>]) -> usize {
    let mut e = Echelon::new();
    let mut r = 0;
    for row in m {
        let v: SparseVec = row.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
        if e.insert(v) {
            r += 1;
        }
    }
    r
}

/// Product of dense matrices.
pub fn mul_dense(field: Field, a: &[Vec<Coef>], b: &[Vec<Coef>]) -> Vec<Vec<Coef>> {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut acc = field.zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() {
                            acc += &(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Inverse of a square dense matrix, if it is invertible.
pub fn invert_dense(field: Field, m: &[Vec<Coef>]) -> Option<Vec<Vec<Coef>>> {
    let n = m.len();
    let mut a: Vec<Vec<Coef>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].inv();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * p);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis of the null space of the linear map given by `cols` (each column a sparse
/// vector in the codomain); vectors are indexed by column number.
pub fn kernel(field: Field, cols: &[SparseVec]) -> Vec<SparseVec> {
    // Gaussian elimination on columns, tracking combinations.
    let mut pivots: BTreeMap<usize, (SparseVec, SparseVec)> = BTreeMap::new();
    let mut out = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        let mut comb: SparseVec = BTreeMap::new();
        comb.insert(j, field.one());
        loop {
            let lead = v.keys().find(|k| pivots.contains_key(k)).copied();
            let Some(k) = lead else { break };
            let (pv, pc) = &pivots[&k];
            let a = -&(&v[&k] * &pv[&k].inv());
            axpy(&mut v, &a, pv);
            axpy(&mut comb, &a, pc);
        }
        if v.is_empty() {
            out.push(comb);
        } else {
            let k = *v.keys().next().unwrap();
            pivots.insert(k, (v, comb));
        }
    }
    out
}

/// Solve `sum_j x_j cols[j] = target`; returns one solution if it exists.
pub fn solve(field: Field, cols: &[SparseVec], target: &SparseVec) -> Option<SparseVec> {
    let mut pivots: BTreeMap<usize, (SparseVec, SparseVec)> = BTreeMap::new();
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        let mut comb: SparseVec = BTreeMap::new();
        comb.insert(j, field.one());
        loop {
            let lead = v.keys().find(|k| pivots.contains_key(k)).copied();
            let Some(k) = lead else { break };
            let (pv, pc) = &pivots[&k];
            let a = -&(&v[&k] * &pv[&k].inv());
            axpy(&mut v, &a, pv);
            axpy(&mut comb, &a, pc);
        }
        if !v.is_empty() {
            let k = *v.keys().next().unwrap();
            pivots.insert(k, (v, comb));
        }
    }
    let mut t = target.clone();
    let mut x: SparseVec = BTreeMap::new();
    loop {
        let Some(k) = t.keys().next().copied() else { return Some(x) };
        let (pv, pc) = pivots.get(&k)?;
        let a = &t[&k] * &pv[&k].inv();
        axpy(&mut t, &-&a, pv);
        axpy(&mut x, &a, pc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(f: Field, xs: &[i64]) -> SparseVec {
        xs.iter().enumerate().filter(|(_, v)| **v != 0).map(|(i, v)| (i, f.int(*v))).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let f = Field::Rational;
        let mut e = Echelon::new();
        assert!(e.insert(sv(f, &[1, 2, 3])));
        assert!(e.insert(sv(f, &[2, 4, 7])));
        assert!(!e.insert(sv(f, &[3, 6, 10])));
        assert_eq!(e.rank(), 2);
        let cols = vec![sv(f, &[1, 0]), sv(f, &[0, 1]), sv(f, &[1, 1])];
        let k = kernel(f, &cols);
        assert_eq!(k.len(), 1);
        let x = solve(f, &cols, &sv(f, &[2, 3])).unwrap();
        let mut y = SparseVec::new();
        for (j, c) in &x {
            axpy(&mut y, c, &cols[*j]);
        }
        assert_eq!(y, sv(f, &[2, 3]));
    }

    #[test]
    fn char_two_rank_drop() {
        let f = Field::Prime(2);
        let mut e = Echelon::new();
        e.insert(sv(f, &[1, 1]));
        assert!(!e.insert(sv(f, &[1, -1])));
    }
}

//! Exact rational linear algebra: dense matrices, sparse echelon forms,
//! LDLᵀ, rational rounding and four-square decompositions.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::freealg::Scalar;

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Scalar>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMat { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &Scalar) {
        let e = &mut self.data[i * self.cols + j];
        *e += v;
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }
}

pub fn to_f64(q: &Scalar) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale down through the bit lengths
        let n = q.numer().bits() as i64;
        let d = q.denom().bits() as i64;
        let shift = (n.max(d) - 900).max(0) as usize;
        let nn = (q.numer() >> shift).to_f64().unwrap_or(0.0);
        let dd = (q.denom() >> shift).to_f64().unwrap_or(1.0);
        nn / dd
    })
}

/// Sparse row: column → coefficient, no zero entries.
pub type SparseRow = BTreeMap<usize, Scalar>;

/// Row echelon form where each stored row is keyed by its largest column
/// (normalized to coefficient 1 there).
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Eliminates every pivot column from `row`.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut cursor = usize::MAX;
        loop {
            let next = row
                .range(..cursor)
                .rev()
                .find(|(c, _)| self.pivots.contains_key(c))
                .map(|(c, v)| (*c, v.clone()));
            let Some((c, coef)) = next else { break };
            let prow = &self.pivots[&c];
            for (pc, pv) in prow {
                let e = row.entry(*pc).or_insert_with(Scalar::zero);
                *e -= &coef * pv;
                if e.is_zero() {
                    row.remove(pc);
                }
            }
            cursor = c;
        }
        row
    }

    /// Adds a row; returns false when it was dependent on the stored ones.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let row = self.reduce(row);
        let Some((&c, lead)) = row.iter().next_back() else { return false };
        let inv = lead.recip();
        let row: SparseRow = row.into_iter().map(|(k, v)| (k, v * &inv)).collect();
        self.pivots.insert(c, row);
        true
    }

    /// Expresses every pivot column through free columns:
    /// `x_c = Σ coef · x_f` for solutions of the homogeneous system.
    pub fn pivot_expressions(&self) -> BTreeMap<usize, SparseRow> {
        let mut expr: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for (&c, row) in &self.pivots {
            let mut e = SparseRow::new();
            for (&k, a) in row.range(..c) {
                if let Some(sub) = expr.get(&k) {
                    for (f, v) in sub {
                        let t = e.entry(*f).or_insert_with(Scalar::zero);
                        *t -= a * v;
                        if t.is_zero() {
                            e.remove(f);
                        }
                    }
                } else {
                    let t = e.entry(k).or_insert_with(Scalar::zero);
                    *t -= a;
                    if t.is_zero() {
                        e.remove(&k);
                    }
                }
            }
            expr.insert(c, e);
        }
        expr
    }

    /// Basis of the solution space of the homogeneous system over columns `0..ncols`.
    pub fn nullspace(&self, ncols: usize) -> Vec<SparseRow> {
        let expr = self.pivot_expressions();
        let free: Vec<usize> = (0..ncols).filter(|c| !self.pivots.contains_key(c)).collect();
        let mut basis: Vec<SparseRow> = free
            .iter()
            .map(|&f| {
                let mut v = SparseRow::new();
                v.insert(f, Scalar::one());
                v
            })
            .collect();
        let pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        for (c, e) in &expr {
            for (f, v) in e {
                basis[pos[f]].insert(*c, v.clone());
            }
        }
        basis
    }
}

/// Solves `Σ_k x_k · cols[k] = rhs` exactly; columns and rhs are sparse vectors
/// over an arbitrary key space. Returns one solution or `None`.
pub fn solve_sparse<K: Ord + Clone>(
    cols: &[BTreeMap<K, Scalar>],
    rhs: &BTreeMap<K, Scalar>,
) -> Option<Vec<Scalar>> {
    // unknown k lives in column k+1, the right-hand side in column 0
    let mut rows: BTreeMap<K, SparseRow> = BTreeMap::new();
    for (k, col) in cols.iter().enumerate() {
        for (key, v) in col {
            rows.entry(key.clone()).or_default().insert(k + 1, v.clone());
        }
    }
    for (key, v) in rhs {
        rows.entry(key.clone()).or_default().insert(0, -v);
    }
    let mut ech = Echelon::new();
    for (_, r) in rows {
        ech.insert(r);
    }
    if ech.is_pivot(0) {
        return None;
    }
    let expr = ech.pivot_expressions();
    let mut x = vec![Scalar::zero(); cols.len()];
    for (c, e) in expr {
        if c == 0 {
            continue;
        }
        x[c - 1] = e.get(&0).cloned().unwrap_or_else(Scalar::zero);
    }
    Some(x)
}

/// Exact LDLᵀ of a symmetric matrix; `None` unless positive definite.
pub fn ldlt_pd(s: &QMat) -> Option<(QMat, Vec<Scalar>)> {
    let n = s.rows;
    let mut l = QMat::identity(n);
    let mut d: Vec<Scalar> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = s.get(j, j).clone();
        for k in 0..j {
            let lk = l.get(j, k);
            if !lk.is_zero() {
                dj -= lk * lk * &d[k];
            }
        }
        if !dj.is_positive() {
            return None;
        }
        for i in (j + 1)..n {
            let mut v = s.get(i, j).clone();
            for k in 0..j {
                let (a, b) = (l.get(i, k), l.get(j, k));
                if !a.is_zero() && !b.is_zero() {
                    v -= a * b * &d[k];
                }
            }
            l.set(i, j, v / &dj);
        }
        d.push(dj);
    }
    Some((l, d))
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: u64) -> Scalar {
    if !x.is_finite() {
        return Scalar::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (u128, u128, u128, u128) = (0, 1, 1, 0);
    let max_den = max_den as u128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e30 {
            break;
        }
        let ai = a as u128;
        let q2 = ai.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            // best semiconvergent
            let t = (max_den - q0) / q1.max(1);
            let ps = t * p1 + p0;
            let qs = t * q1 + q0;
            let err_s = (x.abs() - ps as f64 / qs as f64).abs();
            let err_c = (x.abs() - p1 as f64 / q1.max(1) as f64).abs();
            if qs > 0 && err_s < err_c {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        let p2 = ai * p1 + p0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Scalar::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

fn is_square(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

fn two_squares(n: &BigUint, budget: &mut usize) -> Option<(BigUint, BigUint)> {
    let mut c = n.sqrt();
    loop {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let c2 = &c * &c;
        let rest = n - &c2;
        if rest > c2 {
            return None;
        }
        if let Some(d) = is_square(&rest) {
            return Some((c, d));
        }
        if c.is_zero() {
            return None;
        }
        c -= 1u32;
    }
}

/// Writes `n` as a sum of four squares (Lagrange); greedy search from the top.
pub fn four_squares(n: &BigUint) -> [BigUint; 4] {
    if n.is_zero() {
        return [BigUint::zero(), BigUint::zero(), BigUint::zero(), BigUint::zero()];
    }
    let mut a = n.sqrt();
    loop {
        let r = n - &a * &a;
        let mut b = r.sqrt();
        for _ in 0..64 {
            let r2 = &r - &b * &b;
            let mut budget = 4096;
            if let Some((c, d)) = two_squares(&r2, &mut budget) {
                return [a, b, c, d];
            }
            if b.is_zero() {
                break;
            }
            b -= 1u32;
        }
        // fall back to a smaller leading square
        a -= 1u32;
    }
}

/// Decomposes a positive rational weight `a/b` into rationals whose squares sum to it.
pub fn rational_as_squares(w: &Scalar) -> Vec<Scalar> {
    assert!(!w.is_negative());
    if w.is_zero() {
        return Vec::new();
    }
    let num = w.numer().to_biguint().expect("positive");
    let den = w.denom().to_biguint().expect("positive");
    let prod = &num * &den;
    let denom = BigInt::from_biguint(Sign::Plus, den);
    if let Some(r) = is_square(&prod) {
        return vec![BigRational::new(BigInt::from_biguint(Sign::Plus, r), denom)];
    }
    four_squares(&prod)
        .into_iter()
        .filter(|s| !s.is_zero())
        .map(|s| BigRational::new(BigInt::from_biguint(Sign::Plus, s), denom.clone()))
        .collect()
}

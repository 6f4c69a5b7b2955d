//! Words, monomials and matrix-valued polynomials over the free *-algebra
//! ℝ⟨x, x*⟩ with exact rational coefficients.
//!
//! Row and column indices are 0-based in code and 1-based in the text syntax.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{to_f64, QMat};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub g: usize,
    pub ell: usize,
    pub nu: usize,
}

impl Signature {
    pub fn new(g: usize, ell: usize, nu: usize) -> Result<Self> {
        if g == 0 || ell == 0 || nu == 0 || 2 * g > u16::MAX as usize {
            return Err(Error::SignatureMismatch(format!("invalid signature g={g} ell={ell} nu={nu}")));
        }
        Ok(Signature { g, ell, nu })
    }

    /// Row vectors ℝ^{1×ℓ}⟨x,x*⟩.
    pub fn vector(g: usize, ell: usize) -> Self {
        Signature { g, ell, nu: 1 }
    }

    /// Square ℓ×ℓ matrices over the same variables.
    pub fn square(&self) -> Self {
        Signature { g: self.g, ell: self.ell, nu: self.ell }
    }

    pub fn scalar(g: usize) -> Self {
        Signature { g, ell: 1, nu: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    /// 1-based variable index.
    pub index: usize,
    pub starred: bool,
}

impl Letter {
    pub fn x(index: usize) -> Self {
        Letter { index, starred: false }
    }

    pub fn xs(index: usize) -> Self {
        Letter { index, starred: true }
    }

    pub fn code(&self, g: usize) -> u16 {
        (self.index - 1 + if self.starred { g } else { 0 }) as u16
    }

    pub fn from_code(code: u16, g: usize) -> Self {
        let c = code as usize;
        if c < g {
            Letter { index: c + 1, starred: false }
        } else {
            Letter { index: c - g + 1, starred: true }
        }
    }
}

#[inline]
pub fn star_code(code: u16, g: usize) -> u16 {
    ((code as usize + g) % (2 * g)) as u16
}

/// Word over the 2g letters; x_i has code i−1 and x_i* has code g+i−1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u16>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(g: usize, letters: &[Letter]) -> Self {
        Word(letters.iter().map(|l| l.code(g)).collect())
    }

    pub fn letters(&self, g: usize) -> Vec<Letter> {
        self.0.iter().map(|&c| Letter::from_code(c, g)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn star(&self, g: usize) -> Word {
        Word(self.0.iter().rev().map(|&c| star_code(c, g)).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn suffix(&self, k: usize) -> Word {
        Word(self.0[self.0.len() - k..].to_vec())
    }

    pub fn has_suffix(&self, s: &Word) -> bool {
        self.0.ends_with(&s.0)
    }

    /// All words of length exactly `d` over 2g letters, in deglex order.
    pub fn all_of_len(g: usize, d: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..d {
            let mut next = Vec::with_capacity(out.len() * 2 * g);
            for w in &out {
                for c in 0..(2 * g) as u16 {
                    let mut v = w.0.clone();
                    v.push(c);
                    next.push(Word(v));
                }
            }
            out = next;
        }
        out
    }

    /// All words of length at most `d`, in deglex order.
    pub fn all_up_to(g: usize, d: usize) -> Vec<Word> {
        (0..=d).flat_map(|k| Word::all_of_len(g, k)).collect()
    }
}

/// E_{row,col} ⊗ word (row is 0 for row vectors).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub row: usize,
    pub col: usize,
    pub word: Word,
}

/// Degree-lexicographic: word length, then letters, then the flattened entry index.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.word
            .cmp(&other.word)
            .then_with(|| self.row.cmp(&other.row))
            .then_with(|| self.col.cmp(&other.col))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    /// e_col ⊗ word.
    pub fn vec(col: usize, word: Word) -> Self {
        Monomial { row: 0, col, word }
    }

    pub fn mat(row: usize, col: usize, word: Word) -> Self {
        Monomial { row, col, word }
    }

    pub fn unit(col: usize) -> Self {
        Monomial::vec(col, Word::empty())
    }

    pub fn degree(&self) -> usize {
        self.word.len()
    }

    pub fn star(&self, g: usize) -> Monomial {
        Monomial { row: self.col, col: self.row, word: self.word.star(g) }
    }

    /// w · m (left action of a word).
    pub fn left_mul(&self, w: &Word) -> Monomial {
        Monomial { row: self.row, col: self.col, word: w.concat(&self.word) }
    }

    /// Product of matrix units: (E_ij⊗u)(E_kl⊗w) = δ_jk E_il⊗uw.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        (self.col == other.row).then(|| Monomial {
            row: self.row,
            col: other.col,
            word: self.word.concat(&other.word),
        })
    }

    /// a* b for two row-vector monomials, an ℓ×ℓ monomial.
    pub fn star_mul(a: &Monomial, b: &Monomial, g: usize) -> Monomial {
        Monomial { row: a.col, col: b.col, word: a.word.star(g).concat(&b.word) }
    }
}

/// Matrix of nc polynomials: Σ coef · E_{row,col} ⊗ word. `VecPoly` is the ν = 1 case.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatPoly {
    pub sig: Signature,
    pub terms: BTreeMap<Monomial, Scalar>,
}

pub type VecPoly = MatPoly;

impl MatPoly {
    pub fn zero(sig: Signature) -> Self {
        MatPoly { sig, terms: BTreeMap::new() }
    }

    pub fn from_terms(sig: Signature, terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = MatPoly::zero(sig);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn monomial(sig: Signature, m: Monomial, c: Scalar) -> Self {
        MatPoly::from_terms(sig, [(m, c)])
    }

    /// The scalar polynomial consisting of one word.
    pub fn word(g: usize, w: Word) -> Self {
        MatPoly::monomial(Signature::scalar(g), Monomial::vec(0, w), Scalar::one())
    }

    pub fn one(sig: Signature) -> Self {
        assert_eq!(sig.nu, sig.ell, "identity needs a square signature");
        MatPoly::from_terms(sig, (0..sig.ell).map(|i| (Monomial::mat(i, i, Word::empty()), Scalar::one())))
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert!(m.row < self.sig.nu && m.col < self.sig.ell);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum word length, −1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|m| m.word.len() as i64).max().unwrap_or(-1)
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Leading term under deglex.
    pub fn lead(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    fn check_same(&self, other: &MatPoly) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch(format!("{:?} vs {:?}", self.sig, other.sig)));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatPoly) -> Result<MatPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatPoly) -> Result<MatPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> MatPoly {
        MatPoly { sig: self.sig, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> MatPoly {
        if c.is_zero() {
            return MatPoly::zero(self.sig);
        }
        MatPoly { sig: self.sig, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Adds `c · other` in place.
    pub fn axpy(&mut self, c: &Scalar, other: &MatPoly) {
        debug_assert_eq!(self.sig, other.sig);
        for (m, v) in &other.terms {
            self.add_term(m.clone(), &(v * c));
        }
    }

    /// Matrix product (ν×ℓ)·(ℓ×ρ).
    pub fn mul(&self, other: &MatPoly) -> Result<MatPoly> {
        if self.sig.g != other.sig.g || self.sig.ell != other.sig.nu {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.sig.nu, self.sig.ell, other.sig.nu, other.sig.ell
            )));
        }
        let sig = Signature { g: self.sig.g, ell: other.sig.ell, nu: self.sig.nu };
        let mut out = MatPoly::zero(sig);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(m) = a.mul(b) {
                    out.add_term(m, &(ca * cb));
                }
            }
        }
        Ok(out)
    }

    /// Left action of a scalar polynomial r ∈ ℝ⟨x,x*⟩ on every entry.
    pub fn left_mul_scalar(&self, r: &MatPoly) -> MatPoly {
        debug_assert!(r.sig.nu == 1 && r.sig.ell == 1);
        let mut out = MatPoly::zero(self.sig);
        for (a, ca) in &r.terms {
            for (b, cb) in &self.terms {
                out.add_term(b.left_mul(&a.word), &(ca * cb));
            }
        }
        out
    }

    /// Right multiplication of every entry by a scalar polynomial.
    pub fn right_mul_scalar(&self, r: &MatPoly) -> MatPoly {
        let mut out = MatPoly::zero(self.sig);
        for (b, cb) in &self.terms {
            for (a, ca) in &r.terms {
                let m = Monomial { row: b.row, col: b.col, word: b.word.concat(&a.word) };
                out.add_term(m, &(ca * cb));
            }
        }
        out
    }

    pub fn left_mul_word(&self, w: &Word) -> MatPoly {
        MatPoly { sig: self.sig, terms: self.terms.iter().map(|(m, c)| (m.left_mul(w), c.clone())).collect() }
    }

    pub fn involute(&self) -> MatPoly {
        let sig = Signature { g: self.sig.g, ell: self.sig.nu, nu: self.sig.ell };
        MatPoly { sig, terms: self.terms.iter().map(|(m, c)| (m.star(self.sig.g), c.clone())).collect() }
    }

    /// a* b for row vectors a, b: an ℓ×ℓ polynomial.
    pub fn star_mul(a: &VecPoly, b: &VecPoly) -> MatPoly {
        let g = a.sig.g;
        let mut out = MatPoly::zero(a.sig.square());
        for (ma, ca) in &a.terms {
            let sa = ma.word.star(g);
            for (mb, cb) in &b.terms {
                let m = Monomial { row: ma.col, col: mb.col, word: sa.concat(&mb.word) };
                out.add_term(m, &(ca * cb));
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> VecPoly {
        let sig = Signature { nu: 1, ..self.sig };
        MatPoly::from_terms(
            sig,
            self.terms
                .iter()
                .filter(|(m, _)| m.row == i)
                .map(|(m, c)| (Monomial::vec(m.col, m.word.clone()), c.clone())),
        )
    }

    pub fn rows(&self) -> Vec<VecPoly> {
        (0..self.sig.nu).map(|i| self.row(i)).collect()
    }

    pub fn from_rows(rows: &[VecPoly]) -> Result<MatPoly> {
        let first = rows.first().ok_or_else(|| Error::DimensionMismatch("no rows".into()))?;
        let sig = Signature { nu: rows.len(), ..first.sig };
        let mut out = MatPoly::zero(sig);
        for (i, r) in rows.iter().enumerate() {
            if r.sig.g != sig.g || r.sig.ell != sig.ell || r.sig.nu != 1 {
                return Err(Error::SignatureMismatch("row signature".into()));
            }
            for (m, c) in &r.terms {
                out.add_term(Monomial::mat(i, m.col, m.word.clone()), c);
            }
        }
        Ok(out)
    }

    /// True iff the polynomial is self-adjoint.
    pub fn is_symmetric(&self) -> bool {
        self.sig.nu == self.sig.ell && self.involute() == *self
    }

    /// Float evaluation with Kronecker semantics: a (νn × ℓn) matrix.
    pub fn evaluate(&self, x: &MatrixTuple) -> Result<DMatrix<f64>> {
        if x.mats.len() != self.sig.g {
            return Err(Error::SignatureMismatch(format!(
                "polynomial has {} variables, tuple has {}",
                self.sig.g,
                x.mats.len()
            )));
        }
        let n = x.n;
        let g = self.sig.g;
        let mut out = DMatrix::zeros(self.sig.nu * n, self.sig.ell * n);
        let mut cache: BTreeMap<&Word, DMatrix<f64>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let w = cache.entry(&m.word).or_insert_with(|| x.word_matrix(&m.word, g));
            let c = to_f64(c);
            let mut block = out.view_mut((m.row * n, m.col * n), (n, n));
            block += w.clone() * c;
        }
        Ok(out)
    }

    /// Exact evaluation at rational matrices; x* is the transpose.
    pub fn evaluate_exact(&self, x: &[QMat]) -> Result<QMat> {
        if x.len() != self.sig.g {
            return Err(Error::SignatureMismatch("variable count".into()));
        }
        let n = x.first().map(|m| m.rows).unwrap_or(1);
        let g = self.sig.g;
        let xt: Vec<QMat> = x.iter().map(QMat::transpose).collect();
        let mut out = QMat::zeros(self.sig.nu * n, self.sig.ell * n);
        for (m, c) in &self.terms {
            let mut w = QMat::identity(n);
            for &code in &m.word.0 {
                let l = Letter::from_code(code, g);
                let xm = if l.starred { &xt[l.index - 1] } else { &x[l.index - 1] };
                w = w.mul(xm);
            }
            for i in 0..n {
                for j in 0..n {
                    let v = w.get(i, j);
                    if !v.is_zero() {
                        out.add_at(m.row * n + i, m.col * n + j, &(v * c));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Tuple of real n×n matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    pub n: usize,
    pub mats: Vec<DMatrix<f64>>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
        if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch("matrices must be square of equal size".into()));
        }
        Ok(MatrixTuple { n, mats })
    }

    pub fn word_matrix(&self, w: &Word, g: usize) -> DMatrix<f64> {
        let mut out = DMatrix::identity(self.n, self.n);
        for &code in &w.0 {
            let l = Letter::from_code(code, g);
            let m = &self.mats[l.index - 1];
            out = if l.starred { out * m.transpose() } else { out * m };
        }
        out
    }
}

impl fmt::Display for MatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_poly(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Letter {
        Letter::x(i)
    }

    #[test]
    fn star_code_is_an_involution() {
        for g in 1..5 {
            for c in 0..(2 * g) as u16 {
                assert_eq!(star_code(star_code(c, g), g), c);
                assert_ne!(star_code(c, g), c);
            }
        }
    }

    #[test]
    fn deglex_column_tiebreak() {
        let w = Word::from_letters(3, &[x(2)]);
        assert!(Monomial::vec(0, w.clone()) < Monomial::vec(1, w));
    }

    #[test]
    fn left_action_prefixes() {
        let sig = Signature::vector(3, 2);
        let p = MatPoly::monomial(sig, Monomial::vec(1, Word::from_letters(3, &[x(2), x(3)])), int(1));
        let r = MatPoly::word(3, Word::from_letters(3, &[x(1)]));
        let q = p.left_mul_scalar(&r);
        let expect = MatPoly::monomial(sig, Monomial::vec(1, Word::from_letters(3, &[x(1), x(2), x(3)])), int(1));
        assert_eq!(q, expect);
    }
}

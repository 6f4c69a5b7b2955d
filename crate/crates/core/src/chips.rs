//! Right chip spaces and the unique factorizations of monomials relative to them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::freealg::{Monomial, Signature, VecPoly, Word};

/// Finite set of row-vector monomials closed under taking right chips (suffixes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChipSpace {
    pub sig: Signature,
    pub monos: BTreeSet<Monomial>,
    /// Columns j with e_j ⊗ 1 ∈ C.
    pub gamma: BTreeSet<usize>,
}

/// All suffix factors m = w·m̄, shortest first (from e_col⊗1 up to m itself).
pub fn right_chips(m: &Monomial) -> Vec<Monomial> {
    (0..=m.word.len()).map(|k| Monomial::mat(m.row, m.col, m.word.suffix(k))).collect()
}

impl ChipSpace {
    pub fn empty(sig: Signature) -> Self {
        ChipSpace { sig, monos: BTreeSet::new(), gamma: BTreeSet::new() }
    }

    /// Smallest chip space containing the given monomials.
    pub fn closure(sig: Signature, monos: impl IntoIterator<Item = Monomial>) -> Self {
        let mut c = ChipSpace::empty(sig);
        for m in monos {
            c.insert_with_chips(&m);
        }
        c
    }

    pub fn insert_with_chips(&mut self, m: &Monomial) {
        for chip in right_chips(m) {
            if chip.word.is_empty() {
                self.gamma.insert(chip.col);
            }
            self.monos.insert(chip);
        }
    }

    /// All row-vector monomials of degree ≤ d.
    pub fn ball(sig: Signature, d: usize) -> Self {
        let monos: BTreeSet<Monomial> = Word::all_up_to(sig.g, d)
            .into_iter()
            .flat_map(|w| (0..sig.ell).map(move |j| Monomial::vec(j, w.clone())))
            .collect();
        ChipSpace { sig, monos, gamma: (0..sig.ell).collect() }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.monos.contains(m)
    }

    /// Monomials in ascending deglex order.
    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.monos.iter()
    }

    pub fn to_vec(&self) -> Vec<Monomial> {
        self.monos.iter().cloned().collect()
    }

    pub fn is_closed(&self) -> bool {
        self.monos.iter().all(|m| right_chips(m).iter().all(|c| self.monos.contains(c)))
            && self.gamma == self.monos.iter().filter(|m| m.word.is_empty()).map(|m| m.col).collect()
    }

    /// Length of the longest suffix of `m` lying in C (None if not even e_col⊗1 is).
    pub fn longest_chip(&self, m: &Monomial) -> Option<usize> {
        if !self.gamma.contains(&m.col) {
            return None;
        }
        let n = m.word.len();
        let mut k = 0;
        while k < n && self.monos.contains(&Monomial::vec(m.col, m.word.suffix(k + 1))) {
            k += 1;
        }
        Some(k)
    }

    /// m ∈ ℝ⟨x,x*⟩C.
    pub fn in_rc(&self, m: &Monomial) -> bool {
        self.gamma.contains(&m.col)
    }

    /// m ∈ ℝ⟨x,x*⟩₁C = C + letters·C.
    pub fn in_c1(&self, m: &Monomial) -> bool {
        match self.longest_chip(m) {
            Some(k) => k + 1 >= m.word.len(),
            None => false,
        }
    }

    /// m ∈ ℝ⟨x,x*⟩₁C ∖ C.
    pub fn in_border(&self, m: &Monomial) -> bool {
        self.in_c1(m) && !self.contains(m)
    }

    /// C₁∖C: every letter times every element of C, minus C.
    pub fn border(&self) -> BTreeSet<Monomial> {
        let mut out = BTreeSet::new();
        for m in &self.monos {
            for c in 0..(2 * self.sig.g) as u16 {
                let lm = m.left_mul(&Word(vec![c]));
                if !self.monos.contains(&lm) {
                    out.insert(lm);
                }
            }
        }
        out
    }
}

/// Span of all proper right chips of all terms of the generators.
pub fn chip_space_from_generators(sig: Signature, gens: &[VecPoly]) -> ChipSpace {
    let mut c = ChipSpace::empty(sig);
    for p in gens {
        for m in p.terms.keys() {
            if !m.word.is_empty() {
                let proper = Monomial::vec(m.col, m.word.suffix(m.word.len() - 1));
                c.insert_with_chips(&proper);
            }
        }
    }
    c
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinFactor {
    /// m = w · chip with chip ∈ C and |w| minimal.
    pub w: Word,
    pub chip: Monomial,
    /// When m ∉ C: m = w' · m̄ with m̄ ∈ ℝ⟨x,x*⟩₁C ∖ C.
    pub border: Option<(Word, Monomial)>,
}

pub fn factor_min_word(m: &Monomial, c: &ChipSpace) -> Result<MinFactor> {
    let k = c
        .longest_chip(m)
        .ok_or_else(|| Error::OutsideSpan(format!("{m:?} not in R<x,x*>C")))?;
    let n = m.word.len();
    let chip = Monomial::vec(m.col, m.word.suffix(k));
    let w = m.word.prefix(n - k);
    let border = (k < n).then(|| (m.word.prefix(n - k - 1), Monomial::vec(m.col, m.word.suffix(k + 1))));
    Ok(MinFactor { w, chip, border })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SquareForm {
    /// m ∈ C*ℝ⟨x,x*⟩₁C.
    InC1C,
    /// m = m̄₁* w m̄₂ with m̄₁, m̄₂ ∈ ℝ⟨x,x*⟩₁C ∖ C.
    Triple { m1: Monomial, w: Word, m2: Monomial },
}

/// Factorization of an ℓ×ℓ monomial E_ij⊗u ∈ C*ℝ⟨x,x*⟩C.
pub fn factor_square_form(m: &Monomial, c: &ChipSpace) -> Result<SquareForm> {
    let g = c.sig.g;
    if m.row >= c.sig.ell || m.col >= c.sig.ell {
        return Err(Error::DimensionMismatch(format!("{m:?} is not an ℓ×ℓ monomial")));
    }
    if !c.gamma.contains(&m.row) || !c.gamma.contains(&m.col) {
        return Err(Error::OutsideSpan(format!("{m:?} not in C*R<x,x*>C")));
    }
    let u = &m.word;
    let n = u.len();
    // longest prefix p with e_row ⊗ p* ∈ C
    let mut a = 0;
    while a < n && c.contains(&Monomial::vec(m.row, u.prefix(a + 1).star(g))) {
        a += 1;
    }
    let b = c.longest_chip(&Monomial::vec(m.col, u.clone())).unwrap_or(0);
    if a + b + 1 >= n {
        return Ok(SquareForm::InC1C);
    }
    Ok(SquareForm::Triple {
        m1: Monomial::vec(m.row, u.prefix(a + 1).star(g)),
        w: Word(u.0[a + 1..n - b - 1].to_vec()),
        m2: Monomial::vec(m.col, u.suffix(b + 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::Letter;

    fn w(g: usize, ls: &[Letter]) -> Word {
        Word::from_letters(g, ls)
    }

    #[test]
    fn chips_of_example() {
        let m = Monomial::vec(1, w(3, &[Letter::x(1), Letter::x(2), Letter::x(3)]));
        let ch = right_chips(&m);
        assert_eq!(ch.len(), 4);
        assert_eq!(ch[1].word, w(3, &[Letter::x(3)]));
        assert_eq!(ch[3], m);
    }

    #[test]
    fn square_form_example() {
        let g = 2;
        let sig = Signature::vector(g, 1);
        let c = ChipSpace::closure(sig, [Monomial::vec(0, w(g, &[Letter::x(2)]))]);
        let u = w(g, &[Letter::xs(2), Letter::xs(1), Letter::x(1), Letter::x(2)]);
        let f = factor_square_form(&Monomial::mat(0, 0, u), &c).unwrap();
        let x1x2 = Monomial::vec(0, w(g, &[Letter::x(1), Letter::x(2)]));
        assert_eq!(f, SquareForm::Triple { m1: x1x2.clone(), w: Word::empty(), m2: x1x2 });
        let u = w(g, &[Letter::xs(2), Letter::x(2)]);
        assert_eq!(factor_square_form(&Monomial::mat(0, 0, u), &c).unwrap(), SquareForm::InC1C);
    }
}

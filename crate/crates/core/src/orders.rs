//! Monomial orders: deglex, C-orders and double C-orders.

use std::cmp::Ordering;

use crate::chips::ChipSpace;
use crate::error::{Error, Result};
use crate::freealg::{MatPoly, Monomial, Scalar, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderKind {
    DegLex,
    COrder(ChipSpace),
    DoubleCOrder(ChipSpace),
}

/// Degree first, then letters (x_1 < … < x_g < x_1* < … < x_g*), then the entry index.
pub fn cmp_deglex(a: &Monomial, b: &Monomial) -> Ordering {
    a.cmp(b)
}

/// Base order on the prefixes compared in C-order clause (3): degree first, then
/// letters read from the right end. For equal-length halves `a = a1 a2` it decides
/// on `a2` before `a1`, which is what makes leads of hermitian squares predictable.
pub fn cmp_prefix(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.0.iter().rev().cmp(b.0.iter().rev()))
}

/// Stratum of a row monomial: 0 in C, 1 in ℝ⟨x,x*⟩C ∖ C, 2 outside.
fn c_stratum(m: &Monomial, c: &ChipSpace) -> u8 {
    if c.contains(m) {
        0
    } else if c.in_rc(m) {
        1
    } else {
        2
    }
}

/// Splits m ∈ ℝ⟨x,x*⟩C ∖ C as w · m̄ with m̄ ∈ ℝ⟨x,x*⟩₁C ∖ C.
fn border_split(m: &Monomial, c: &ChipSpace) -> (Word, Monomial) {
    let k = c.longest_chip(m).expect("monomial in R<x,x*>C");
    let n = m.word.len();
    (m.word.prefix(n - k - 1), Monomial::vec(m.col, m.word.suffix(k + 1)))
}

pub fn cmp_c_order(a: &Monomial, b: &Monomial, c: &ChipSpace) -> Ordering {
    let (sa, sb) = (c_stratum(a, c), c_stratum(b, c));
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa != 1 {
        return cmp_deglex(a, b);
    }
    let (wa, ma) = border_split(a, c);
    let (wb, mb) = border_split(b, c);
    cmp_prefix(&wa, &wb).then_with(|| cmp_deglex(&ma, &mb))
}

enum DoubleKey {
    Base,
    Mid(Monomial, Monomial),
    Outer,
}

fn double_key(m: &Monomial, c: &ChipSpace) -> DoubleKey {
    if !c.gamma.contains(&m.row) || !c.gamma.contains(&m.col) {
        return DoubleKey::Outer;
    }
    let n = m.word.len();
    let b = c.longest_chip(&Monomial::vec(m.col, m.word.clone())).unwrap_or(0);
    if b == n {
        return DoubleKey::Base;
    }
    let a2 = Monomial::vec(m.col, m.word.suffix(b + 1));
    let a1 = Monomial::vec(m.row, m.word.prefix(n - b - 1).star(c.sig.g));
    DoubleKey::Mid(a1, a2)
}

pub fn cmp_double_c_order(a: &Monomial, b: &Monomial, c: &ChipSpace) -> Result<Ordering> {
    let ell = c.sig.ell;
    for m in [a, b] {
        if m.row >= ell || m.col >= ell {
            return Err(Error::DimensionMismatch(format!("{m:?} is not an ℓ×ℓ monomial")));
        }
    }
    Ok(match (double_key(a, c), double_key(b, c)) {
        (DoubleKey::Base, DoubleKey::Base) | (DoubleKey::Outer, DoubleKey::Outer) => cmp_deglex(a, b),
        (DoubleKey::Base, _) => Ordering::Less,
        (_, DoubleKey::Base) => Ordering::Greater,
        (DoubleKey::Mid(..), DoubleKey::Outer) => Ordering::Less,
        (DoubleKey::Outer, DoubleKey::Mid(..)) => Ordering::Greater,
        (DoubleKey::Mid(a1, a2), DoubleKey::Mid(b1, b2)) => {
            cmp_c_order(&a1, &b1, c).then_with(|| cmp_c_order(&a2, &b2, c))
        }
    })
}

pub fn compare(a: &Monomial, b: &Monomial, ord: &OrderKind) -> Result<Ordering> {
    match ord {
        OrderKind::DegLex => Ok(cmp_deglex(a, b)),
        OrderKind::COrder(c) => Ok(cmp_c_order(a, b, c)),
        OrderKind::DoubleCOrder(c) => cmp_double_c_order(a, b, c),
    }
}

pub fn leading_term(p: &MatPoly, ord: &OrderKind) -> Result<(Monomial, Scalar)> {
    let mut best: Option<(&Monomial, &Scalar)> = None;
    for (m, c) in &p.terms {
        best = match best {
            None => Some((m, c)),
            Some((bm, bc)) => {
                if compare(m, bm, ord)? == Ordering::Greater {
                    Some((m, c))
                } else {
                    Some((bm, bc))
                }
            }
        };
    }
    best.map(|(m, c)| (m.clone(), c.clone())).ok_or(Error::ZeroPolynomial)
}

//! Reduced left Gröbner bases of left submodules of ℝ^{1×ℓ}⟨x,x*⟩ under deglex.
//!
//! For one-sided modules the leading monomials only interact through right
//! division (a monomial is a multiple of lead(g) iff lead(g) is a suffix in the
//! same column), so interreduction already yields the reduced basis.

use num_traits::One;

use crate::error::{Error, Result};
use crate::freealg::{Monomial, Scalar, Signature, VecPoly};
use crate::orders::OrderKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub sig: Signature,
    pub order: OrderKind,
    /// Monic elements sorted by ascending leading monomial.
    pub elems: Vec<VecPoly>,
    pub reduced: bool,
}

/// Right division: t = w · lead with lead a suffix of t in the same column.
pub fn right_divides(lead: &Monomial, t: &Monomial) -> bool {
    lead.col == t.col && t.word.has_suffix(&lead.word)
}

fn reduce_by(p: &VecPoly, basis: &[VecPoly]) -> VecPoly {
    let mut p = p.clone();
    let mut cursor: Option<Monomial> = None;
    loop {
        // largest term below the cursor that is divisible by some lead
        let found = {
            let iter: Box<dyn Iterator<Item = (&Monomial, &Scalar)>> = match &cursor {
                None => Box::new(p.terms.iter().rev()),
                Some(c) => Box::new(p.terms.range(..=c.clone()).rev()),
            };
            let mut hit = None;
            for (t, coef) in iter {
                if let Some(g) = basis.iter().find(|g| right_divides(g.lead().unwrap().0, t)) {
                    hit = Some((t.clone(), coef.clone(), g));
                    break;
                }
            }
            hit
        };
        let Some((t, coef, g)) = found else { break };
        let (lm, lc) = g.lead().unwrap();
        let w = t.word.prefix(t.word.len() - lm.word.len());
        let factor = -(coef / lc);
        for (m, c) in &g.terms {
            p.add_term(m.left_mul(&w), &(c * &factor));
        }
        cursor = Some(t);
    }
    p
}

/// Normal form: no remaining term is right-divisible by a leading monomial of G.
pub fn reduce(p: &VecPoly, g: &GroebnerBasis) -> Result<VecPoly> {
    if p.sig.g != g.sig.g || p.sig.ell != g.sig.ell {
        return Err(Error::SignatureMismatch("polynomial vs basis".into()));
    }
    Ok(reduce_by(p, &g.elems))
}

fn monic(p: VecPoly) -> VecPoly {
    let c = p.lead().unwrap().1.clone();
    if c.is_one() {
        p
    } else {
        p.scale(&c.recip())
    }
}

/// Reduced left Gröbner basis of the module generated by `gens`.
pub fn reduced_lgb(sig: Signature, gens: &[VecPoly]) -> Result<GroebnerBasis> {
    for p in gens {
        if p.sig.g != sig.g || p.sig.ell != sig.ell || p.sig.nu != 1 {
            return Err(Error::SignatureMismatch(format!("generator {p} does not match {sig:?}")));
        }
    }
    let mut elems: Vec<VecPoly> = gens.iter().filter(|p| !p.is_zero()).cloned().map(monic).collect();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < elems.len() {
            let others: Vec<VecPoly> =
                elems.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, p)| p.clone()).collect();
            let r = reduce_by(&elems[i], &others);
            if r != elems[i] {
                changed = true;
                if r.is_zero() {
                    elems.remove(i);
                    continue;
                }
                elems[i] = monic(r);
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    elems.sort_by(|a, b| a.lead().unwrap().0.cmp(b.lead().unwrap().0));
    Ok(GroebnerBasis { sig, order: OrderKind::DegLex, elems, reduced: true })
}

/// Module membership via the normal form.
pub fn contains(p: &VecPoly, g: &GroebnerBasis) -> Result<bool> {
    Ok(reduce(p, g)?.is_zero())
}

impl GroebnerBasis {
    pub fn empty(sig: Signature) -> Self {
        GroebnerBasis { sig, order: OrderKind::DegLex, elems: Vec::new(), reduced: true }
    }

    pub fn leads(&self) -> Vec<Monomial> {
        self.elems.iter().map(|p| p.lead().unwrap().0.clone()).collect()
    }

    /// True iff no leading monomial right-divides `m`.
    pub fn is_nonlead(&self, m: &Monomial) -> bool {
        !self.elems.iter().any(|g| right_divides(g.lead().unwrap().0, m))
    }

    pub fn degree(&self) -> i64 {
        self.elems.iter().map(VecPoly::degree).max().unwrap_or(-1)
    }

    /// Every element has degree 0.
    pub fn all_constant(&self) -> bool {
        self.elems.iter().all(|p| p.degree() <= 0)
    }

    pub fn normal_form(&self, p: &VecPoly) -> VecPoly {
        reduce_by(p, &self.elems)
    }

    pub fn contains(&self, p: &VecPoly) -> bool {
        self.normal_form(p).is_zero()
    }

    /// The module is all of ℝ^{1×ℓ}⟨x,x*⟩.
    pub fn is_everything(&self) -> bool {
        (0..self.sig.ell).all(|j| self.leads().iter().any(|m| m.col == j && m.word.is_empty()))
    }
}

//! Random polynomials and matrix tuples shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use ncrr_core::freealg::{int, Monomial, MatrixTuple, Scalar, Signature, VecPoly, Word};
use ncrr_core::groebner::GroebnerBasis;
use num_traits::Zero;
use rand::Rng;

pub fn rand_word<R: Rng>(rng: &mut R, g: usize, len: usize) -> Word {
    Word((0..len).map(|_| rng.random_range(0..2 * g) as u16).collect())
}

/// Word of random length in 0..=max_len.
pub fn rand_word_upto<R: Rng>(rng: &mut R, g: usize, max_len: usize) -> Word {
    let len = rng.random_range(0..=max_len);
    rand_word(rng, g, len)
}

pub fn rand_mono<R: Rng>(rng: &mut R, sig: Signature, max_len: usize) -> Monomial {
    let col = rng.random_range(0..sig.ell);
    Monomial::vec(col, rand_word_upto(rng, sig.g, max_len))
}

pub fn rand_coeff<R: Rng>(rng: &mut R, cmax: i64) -> Scalar {
    loop {
        let c = rng.random_range(-cmax..=cmax);
        if c != 0 {
            return int(c);
        }
    }
}

/// Row polynomial with up to `nterms` terms of degree ≤ `max_deg`.
pub fn rand_poly<R: Rng>(rng: &mut R, sig: Signature, max_deg: usize, nterms: usize, cmax: i64) -> VecPoly {
    let mut p = VecPoly::zero(sig);
    for _ in 0..nterms {
        let d = rng.random_range(0..=max_deg);
        let m = Monomial::vec(rng.random_range(0..sig.ell), rand_word(rng, sig.g, d));
        p.add_term(m, &rand_coeff(rng, cmax));
    }
    p
}

pub fn rand_nonzero_poly<R: Rng>(rng: &mut R, sig: Signature, max_deg: usize, nterms: usize, cmax: i64) -> VecPoly {
    loop {
        let p = rand_poly(rng, sig, max_deg, nterms, cmax);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Same as `rand_poly` but with the top degree always present.
pub fn rand_poly_of_degree<R: Rng>(rng: &mut R, sig: Signature, deg: usize, nterms: usize, cmax: i64) -> VecPoly {
    let mut p = rand_poly(rng, sig, deg, nterms.saturating_sub(1), cmax);
    let m = Monomial::vec(rng.random_range(0..sig.ell), rand_word(rng, sig.g, deg));
    p.add_term(m, &rand_coeff(rng, cmax));
    if p.degree() < deg as i64 {
        return rand_poly_of_degree(rng, sig, deg, nterms, cmax);
    }
    p
}

pub fn rand_tuple<R: Rng>(rng: &mut R, g: usize, n: usize) -> MatrixTuple {
    MatrixTuple::new((0..g).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect()).unwrap()
}

/// Generator sets with g ≤ 2, ℓ ≤ 2, degree ≤ 2 and coefficients in {−2, …, 2}.
pub fn radical_corpus<R: Rng>(rng: &mut R, count: usize) -> Vec<(Signature, Vec<VecPoly>)> {
    (0..count)
        .map(|i| {
            let g = 1 + i % 2;
            let ell = 1 + (i / 2) % 2;
            let sig = Signature::vector(g, ell);
            let k = rng.random_range(1..=2);
            let gens = (0..k)
                .map(|_| {
                    let d = rng.random_range(1..=2);
                    let nt = rng.random_range(1..=3);
                    rand_poly_of_degree(rng, sig, d, nt, 2)
                })
                .collect();
            (sig, gens)
        })
        .collect()
}

/// Rank of a family of sparse rows, by exact Gauss–Jordan elimination.
pub fn exact_rank(rows: Vec<BTreeMap<Monomial, Scalar>>) -> usize {
    let mut pivots: Vec<(Monomial, BTreeMap<Monomial, Scalar>)> = Vec::new();
    for mut r in rows {
        for (pm, prow) in &pivots {
            if let Some(c) = r.get(pm).cloned() {
                for (m, v) in prow {
                    let e = r.entry(m.clone()).or_insert_with(Scalar::zero);
                    *e -= &c * v;
                }
                r.retain(|_, v| !v.is_zero());
            }
        }
        if let Some((m, c)) = r.iter().next().map(|(m, c)| (m.clone(), c.clone())) {
            let norm: BTreeMap<Monomial, Scalar> = r.into_iter().map(|(k, v)| (k, v / &c)).collect();
            for (_, prow) in pivots.iter_mut() {
                if let Some(f) = prow.get(&m).cloned() {
                    for (k, v) in &norm {
                        let e = prow.entry(k.clone()).or_insert_with(Scalar::zero);
                        *e -= &f * v;
                    }
                    prow.retain(|_, v| !v.is_zero());
                }
            }
            pivots.push((m, norm));
        }
    }
    pivots.len()
}

/// dim(I ∩ C) for the degree-d ball C: span of w·b over basis elements b with |w| + deg b ≤ d.
pub fn ideal_in_ball(gb: &GroebnerBasis, d: usize) -> usize {
    let mut rows = Vec::new();
    for b in &gb.elems {
        let db = b.degree().max(0) as usize;
        if db > d {
            continue;
        }
        for w in Word::all_up_to(gb.sig.g, d - db) {
            rows.push(b.left_mul_word(&w).terms.clone());
        }
    }
    exact_rank(rows)
}

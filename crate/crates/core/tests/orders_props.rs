mod common;

use std::cmp::Ordering;

use ncrr_core::chips::ChipSpace;
use ncrr_core::freealg::{MatPoly, Monomial, Signature, Word};
use ncrr_core::orders::{cmp_c_order, cmp_deglex, cmp_prefix, leading_term, OrderKind};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{rand_coeff, rand_mono, rand_word_upto};

fn all_monos(sig: Signature, d: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for w in Word::all_up_to(sig.g, d) {
        for j in 0..sig.ell {
            out.push(Monomial::vec(j, w.clone()));
        }
    }
    out
}

fn rand_chips<R: Rng>(rng: &mut R, sig: Signature) -> ChipSpace {
    let k = rng.random_range(1..=3);
    let gens: Vec<Monomial> = (0..k).map(|_| rand_mono(rng, sig, 2)).collect();
    ChipSpace::closure(sig, gens)
}

#[test]
fn deglex_is_a_well_order_on_balls() {
    let sig = Signature::vector(2, 2);
    let mut ms = all_monos(sig, 3);
    ms.sort_by(cmp_deglex);
    for w in ms.windows(2) {
        assert_eq!(cmp_deglex(&w[0], &w[1]), Ordering::Less);
        assert!(w[0].degree() <= w[1].degree());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn deglex_is_left_admissible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = 2;
        let sig = Signature::vector(g, 2);
        let a = rand_mono(&mut rng, sig, 3);
        let b = rand_mono(&mut rng, sig, 3);
        let w = rand_word_upto(&mut rng, g, 2);
        prop_assert_eq!(cmp_deglex(&a, &b), cmp_deglex(&a.left_mul(&w), &b.left_mul(&w)));
    }

    /// C precedes ℝ⟨x,x*⟩C ∖ C, which precedes everything else.
    #[test]
    fn c_order_strata(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 2);
        let c = rand_chips(&mut rng, sig);
        let ms = all_monos(sig, 3);
        let stratum = |m: &Monomial| if c.contains(m) { 0 } else if c.in_rc(m) { 1 } else { 2 };
        for a in &ms {
            for b in &ms {
                let (sa, sb) = (stratum(a), stratum(b));
                if sa < sb {
                    prop_assert_eq!(cmp_c_order(a, b, &c), Ordering::Less);
                }
                // total and antisymmetric
                prop_assert_eq!(cmp_c_order(a, b, &c), cmp_c_order(b, a, &c).reverse());
                prop_assert_eq!(cmp_c_order(a, b, &c) == Ordering::Equal, a == b);
            }
        }
    }

    /// For q ∈ ℝ⟨x,x*⟩₁C ∖ C and a scalar polynomial p, lead(pq) = lead(p) lead(q).
    #[test]
    fn lead_of_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 2);
        let c = rand_chips(&mut rng, sig);
        let border: Vec<Monomial> = all_monos(sig, 3).into_iter().filter(|m| c.in_border(m)).collect();
        prop_assume!(!border.is_empty());
        let inside = c.to_vec();
        let mut q = MatPoly::zero(sig);
        q.add_term(border[rng.random_range(0..border.len())].clone(), &rand_coeff(&mut rng, 3));
        for _ in 0..2 {
            q.add_term(border[rng.random_range(0..border.len())].clone(), &rand_coeff(&mut rng, 3));
            q.add_term(inside[rng.random_range(0..inside.len())].clone(), &rand_coeff(&mut rng, 3));
        }
        prop_assume!(q.terms.keys().any(|m| c.in_border(m)));
        let p: Vec<(Word, BigRational)> = (0..3)
            .map(|_| (rand_word_upto(&mut rng, sig.g, 2), rand_coeff(&mut rng, 3)))
            .filter(|(_, a)| *a != BigRational::from_integer(0.into()))
            .collect();
        prop_assume!(!p.is_empty());
        let mut pq = MatPoly::zero(sig);
        for (w, a) in &p {
            for (m, b) in &q.terms {
                pq.add_term(m.left_mul(w), &(a * b));
            }
        }
        // p has distinct words only if the sampled ones do not collide
        let lp = p.iter().map(|(w, _)| w).max_by(|a, b| cmp_prefix(a, b)).unwrap();
        prop_assume!(p.iter().filter(|(w, _)| w == lp).count() == 1);
        let (lq, _) = leading_term(&q, &OrderKind::COrder(c.clone())).unwrap();
        let (lpq, _) = leading_term(&pq, &OrderKind::COrder(c.clone())).unwrap();
        prop_assert_eq!(lpq, lq.left_mul(lp));
    }

    /// When the outside-C terms of p of maximal prefix length share one prefix, the
    /// double-C lead of p*p is lead(p)*lead(p) with a positive coefficient.
    #[test]
    fn lead_of_square(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 2);
        let c = rand_chips(&mut rng, sig);
        let border: Vec<Monomial> = all_monos(sig, 3).into_iter().filter(|m| c.in_border(m)).collect();
        prop_assume!(!border.is_empty());
        let top = rand_word_upto(&mut rng, sig.g, 2);
        let mut p = MatPoly::zero(sig);
        for _ in 0..rng.random_range(1..=3) {
            let m = &border[rng.random_range(0..border.len())];
            p.add_term(m.left_mul(&top), &rand_coeff(&mut rng, 3));
        }
        for _ in 0..3 {
            let m = &border[rng.random_range(0..border.len())];
            let w = rand_word_upto(&mut rng, sig.g, top.len().saturating_sub(1));
            if w.len() < top.len() {
                p.add_term(m.left_mul(&w), &rand_coeff(&mut rng, 3));
            }
        }
        let inside = c.to_vec();
        p.add_term(inside[rng.random_range(0..inside.len())].clone(), &rand_coeff(&mut rng, 3));
        prop_assume!(p.terms.keys().any(|m| !c.contains(m)));
        let (lm, _) = leading_term(&p, &OrderKind::COrder(c.clone())).unwrap();
        let sq = MatPoly::star_mul(&p, &p);
        let (sm, sc) = leading_term(&sq, &OrderKind::DoubleCOrder(c.clone())).unwrap();
        prop_assert_eq!(sm, Monomial::star_mul(&lm, &lm, sig.g));
        prop_assert!(sc > BigRational::from_integer(0.into()));
    }

    /// In general the double-C lead of p*p is star(lead p)·v, where v maximizes
    /// (star of its prefix, then its border part) among the terms of maximal prefix length.
    #[test]
    fn lead_of_square_general(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 1);
        let c = rand_chips(&mut rng, sig);
        let rc: Vec<Monomial> = all_monos(sig, 3).into_iter().filter(|m| c.in_rc(m)).collect();
        let outside: Vec<&Monomial> = rc.iter().filter(|m| !c.contains(m)).collect();
        prop_assume!(!outside.is_empty());
        let mut p = MatPoly::zero(sig);
        p.add_term(outside[rng.random_range(0..outside.len())].clone(), &rand_coeff(&mut rng, 3));
        for _ in 0..3 {
            p.add_term(rc[rng.random_range(0..rc.len())].clone(), &rand_coeff(&mut rng, 3));
        }
        prop_assume!(p.terms.keys().any(|m| !c.contains(m)));
        // (prefix, border part) of every outside-C term
        let split = |m: &Monomial| {
            let k = c.longest_chip(m).unwrap();
            let n = m.word.len();
            (m.word.prefix(n - k - 1), Monomial::vec(m.col, m.word.suffix(k + 1)))
        };
        let outer: Vec<&Monomial> = p.terms.keys().filter(|m| !c.contains(m)).collect();
        let d = outer.iter().map(|m| split(m).0.len()).max().unwrap();
        let v = outer
            .iter()
            .filter(|m| split(m).0.len() == d)
            .max_by(|a, b| {
                let ((wa, ma), (wb, mb)) = (split(a), split(b));
                cmp_prefix(&wa.star(sig.g), &wb.star(sig.g)).then_with(|| cmp_c_order(&ma, &mb, &c))
            })
            .unwrap();
        let (lm, lc) = leading_term(&p, &OrderKind::COrder(c.clone())).unwrap();
        let sq = MatPoly::star_mul(&p, &p);
        let (sm, sc) = leading_term(&sq, &OrderKind::DoubleCOrder(c.clone())).unwrap();
        prop_assert_eq!(&sm, &Monomial::star_mul(&lm, v, sig.g));
        prop_assert_eq!(sc, lc * p.coeff(v));
    }
}

/// Neither deglex nor any other letter order commutes with the involution, so the
/// diagonal term need not lead: with C = {1}, p = x x + x* x leads with x* x x x.
#[test]
fn square_lead_can_be_off_diagonal() {
    let sig = Signature::vector(1, 1);
    let c = ChipSpace::closure(sig, [Monomial::vec(0, Word::empty())]);
    let mono = |w: &[u16]| Monomial::vec(0, Word(w.to_vec()));
    let mut p = MatPoly::zero(sig);
    p.add_term(mono(&[0, 0]), &BigRational::from_integer(1.into()));
    p.add_term(mono(&[1, 0]), &BigRational::from_integer(1.into()));
    let (lm, _) = leading_term(&p, &OrderKind::COrder(c.clone())).unwrap();
    assert_eq!(lm, mono(&[1, 0]));
    let (sm, _) = leading_term(&MatPoly::star_mul(&p, &p), &OrderKind::DoubleCOrder(c)).unwrap();
    assert_eq!(sm, mono(&[1, 0, 0, 0]));
}

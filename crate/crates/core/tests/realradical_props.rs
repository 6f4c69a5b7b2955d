mod common;

use ncrr_core::freealg::{Monomial, Signature, VecPoly};
use ncrr_core::groebner::{reduced_lgb, GroebnerBasis};
use ncrr_core::realradical::{is_real, real_radical, RealRadicalResult};
use ncrr_core::witness::numeric_zero_oracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{ideal_in_ball, rand_coeff, rand_poly, rand_poly_of_degree};

/// g ≤ 2, ℓ ≤ 2, degree ≤ 2; most sets carry a hermitian square so the loop has work to do.
fn rand_gens<R: Rng>(rng: &mut R) -> (Signature, Vec<VecPoly>) {
    let sig = Signature::vector(rng.random_range(1..=2), rng.random_range(1..=2));
    let k = rng.random_range(1..=2);
    let mut gens: Vec<VecPoly> = (0..k)
        .map(|_| {
            let d = rng.random_range(1..=2);
            let nt = rng.random_range(1..=3);
            rand_poly_of_degree(rng, sig, d, nt, 2)
        })
        .collect();
    if rng.random_bool(0.7) {
        // e_j q*q for a scalar q, optionally perturbed
        let scalar = Signature::vector(sig.g, 1);
        let q = rand_poly_of_degree(rng, scalar, 1, 2, 2);
        let j = rng.random_range(0..sig.ell);
        let mut s = VecPoly::zero(sig);
        for (m, c) in &VecPoly::star_mul(&q, &q).terms {
            s.add_term(Monomial::vec(j, m.word.clone()), c);
        }
        if rng.random_bool(0.3) {
            s.axpy(&rand_coeff(rng, 2), &rand_poly(rng, sig, 1, 2, 2));
        }
        if !s.is_zero() {
            gens[0] = s;
        }
    }
    (sig, gens)
}

/// The bases visited by the loop, rebuilt from the recorded certificates.
fn replay(sig: Signature, gens: &[VecPoly], rr: &RealRadicalResult) -> Vec<GroebnerBasis> {
    let mut out = vec![reduced_lgb(sig, gens).unwrap()];
    for cert in &rr.certificates {
        let mut next = out.last().unwrap().elems.clone();
        next.extend(cert.iter().cloned());
        out.push(reduced_lgb(sig, &next).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fixpoint_properties(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sig, gens) = rand_gens(&mut rng);
        let rr = real_radical(sig, &gens).unwrap();
        // monotone
        for s in &gens {
            prop_assert!(rr.basis.contains(s));
        }
        // real
        prop_assert!(is_real(sig, &rr.basis.elems).unwrap());
        // idempotent
        let again = real_radical(sig, &rr.basis.elems).unwrap();
        prop_assert_eq!(&again.basis, &rr.basis);
        prop_assert_eq!(again.iterations, 1);
        prop_assert!(again.certificates.is_empty());
        // degree bound
        let d = gens.iter().map(VecPoly::degree).max().unwrap();
        prop_assert!(rr.degree_watermark < 2 * d.max(1));
        prop_assert!(rr.basis.degree() <= rr.degree_watermark);
    }

    /// Each productive round strictly enlarges the module inside the degree ball of the watermark.
    #[test]
    fn strict_growth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sig, gens) = rand_gens(&mut rng);
        let rr = real_radical(sig, &gens).unwrap();
        let bases = replay(sig, &gens, &rr);
        prop_assert_eq!(bases.last().unwrap(), &rr.basis);
        let top = rr.degree_watermark.max(0) as usize;
        for w in bases.windows(2) {
            let before: Vec<usize> = (0..=top).map(|d| ideal_in_ball(&w[0], d)).collect();
            let after: Vec<usize> = (0..=top).map(|d| ideal_in_ball(&w[1], d)).collect();
            prop_assert!(before.iter().zip(&after).all(|(a, b)| a <= b));
            prop_assert!(before != after);
        }
    }

    /// No certificate polynomial is refuted on numerically found points of V(S).
    #[test]
    fn certificates_vanish_on_the_zero_set(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sig, gens) = rand_gens(&mut rng);
        let rr = real_radical(sig, &gens).unwrap();
        for phi in rr.certificates.iter().flatten() {
            let verdict = numeric_zero_oracle(&gens, phi, &[1, 2], 6, &mut rng).unwrap();
            prop_assert!(!verdict.is_refuted(), "{} refuted for {:?}", phi, gens.iter().map(|g| g.to_string()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn hermitian_squares_collapse() {
    let sig = Signature::vector(2, 1);
    let p = |s: &str| ncrr_core::syntax::parse_poly(s, 2, 1).unwrap();
    let rr = real_radical(sig, &[p("x1* x1 + x2* x2")]).unwrap();
    assert_eq!(rr.basis.elems, vec![p("x1"), p("x2")]);
    assert_eq!(rr.certificates.len(), 1);
    let rr = real_radical(sig, &[p("x1 x1*")]).unwrap();
    assert_eq!(rr.basis.elems, vec![p("x1*")]);
}

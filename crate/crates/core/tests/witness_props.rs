mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use ncrr_core::chips::ChipSpace;
use ncrr_core::freealg::{Monomial, Signature, VecPoly, Word};
use ncrr_core::groebner::GroebnerBasis;
use ncrr_core::realradical::real_radical;
use ncrr_core::witness::{flat_extension, gns_witness, separating_functional, WitnessChips, TAU_SEP, TAU_WIT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{ideal_in_ball, rand_poly_of_degree};

/// A real module (the real radical of a random set) that is not everything.
fn rand_real_module<R: Rng>(rng: &mut R) -> Option<GroebnerBasis> {
    let sig = Signature::vector(rng.random_range(1..=2), rng.random_range(1..=2));
    let k = rng.random_range(1..=2);
    let gens: Vec<VecPoly> = (0..k)
        .map(|_| {
            let d = rng.random_range(1..=2);
            rand_poly_of_degree(rng, sig, d, 2, 2)
        })
        .collect();
    let gb = real_radical(sig, &gens).ok()?.basis;
    (!gb.is_everything()).then_some(gb)
}

fn letter(code: usize) -> Word {
    Word(vec![code as u16])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// X_k[m] = [x_k m] and X_kᵀ[m] = [x_k* m] on the chip space, v_j = [e_j], and the
    /// quotient inner product reproduces the functional.
    #[test]
    fn gns_representation_laws(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(gb) = rand_real_module(&mut rng) else { return Ok(()) };
        let sig = gb.sig;
        let q = rand_poly_of_degree(&mut rng, sig, 1, 2, 2);
        prop_assume!(!gb.contains(&q));
        let chips = if sig.g == 1 && rng.random_bool(0.5) { WitnessChips::Ball } else { WitnessChips::Minimal };
        let w = gns_witness(&gb, std::slice::from_ref(&q), chips).unwrap();
        let g = sig.g;
        let n = w.n;
        for j in 0..sig.ell {
            let vj = w.v.rows(j * n, n).into_owned();
            prop_assert!((vj - w.class_of(&gb, &Monomial::unit(j)).unwrap()).norm() <= 1e-10);
        }
        for m in w.chips.iter() {
            let cm = w.class_of(&gb, m).unwrap();
            for k in 0..g {
                let xk = &w.x.mats[k];
                let scale = 1.0 + xk.norm() * cm.norm();
                let up = m.left_mul(&letter(k));
                if w.chips.contains(&up) {
                    let err = (xk * &cm - w.class_of(&gb, &up).unwrap()).norm();
                    prop_assert!(err <= 1e-10 * scale, "X_{} law fails at {:?}: {:e}", k + 1, m, err);
                }
                let up = m.left_mul(&letter(k + g));
                if w.chips.contains(&up) {
                    let err = (xk.transpose() * &cm - w.class_of(&gb, &up).unwrap()).norm();
                    prop_assert!(err <= 1e-10 * scale, "X_{}ᵀ law fails at {:?}: {:e}", k + 1, m, err);
                }
            }
            for b in w.chips.iter() {
                let Some(l) = w.functional.get(&Monomial::star_mul(b, m, g)) else { continue };
                let ip = cm.dot(&w.class_of(&gb, b).unwrap());
                prop_assert!((ip - l).abs() <= 1e-8 * (1.0 + l.abs()));
            }
        }
        let vnorm = w.v.norm();
        for p in &gb.elems {
            prop_assert!(w.residual(p).unwrap() <= TAU_WIT * (1.0 + vnorm));
        }
        prop_assert!(w.residual(&q).unwrap() >= TAU_SEP);
    }

    /// On every degree layer of the ball, the null space of the extended functional has the
    /// dimension of the module there, and T makes up the rest.
    #[test]
    fn flat_extension_is_flat(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(gb) = rand_real_module(&mut rng) else { return Ok(()) };
        let sig = gb.sig;
        let d = gb.degree().max(1) as usize;
        prop_assume!(sig.g == 1 || d == 1);
        let c = ChipSpace::ball(sig, d);
        let l = separating_functional(&gb, &c).unwrap();
        let ext = flat_extension(&l, &gb, &c).unwrap();
        for layer in 0..=d {
            let monos: Vec<&Monomial> = c.iter().filter(|m| m.degree() <= layer).collect();
            let h = DMatrix::from_fn(monos.len(), monos.len(), |i, j| ext.value(monos[i], monos[j]).unwrap());
            let eig = SymmetricEigen::new(h).eigenvalues;
            let top = eig.amax().max(1.0);
            let null = eig.iter().filter(|e| e.abs() <= 1e-8 * top).count();
            let t = monos.iter().filter(|m| gb.is_nonlead(m)).count();
            prop_assert_eq!(null + t, monos.len());
            prop_assert_eq!(null, ideal_in_ball(&gb, layer));
        }
    }
}

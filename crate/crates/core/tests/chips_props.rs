mod common;

use ncrr_core::chips::{chip_space_from_generators, factor_min_word, right_chips, ChipSpace};
use ncrr_core::freealg::{Monomial, Signature, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{rand_mono, rand_poly, rand_word, rand_word_upto};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn constructed_spaces_are_closed(seed in any::<u64>(), g in 1usize..=2, ell in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(g, ell);
        let gens: Vec<_> = (0..3).map(|_| rand_poly(&mut rng, sig, 3, 3, 2)).collect();
        let c = chip_space_from_generators(sig, &gens);
        prop_assert!(c.is_closed());
        for m in c.iter() {
            for ch in right_chips(m) {
                prop_assert!(c.contains(&ch));
            }
        }
        prop_assert!(ChipSpace::ball(sig, 2).is_closed());
    }

    /// ℝ⟨x,x*⟩C consists exactly of the monomials whose column lies in Γ(C).
    #[test]
    fn gamma_characterizes_rc(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 3);
        let k = rng.random_range(1..=3);
        let gens: Vec<Monomial> = (0..k).map(|_| rand_mono(&mut rng, sig, 2)).collect();
        let c = ChipSpace::closure(sig, gens);
        for w in Word::all_up_to(2, 3) {
            for j in 0..3 {
                let m = Monomial::vec(j, w.clone());
                prop_assert_eq!(c.in_rc(&m), c.gamma.contains(&j));
            }
        }
    }

    /// m = w · chip with the chip the longest suffix of m lying in C.
    #[test]
    fn min_word_factorization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::vector(2, 1);
        let c = ChipSpace::closure(sig, [Monomial::vec(0, rand_word(&mut rng, 2, 2))]);
        let m = Monomial::vec(0, rand_word_upto(&mut rng, 2, 4));
        let f = factor_min_word(&m, &c).unwrap();
        prop_assert!(c.contains(&f.chip));
        prop_assert_eq!(f.chip.left_mul(&f.w), m.clone());
        // minimality: the next longer suffix is outside C
        if !f.w.is_empty() {
            let k = f.chip.word.len() + 1;
            prop_assert!(!c.contains(&Monomial::vec(0, m.word.suffix(k))));
        }
    }
}

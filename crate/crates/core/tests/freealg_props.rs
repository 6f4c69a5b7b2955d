mod common;

use nalgebra::DMatrix;
use ncrr_core::freealg::{MatPoly, Signature};
use ncrr_core::syntax::{parse_poly, print_poly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{rand_nonzero_poly, rand_poly, rand_tuple};

fn scalar_polys(seed: u64, g: usize, k: usize) -> Vec<MatPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rand_poly(&mut rng, Signature::scalar(g), 4, 4, 3)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(seed in any::<u64>(), g in 1usize..=3) {
        let v = scalar_polys(seed, g, 3);
        let (p, q, r) = (&v[0], &v[1], &v[2]);
        prop_assert_eq!(p.mul(q).unwrap().mul(r).unwrap(), p.mul(&q.mul(r).unwrap()).unwrap());
        prop_assert_eq!(p.mul(&q.add(r).unwrap()).unwrap(), p.mul(q).unwrap().add(&p.mul(r).unwrap()).unwrap());
        prop_assert_eq!(q.add(r).unwrap().mul(p).unwrap(), q.mul(p).unwrap().add(&r.mul(p).unwrap()).unwrap());
    }

    #[test]
    fn involution(seed in any::<u64>(), g in 1usize..=3) {
        let v = scalar_polys(seed, g, 2);
        let (p, q) = (&v[0], &v[1]);
        prop_assert_eq!(p.mul(q).unwrap().involute(), q.involute().mul(&p.involute()).unwrap());
        prop_assert_eq!(p.involute().involute(), p.clone());
    }

    #[test]
    fn degree_is_additive(seed in any::<u64>(), g in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rand_nonzero_poly(&mut rng, Signature::scalar(g), 3, 3, 3);
        let q = rand_nonzero_poly(&mut rng, Signature::scalar(g), 3, 3, 3);
        prop_assert_eq!(p.mul(&q).unwrap().degree(), p.degree() + q.degree());
    }

    #[test]
    fn evaluation_is_a_star_homomorphism(seed in any::<u64>(), g in 1usize..=2, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rand_poly(&mut rng, Signature::scalar(g), 3, 4, 3);
        let q = rand_poly(&mut rng, Signature::scalar(g), 3, 4, 3);
        let x = rand_tuple(&mut rng, g, n);
        let pq = p.mul(&q).unwrap().evaluate(&x).unwrap();
        let prod: DMatrix<f64> = p.evaluate(&x).unwrap() * q.evaluate(&x).unwrap();
        prop_assert!((&pq - &prod).norm() <= 1e-10 * (1.0 + prod.norm()));
        let ps = p.involute().evaluate(&x).unwrap();
        prop_assert!((ps - p.evaluate(&x).unwrap().transpose()).norm() <= 1e-12 * (1.0 + pq.norm()));
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), g in 1usize..=3, ell in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rand_poly(&mut rng, Signature::vector(g, ell), 3, 5, 7);
        let s = print_poly(&p);
        let back = parse_poly(&s, g, ell).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(print_poly(&back), s);
    }
}

#[test]
fn canonical_form() {
    let p = parse_poly("3 - 2 x1 x2* + x1^2", 2, 1).unwrap();
    assert_eq!(print_poly(&p), "-2 x1 x2* + x1 x1 + 3");
    let m = parse_poly("[ x1 ; 2 x2* ]", 2, 1).unwrap();
    assert_eq!(m.sig.nu, 2);
    assert_eq!(parse_poly(&print_poly(&m), 2, 1).unwrap(), m);
}

mod common;

use nalgebra::{DMatrix, DVector};
use ncrr_core::fieldext::{
    decommute, eval_hpoly, eval_zpoly, phi, phi_dim, psi, pull_back, recompose, unit_mul, Complex, DivisionAlgebra,
    HMat, HPoly, NcKey, Quat, Quaternion, ZPoly,
};
use ncrr_core::freealg::{int, MatrixTuple, Monomial, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{rand_coeff, rand_word};

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-20i64..=20).prop_map(|[a, b, c, d]| Quaternion::new(int(a), int(b), int(c), int(d)))
}

fn rand_quat<R: Rng>(rng: &mut R, dim: usize) -> Quaternion {
    let mut p = [int(0), int(0), int(0), int(0)];
    for part in p.iter_mut().take(dim) {
        *part = int(rng.random_range(-5..=5));
    }
    Quaternion::from_parts(p)
}

fn rand_hpoly<D: DivisionAlgebra, R: Rng>(rng: &mut R, g: usize, ell: usize, deg: usize) -> HPoly<D> {
    let mut p = HPoly::zero(g, ell);
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=deg);
        let word = rand_word(rng, g, len);
        let units = (0..=len).map(|_| rng.random_range(0..D::DIM as u8)).collect();
        p.add_term(NcKey { col: rng.random_range(0..ell), word, units }, &rand_coeff(rng, 5));
    }
    p
}

fn rand_zpoly<R: Rng>(rng: &mut R, g: usize, deg: usize) -> ZPoly<Quat> {
    let gz = 4 * g;
    let mut p = ZPoly::zero(gz, 1);
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=deg);
        let word = Word((0..len).map(|_| rng.random_range(0..2 * gz) as u16).collect());
        p.add_term(Monomial::vec(0, word), &rand_quat(rng, 4));
    }
    p
}

fn diff(a: &HMat, b: &HMat) -> f64 {
    a.parts.iter().zip(&b.parts).map(|(x, y)| (x - y).norm_squared()).sum::<f64>().sqrt()
}

/// r̂(Z)w = r(X)w for the pulled-back (X, w), and Re(r̂(Z)w) = ψ(r̂)(Z)v.
fn check_re_identity<D: DivisionAlgebra>(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, ell, n) = (rng.random_range(1..=2), rng.random_range(1..=2), rng.random_range(1..=3));
    let r = rand_hpoly::<D, _>(&mut rng, g, ell, 3);
    let z: Vec<DMatrix<f64>> =
        (0..D::DIM * g).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let v = DVector::from_fn(D::DIM * ell * n, |_, _| rng.random_range(-1.0..1.0));
    let (x, w) = pull_back::<D>(&z, &v, g, ell);
    let rz = decommute(&r);
    let lhs = eval_hpoly(&r, &x, &w).unwrap();
    let mid = eval_zpoly(&rz, &z, &w);
    let scale = 1.0 + lhs.norm();
    prop_assert!(diff(&lhs, &mid) <= 1e-10 * scale);
    let real = psi(&rz).evaluate(&MatrixTuple::new(z).unwrap()).unwrap() * &v;
    prop_assert!((lhs.re().column(0) - real.column(0)).norm() <= 1e-10 * scale);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn phi_is_a_star_homomorphism(a in quat(), b in quat()) {
        prop_assert_eq!(phi(&a.mul(&b)), phi(&a).mul(&phi(&b)));
        prop_assert_eq!(phi(&a.add(&b)), phi(&a).add(&phi(&b)));
        prop_assert_eq!(phi(&a.conj()), phi(&a).transpose());
        prop_assert_eq!(a.mul(&b).conj(), b.conj().mul(&a.conj()));
    }

    #[test]
    fn complex_block_is_a_star_homomorphism(a in (-20i64..=20, -20i64..=20), b in (-20i64..=20, -20i64..=20)) {
        let c = |(x, y): (i64, i64)| Quaternion::new(int(x), int(y), int(0), int(0));
        let (a, b) = (c(a), c(b));
        prop_assert_eq!(phi_dim::<Complex>(&a.mul(&b)), phi_dim::<Complex>(&a).mul(&phi_dim::<Complex>(&b)));
        prop_assert_eq!(phi_dim::<Complex>(&a.conj()), phi_dim::<Complex>(&a).transpose());
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn unit_table_matches_multiplication(s in 0usize..4, t in 0usize..4) {
        let (neg, u) = unit_mul(s, t);
        let expected = if neg { Quaternion::unit(u).neg() } else { Quaternion::unit(u) };
        prop_assert_eq!(Quaternion::unit(s).mul(&Quaternion::unit(t)), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recompose_inverts_decommute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rand_hpoly::<Quat, _>(&mut rng, 2, 1, 3);
        prop_assert_eq!(recompose(&decommute(&p)).unwrap(), p);
        let z = rand_zpoly(&mut rng, 2, 2);
        prop_assert_eq!(decommute(&recompose(&z).unwrap()), z);
    }

    /// decommute respects sums, products and left scalars.
    #[test]
    fn decommute_is_a_homomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rand_hpoly::<Quat, _>(&mut rng, 2, 1, 2);
        let b = rand_hpoly::<Quat, _>(&mut rng, 2, 1, 2);
        prop_assert_eq!(decommute(&a.mul(&b)), decommute(&a).mul(&decommute(&b)));
        let sum = decommute(&a.add(&b));
        let mut expected = decommute(&a);
        for (m, c) in &decommute(&b).terms {
            expected.add_term(m.clone(), c);
        }
        prop_assert_eq!(sum, expected);
        let h = rand_quat(&mut rng, 4);
        prop_assert_eq!(decommute(&a.left_scalar(&h)), decommute(&a).left_scalar(&h));
        let c = rand_hpoly::<Complex, _>(&mut rng, 2, 1, 2);
        let d = rand_hpoly::<Complex, _>(&mut rng, 2, 1, 2);
        prop_assert_eq!(decommute(&c.mul(&d)), decommute(&c).mul(&decommute(&d)));
    }

    #[test]
    fn real_part_identity_quaternions(seed in any::<u64>()) {
        check_re_identity::<Quat>(seed)?;
    }

    #[test]
    fn real_part_identity_complex(seed in any::<u64>()) {
        check_re_identity::<Complex>(seed)?;
    }
}

//! Positive functionals, flat extensions and GNS witnesses, plus a numeric
//! zero-set oracle used for cross-checking membership verdicts.
//!
//! The witness lives on the quotient span(D)/(I ∩ span D) for a chip space D,
//! represented by the nonlead monomials N of D. A functional L on D*D that
//! vanishes on D*(I ∩ span D) and has a positive definite Hankel matrix over N
//! turns that quotient into an inner product space on which each x_k acts by
//! left multiplication (projected at the boundary of D).

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::chips::ChipSpace;
use crate::error::{Error, Result};
use crate::freealg::{MatPoly, MatrixTuple, Monomial, Scalar, VecPoly, Word};
use crate::groebner::GroebnerBasis;
use crate::linalg::{to_f64, Echelon, SparseRow};
use crate::sdp::{find_pd, SdpOptions, SymMatrix};

/// Witness residual bound ‖g(X)v‖ ≤ TAU_WIT·(1+‖v‖).
pub const TAU_WIT: f64 = 1e-8;
/// Separation bound ‖q(X)v‖ ≥ TAU_SEP.
pub const TAU_SEP: f64 = 1e-6;
const REGULARIZE: f64 = 1e-10;

/// A symmetric linear functional on ℓ×ℓ monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Functional {
    pub g: usize,
    pub values: BTreeMap<Monomial, f64>,
}

impl Functional {
    pub fn get(&self, mu: &Monomial) -> Option<f64> {
        self.values.get(mu).copied()
    }

    /// L(p) for an ℓ×ℓ polynomial supported in the domain.
    pub fn eval(&self, p: &MatPoly) -> Option<f64> {
        p.terms.iter().map(|(m, c)| self.get(m).map(|v| v * to_f64(c))).sum()
    }

    fn scale(&mut self, s: f64) {
        for v in self.values.values_mut() {
            *v *= s;
        }
    }
}

/// Hankel matrix (L(ω_i*ω_j)).
pub fn hankel(l: &Functional, omega: &[Monomial]) -> Result<SymMatrix> {
    let k = omega.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mu = Monomial::star_mul(&omega[i], &omega[j], l.g);
            let v = l.get(&mu).ok_or_else(|| Error::OutsideSpan(format!("{mu:?} outside the functional's domain")))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(SymMatrix::from_any(m))
}

fn letter(code: usize) -> Word {
    Word(vec![code as u16])
}

/// Quotient data for a chip space D: nonlead basis and normal-form coordinates.
struct Quotient {
    g: usize,
    d: Vec<Monomial>,
    dset: BTreeSet<Monomial>,
    basis: Vec<Monomial>,
    nf: BTreeMap<Monomial, Vec<(usize, Scalar)>>,
}

impl Quotient {
    fn new(gb: &GroebnerBasis, space: &ChipSpace) -> Result<Self> {
        let g = gb.sig.g;
        let d = space.to_vec();
        let basis: Vec<Monomial> = d.iter().filter(|m| gb.is_nonlead(m)).cloned().collect();
        let idx: BTreeMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut nf = BTreeMap::new();
        for m in &d {
            let r = gb.normal_form(&MatPoly::monomial(gb.sig, m.clone(), Scalar::one()));
            let mut coords = Vec::new();
            for (t, c) in &r.terms {
                let i = idx
                    .get(t)
                    .ok_or_else(|| Error::Witness(format!("normal form of {m:?} leaves the chip space")))?;
                coords.push((*i, c.clone()));
            }
            nf.insert(m.clone(), coords);
        }
        let dset = d.iter().cloned().collect();
        Ok(Quotient { g, d, dset, basis, nf })
    }

    fn nf_vec(&self, m: &Monomial) -> Option<DVector<f64>> {
        let coords = self.nf.get(m)?;
        let mut v = DVector::zeros(self.basis.len());
        for (i, c) in coords {
            v[*i] = to_f64(c);
        }
        Some(v)
    }

    fn key(&self, a: &Monomial, b: &Monomial) -> Monomial {
        let mu = Monomial::star_mul(a, b, self.g);
        let st = mu.star(self.g);
        mu.min(st)
    }

    /// Basis of {L symmetric on D*D : L vanishes on D*(I ∩ span D)}, keyed by
    /// canonical representatives min(μ, μ*).
    fn functional_space(&self) -> (Vec<Monomial>, Vec<SparseRow>) {
        let mut keys: BTreeMap<Monomial, usize> = BTreeMap::new();
        for a in &self.d {
            for b in &self.d {
                let k = self.key(a, b);
                let next = keys.len();
                keys.entry(k).or_insert(next);
            }
        }
        let mut ech = Echelon::new();
        for m in &self.d {
            if self.basis.binary_search(m).is_ok() {
                continue;
            }
            // r = m − NF(m) ∈ I
            let mut r: Vec<(&Monomial, Scalar)> = vec![(m, Scalar::one())];
            for (i, c) in &self.nf[m] {
                r.push((&self.basis[*i], -c.clone()));
            }
            for a in &self.d {
                let mut row = SparseRow::new();
                for (t, c) in &r {
                    let e = row.entry(keys[&self.key(a, t)]).or_insert_with(Scalar::zero);
                    *e += c;
                }
                row.retain(|_, v| !v.is_zero());
                if !row.is_empty() {
                    ech.insert(row);
                }
            }
        }
        let mut key_list = vec![Monomial::unit(0); keys.len()];
        for (k, i) in keys {
            key_list[i] = k;
        }
        let ns = ech.nullspace(key_list.len());
        (key_list, ns)
    }

    fn hankel_of(&self, keys_idx: &BTreeMap<Monomial, usize>, l: &SparseRow) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, n, |i, j| {
            let k = keys_idx[&self.key(&self.basis[i], &self.basis[j])];
            l.get(&k).map(to_f64).unwrap_or(0.0)
        })
    }

    /// A functional with positive definite Hankel matrix over the nonlead basis.
    fn positive_functional(&self, opts: &SdpOptions) -> Result<(Functional, DMatrix<f64>)> {
        let (keys, space) = self.functional_space();
        let keys_idx: BTreeMap<Monomial, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let mut used = Vec::new();
        let mut span = Vec::new();
        for l in &space {
            let h = self.hankel_of(&keys_idx, l);
            if h.iter().any(|x| *x != 0.0) {
                used.push(l);
                span.push(SymMatrix::from_any(h));
            }
        }
        if self.basis.is_empty() {
            return Ok((Functional { g: self.g, values: BTreeMap::new() }, DMatrix::zeros(0, 0)));
        }
        let Some((h, coeffs, _)) = find_pd(&span, opts)? else {
            return Err(Error::NotRealOrIndeterminate(
                "no positive definite Hankel matrix vanishing on the module".into(),
            ));
        };
        let mut vals = vec![0.0; keys.len()];
        for (l, c) in used.iter().zip(&coeffs) {
            for (k, v) in l.iter() {
                vals[*k] += c * to_f64(v);
            }
        }
        let mut values = BTreeMap::new();
        for (k, v) in keys.iter().zip(vals) {
            values.insert(k.star(self.g), v);
            values.insert(k.clone(), v);
        }
        Ok((Functional { g: self.g, values }, h.m))
    }
}

/// Extends `space` until it contains the normal-form support of every member
/// and of every product needed to multiply normal forms by a letter.
fn nf_closure(gb: &GroebnerBasis, space: &mut ChipSpace) {
    let g = gb.sig.g;
    loop {
        let mut add = BTreeSet::new();
        for s in space.iter() {
            let r = gb.normal_form(&MatPoly::monomial(gb.sig, s.clone(), Scalar::one()));
            for t in r.terms.keys() {
                if !space.contains(t) {
                    add.insert(t.clone());
                }
                for y in 0..2 * g {
                    if space.contains(&s.left_mul(&letter(y))) {
                        let yt = t.left_mul(&letter(y));
                        if !space.contains(&yt) {
                            add.insert(yt);
                        }
                    }
                }
            }
        }
        if add.is_empty() {
            return;
        }
        for m in add {
            space.insert_with_chips(&m);
        }
    }
}

/// Separating functional on (ℝ⟨x,x*⟩₁C)*(ℝ⟨x,x*⟩₁C) for a real module.
pub fn separating_functional(gb: &GroebnerBasis, c: &ChipSpace) -> Result<Functional> {
    let mut d = working_space(gb, c);
    nf_closure(gb, &mut d);
    let q = Quotient::new(gb, &d)?;
    Ok(q.positive_functional(&SdpOptions::default())?.0)
}

/// C together with its one-letter extensions (and the units).
fn working_space(gb: &GroebnerBasis, c: &ChipSpace) -> ChipSpace {
    let mut d = c.clone();
    for j in 0..gb.sig.ell {
        d.insert_with_chips(&Monomial::unit(j));
    }
    for m in c.iter() {
        for y in 0..2 * gb.sig.g {
            d.insert_with_chips(&m.left_mul(&letter(y)));
        }
    }
    d
}

/// Flat extension data: orthonormal τ basis of T = span(nonlead C) and the
/// kernel polynomials p_m for m ∈ ℝ⟨x,x*⟩₁C ∖ C.
#[derive(Clone, Debug)]
pub struct FlatExtension {
    pub t_basis: Vec<Monomial>,
    /// τ_j = Σ_i tau[(j, i)] t_i.
    pub tau: DMatrix<f64>,
    /// p_m = m − Σ_j L(τ_j* m) τ_j, as float coefficients.
    pub kernel: Vec<(Monomial, BTreeMap<Monomial, f64>)>,
    proj: BTreeMap<Monomial, DVector<f64>>,
}

impl FlatExtension {
    /// L̄(b*a) = ⟨[a], [b]⟩.
    pub fn value(&self, a: &Monomial, b: &Monomial) -> Option<f64> {
        Some(self.proj.get(a)?.dot(self.proj.get(b)?))
    }

    pub fn rank(&self) -> usize {
        self.t_basis.len()
    }

    /// Class of m in τ coordinates.
    pub fn class(&self, m: &Monomial) -> Option<&DVector<f64>> {
        self.proj.get(m)
    }
}

pub fn flat_extension(l: &Functional, gb: &GroebnerBasis, c: &ChipSpace) -> Result<FlatExtension> {
    let t_basis: Vec<Monomial> = c.iter().filter(|m| gb.is_nonlead(m)).cloned().collect();
    let a = hankel(l, &t_basis)?;
    let k = t_basis.len();
    let chol = Cholesky::new(a.m.clone())
        .ok_or_else(|| Error::Tolerance("Gram matrix of T is numerically singular".into()))?;
    let linv = chol.l().try_inverse().ok_or_else(|| Error::Tolerance("singular Cholesky factor".into()))?;
    let lt = chol.l().transpose();
    let idx: BTreeMap<&Monomial, usize> = t_basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut proj = BTreeMap::new();
    for m in c.iter() {
        let r = gb.normal_form(&MatPoly::monomial(gb.sig, m.clone(), Scalar::one()));
        let mut x = DVector::zeros(k);
        for (t, coef) in &r.terms {
            let i = idx.get(t).ok_or_else(|| Error::Witness(format!("normal form of {m:?} leaves C")))?;
            x[*i] = to_f64(coef);
        }
        proj.insert(m.clone(), &lt * x);
    }
    let mut kernel = Vec::new();
    for m in c.border() {
        let raw = DVector::from_iterator(
            k,
            t_basis.iter().map(|t| {
                l.get(&Monomial::star_mul(t, &m, l.g))
                    .ok_or_else(|| Error::OutsideSpan(format!("L(t*{m:?}) undefined")))
            })
            .collect::<Result<Vec<f64>>>()?,
        );
        let coeffs = &linv * raw;
        // p_m = m − Σ_j coeffs_j τ_j
        let mut p = BTreeMap::new();
        p.insert(m.clone(), 1.0);
        for (i, t) in t_basis.iter().enumerate() {
            let c: f64 = (0..k).map(|j| coeffs[j] * linv[(j, i)]).sum();
            *p.entry(t.clone()).or_insert(0.0) -= c;
        }
        proj.insert(m.clone(), coeffs);
        kernel.push((m, p));
    }
    Ok(FlatExtension { t_basis, tau: linv, kernel, proj })
}

/// Chip space used for the GNS witness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WitnessChips {
    /// All monomials of degree ≤ d.
    #[default]
    Ball,
    /// Chip closure of the supports of G and the queries, closed under the
    /// normal-form products the construction needs.
    Minimal,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub x: MatrixTuple,
    /// Stacked (v_1; …; v_ℓ), length ℓ·n.
    pub v: DVector<f64>,
    pub n: usize,
    /// Nonlead monomials indexing the quotient basis.
    pub basis: Vec<Monomial>,
    /// The chip space the quotient was built on.
    pub chips: ChipSpace,
    /// The positive functional, scaled like the Gram matrix: vᵀp(X)v = L(p).
    pub functional: Functional,
    /// Cholesky factor R (H = RᵀR) mapping normal-form coordinates to witness coordinates.
    pub r: DMatrix<f64>,
}

impl Witness {
    /// ‖p(X)v‖.
    pub fn residual(&self, p: &VecPoly) -> Result<f64> {
        Ok((p.evaluate(&self.x)? * &self.v).norm())
    }

    /// Coordinates of the class of a monomial of the chip space.
    pub fn class_of(&self, gb: &GroebnerBasis, m: &Monomial) -> Result<DVector<f64>> {
        let r = gb.normal_form(&MatPoly::monomial(gb.sig, m.clone(), Scalar::one()));
        let mut x = DVector::zeros(self.n);
        for (t, c) in &r.terms {
            let i = self
                .basis
                .binary_search(t)
                .map_err(|_| Error::Witness(format!("{t:?} outside the witness basis")))?;
            x[i] = to_f64(c);
        }
        Ok(&self.r * x)
    }
}

/// Builds (X, v) ∈ V(I) separating every q ∉ I of degree ≤ the chip degree.
pub fn gns_witness(gb: &GroebnerBasis, qs: &[VecPoly], chips: WitnessChips) -> Result<Witness> {
    gns_witness_with(gb, qs, chips, &SdpOptions::default())
}

pub fn gns_witness_with(
    gb: &GroebnerBasis,
    qs: &[VecPoly],
    chips: WitnessChips,
    opts: &SdpOptions,
) -> Result<Witness> {
    let sig = gb.sig;
    let g = sig.g;
    for q in qs {
        if q.sig.g != g || q.sig.ell != sig.ell || q.sig.nu != 1 {
            return Err(Error::SignatureMismatch(format!("query {q} does not match the basis")));
        }
    }
    if gb.is_everything() {
        return Err(Error::Witness("the module is everything; V(I) only has v = 0".into()));
    }
    let space = match chips {
        WitnessChips::Ball => {
            let d = qs.iter().map(VecPoly::degree).chain([gb.degree(), 0]).max().unwrap_or(0);
            ChipSpace::ball(sig, d as usize)
        }
        WitnessChips::Minimal => {
            let mut c = ChipSpace::empty(sig);
            for j in 0..sig.ell {
                c.insert_with_chips(&Monomial::unit(j));
            }
            for p in gb.elems.iter().chain(qs) {
                for m in p.terms.keys() {
                    c.insert_with_chips(m);
                }
            }
            nf_closure(gb, &mut c);
            c
        }
    };
    let q = Quotient::new(gb, &space)?;
    let n = q.basis.len();
    let (mut functional, h) = q.positive_functional(opts)?;
    // scale so the Gram matrix dominates the identity
    let lmin = SymmetricEigen::new(h.clone()).eigenvalues.min();
    let s = 1.0 / lmin;
    functional.scale(s);
    let h = h * s + DMatrix::identity(n, n) * REGULARIZE;
    let chol = Cholesky::new(h.clone()).ok_or_else(|| Error::Tolerance("Hankel matrix not positive definite".into()))?;
    let r = chol.l().transpose();
    let rinv = r.clone().try_inverse().ok_or_else(|| Error::Tolerance("singular Cholesky factor".into()))?;
    let hinv = chol.inverse();
    let mut mats = Vec::with_capacity(g);
    for k in 0..g {
        let (xk, xks) = (letter(k), letter(k + g));
        let mut kmat = DMatrix::zeros(n, n);
        for (b, mb) in q.basis.iter().enumerate() {
            let yb = mb.left_mul(&xk);
            if let Some(nf) = q.nf_vec(&yb).filter(|_| q.dset.contains(&yb)) {
                kmat.set_column(b, &(&h * nf));
            } else {
                for (a, ma) in q.basis.iter().enumerate() {
                    if let Some(nf) = q.nf_vec(&ma.left_mul(&xks)) {
                        kmat[(a, b)] = (&h * nf)[b];
                    }
                }
            }
        }
        let m = &hinv * kmat;
        mats.push(&r * m * &rinv);
    }
    let x = MatrixTuple { n, mats };
    let mut v = DVector::zeros(sig.ell * n);
    for j in 0..sig.ell {
        let nf = q.nf_vec(&Monomial::unit(j)).expect("units lie in the chip space");
        v.rows_mut(j * n, n).copy_from(&(&r * nf));
    }
    let w = Witness { x, v, n, basis: q.basis.clone(), chips: space, functional, r };
    let vnorm = w.v.norm();
    for p in &gb.elems {
        let res = w.residual(p)?;
        if res > TAU_WIT * (1.0 + vnorm) {
            return Err(Error::Witness(format!("generator residual {res:.3e} exceeds tolerance")));
        }
    }
    for qq in qs {
        if gb.contains(qq) {
            continue;
        }
        let res = w.residual(qq)?;
        if res < TAU_SEP {
            return Err(Error::Witness(format!("query {qq} not separated (‖q(X)v‖ = {res:.3e})")));
        }
    }
    Ok(w)
}

/// Outcome of the numeric zero-set oracle.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// q vanished on every kernel vector found.
    ConsistentWithMember,
    /// A point of V(S) where q(X)v ≠ 0.
    Refuted { x: MatrixTuple, v: DVector<f64>, value: f64 },
    /// No nontrivial point of V(S) was found.
    Inconclusive,
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }
}

/// Adds ∂(coef·w(X)v)/∂X into `out_x` (n × g·n², columns X_k[a][b] row-major).
fn word_jacobian(
    word: &Word,
    x: &MatrixTuple,
    g: usize,
    v: &DVector<f64>,
    coef: f64,
    out_x: &mut DMatrix<f64>,
) {
    let n = x.n;
    let letters: Vec<(usize, bool)> = word.0.iter().map(|&c| ((c as usize) % g, (c as usize) >= g)).collect();
    let s = letters.len();
    // prefix products P_t = Y_1 … Y_{t−1}, suffix vectors S_t = Y_{t+1} … Y_s v
    let mut prefix = Vec::with_capacity(s + 1);
    prefix.push(DMatrix::<f64>::identity(n, n));
    for &(k, st) in &letters {
        let y = if st { x.mats[k].transpose() } else { x.mats[k].clone() };
        let last = prefix.last().unwrap() * y;
        prefix.push(last);
    }
    let mut suffix = vec![DVector::zeros(n); s + 1];
    suffix[s] = v.clone();
    for t in (0..s).rev() {
        let (k, st) = letters[t];
        suffix[t] = if st { x.mats[k].transpose() * &suffix[t + 1] } else { &x.mats[k] * &suffix[t + 1] };
    }
    for t in 0..s {
        let (k, st) = letters[t];
        let p = &prefix[t];
        let sv = &suffix[t + 1];
        for a in 0..n {
            for b in 0..n {
                // ∂/∂X_k[a][b]
                let (pc, sc) = if st { (b, a) } else { (a, b) };
                let f = coef * sv[sc];
                if f == 0.0 {
                    continue;
                }
                let col = k * n * n + a * n + b;
                for i in 0..n {
                    out_x[(i, col)] += f * p[(i, pc)];
                }
            }
        }
    }
}

struct OracleProblem<'a> {
    gens: &'a [VecPoly],
    g: usize,
    ell: usize,
    n: usize,
}

impl OracleProblem<'_> {
    fn nparams(&self) -> usize {
        self.g * self.n * self.n + self.ell * self.n
    }

    fn unpack(&self, p: &DVector<f64>) -> (MatrixTuple, DVector<f64>) {
        let n = self.n;
        let mats = (0..self.g)
            .map(|k| DMatrix::from_fn(n, n, |a, b| p[k * n * n + a * n + b]))
            .collect();
        let v = p.rows(self.g * n * n, self.ell * n).into_owned();
        (MatrixTuple { n, mats }, v)
    }

    fn residual_and_jacobian(&self, p: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let (x, v) = self.unpack(p);
        let m = self.gens.len() * n + 1;
        let mut f = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, self.nparams());
        let voff = self.g * n * n;
        for (i, gen) in self.gens.iter().enumerate() {
            let mut blk = DMatrix::zeros(n, self.g * n * n);
            for (mono, c) in &gen.terms {
                let c = to_f64(c);
                let vj = v.rows(mono.col * n, n).into_owned();
                let w = x.word_matrix(&mono.word, self.g);
                let val = &w * &vj * c;
                for r in 0..n {
                    f[i * n + r] += val[r];
                    for cc in 0..n {
                        jac[(i * n + r, voff + mono.col * n + cc)] += c * w[(r, cc)];
                    }
                }
                word_jacobian(&mono.word, &x, self.g, &vj, c, &mut blk);
            }
            let mut view = jac.view_mut((i * n, 0), (n, self.g * n * n));
            view += &blk;
        }
        f[m - 1] = v.norm_squared() - 1.0;
        for (t, vt) in v.iter().enumerate() {
            jac[(m - 1, voff + t)] = 2.0 * vt;
        }
        (f, jac)
    }

    /// Levenberg–Marquardt from `start`; returns the final parameters.
    fn solve(&self, start: DVector<f64>) -> DVector<f64> {
        let mut p = start;
        let (mut f, mut jac) = self.residual_and_jacobian(&p);
        let mut cost = f.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..300 {
            if cost < 1e-30 {
                break;
            }
            let jt = jac.transpose();
            let mut a = &jt * &jac;
            let grad = &jt * &f;
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (1.0 + a[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-grad)) else { break };
            let trial = &p + &step;
            let (tf, tj) = self.residual_and_jacobian(&trial);
            let tc = tf.norm_squared();
            if tc < cost {
                p = trial;
                f = tf;
                jac = tj;
                let improved = cost - tc;
                cost = tc;
                lambda = (lambda * 0.3).max(1e-15);
                if improved < 1e-32 && step.norm() < 1e-15 {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        p
    }
}

/// Searches V(gens) numerically for points where q does not vanish.
pub fn numeric_zero_oracle<R: Rng>(
    gens: &[VecPoly],
    q: &VecPoly,
    sizes: &[usize],
    samples: usize,
    rng: &mut R,
) -> Result<Verdict> {
    let sig = q.sig;
    for p in gens {
        if p.sig.g != sig.g || p.sig.ell != sig.ell {
            return Err(Error::SignatureMismatch(format!("generator {p} does not match the query")));
        }
    }
    let mut found_kernel = false;
    for &n in sizes {
        let prob = OracleProblem { gens, g: sig.g, ell: sig.ell, n };
        for sample in 0..samples {
            let mut start = DVector::from_fn(prob.nparams(), |_, _| rng.sample::<f64, _>(StandardNormal));
            // structured starts: some samples begin with a zero or rank-one variable
            if sample % 4 == 1 && sig.g > 0 {
                let k = rng.random_range(0..sig.g);
                for t in 0..n * n {
                    start[k * n * n + t] = 0.0;
                }
            }
            let p = prob.solve(start);
            let (x, _) = prob.unpack(&p);
            let stacked = stack_eval(gens, &x, sig.ell)?;
            let kernel = joint_kernel(&stacked, sig.ell * n);
            if kernel.is_empty() {
                continue;
            }
            found_kernel = true;
            let qx = q.evaluate(&x)?;
            let scale = 1.0 + qx.norm();
            for u in kernel {
                let val = (&qx * &u).norm();
                if val > 1e-6 * scale {
                    return Ok(Verdict::Refuted { x, v: u, value: val });
                }
            }
        }
    }
    Ok(if found_kernel { Verdict::ConsistentWithMember } else { Verdict::Inconclusive })
}

fn stack_eval(gens: &[VecPoly], x: &MatrixTuple, ell: usize) -> Result<DMatrix<f64>> {
    let n = x.n;
    let mut out = DMatrix::zeros(gens.len() * n, ell * n);
    for (i, p) in gens.iter().enumerate() {
        out.view_mut((i * n, 0), (n, ell * n)).copy_from(&p.evaluate(x)?);
    }
    Ok(out)
}

/// Right singular vectors with σ ≤ 1e−9·σ_max (all of ℝ^cols for an empty or zero matrix).
fn joint_kernel(a: &DMatrix<f64>, cols: usize) -> Vec<DVector<f64>> {
    if a.nrows() == 0 || a.iter().all(|x| *x == 0.0) {
        return (0..cols).map(|i| DVector::from_fn(cols, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    // eigen-decomposition of AᵀA gives a complete right basis regardless of shape
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let smax = eig.eigenvalues.max().max(0.0).sqrt();
    (0..cols)
        .filter(|&i| eig.eigenvalues[i].max(0.0).sqrt() <= 1e-9 * smax)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::Signature;
    use crate::groebner::reduced_lgb;
    use crate::syntax::parse_poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> VecPoly {
        parse_poly(s, 2, 1).unwrap()
    }

    fn basis(gens: &[&str]) -> GroebnerBasis {
        let gens: Vec<VecPoly> = gens.iter().map(|s| p(s)).collect();
        reduced_lgb(Signature::vector(2, 1), &gens).unwrap()
    }

    #[test]
    fn hankel_basics() {
        let one = Monomial::unit(0);
        let l = Functional { g: 2, values: BTreeMap::from([(Monomial::mat(0, 0, Word::empty()), 1.0)]) };
        assert_eq!(hankel(&l, std::slice::from_ref(&one)).unwrap().m, DMatrix::from_element(1, 1, 1.0));
        let z = Functional { g: 2, values: BTreeMap::from([(Monomial::mat(0, 0, Word::empty()), 0.0)]) };
        assert!(hankel(&z, &[one]).unwrap().m.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn separating_functional_kills_module() {
        let gb = basis(&["x1"]);
        let c = ChipSpace::closure(gb.sig, [Monomial::unit(0)]);
        let l = separating_functional(&gb, &c).unwrap();
        let x1 = p("x1").lead().unwrap().0.clone();
        let mu = Monomial::star_mul(&Monomial::unit(0), &x1, 2);
        assert!(l.get(&mu).unwrap().abs() < 1e-12);
        let a = hankel(&l, &[Monomial::unit(0)]).unwrap();
        assert!(a.min_eig() > 0.0);
        let fe = flat_extension(&l, &gb, &c).unwrap();
        assert_eq!(fe.rank(), 1);
        for (m, _) in &fe.kernel {
            // the class of p_m is zero by construction; L̄ agrees with L on C*C
            let v = fe.value(m, m).unwrap();
            assert!(v >= -1e-12);
        }
        let one = Monomial::unit(0);
        assert!((fe.value(&one, &one).unwrap() - l.get(&Monomial::mat(0, 0, Word::empty())).unwrap()).abs() < 1e-10);
        let x1m = Monomial::vec(0, x1.word.clone());
        assert!(fe.value(&x1m, &one).unwrap().abs() < 1e-10);
    }

    #[test]
    fn witness_for_x1() {
        let gb = basis(&["x1"]);
        let w = gns_witness(&gb, &[p("x2")], WitnessChips::Ball).unwrap();
        assert_eq!(w.n, 4);
        assert!(w.residual(&p("x1")).unwrap() <= TAU_WIT * (1.0 + w.v.norm()));
        assert!(w.residual(&p("x2")).unwrap() >= TAU_SEP);
        let m = gns_witness(&gb, &[p("x2")], WitnessChips::Minimal).unwrap();
        assert!(m.residual(&p("x2")).unwrap() >= TAU_SEP);
    }

    #[test]
    fn oracle_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = [p("x1")];
        let v = numeric_zero_oracle(&g, &p("x1 x2"), &[1, 2, 3], 8, &mut rng).unwrap();
        assert!(v.is_refuted());
        let v = numeric_zero_oracle(&g, &p("x2 x1"), &[1, 2, 3], 8, &mut rng).unwrap();
        assert!(matches!(v, Verdict::ConsistentWithMember));
        let v = numeric_zero_oracle(&[], &p("1"), &[1], 2, &mut rng).unwrap();
        assert!(v.is_refuted());
        // the rr-member x1 of ⟨x1*x1⟩ is never refuted
        let v = numeric_zero_oracle(&[p("x1* x1")], &p("x1"), &[1, 2, 3], 20, &mut rng).unwrap();
        assert!(!v.is_refuted());
    }
}

//! Complex and quaternion coefficients, reduced to real matrix coefficients.
//!
//! ℍ⟨x,x*⟩ (letters do not commute with ℍ) is carried to ℍ_c⟨z,z*⟩ (letters
//! commute) by `decommute`, then to real rows of width 4ℓ by `psi`. ℂ follows
//! the same pipeline with two units; since complex scalars commute with
//! complex matrices, ℂ coefficients are central and kept in front.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::freealg::{rat, Letter, Monomial, Scalar, Signature, VecPoly, Word};
use crate::groebner::GroebnerBasis;
use crate::linalg::{to_f64, QMat};
use crate::realradical::{real_radical_with, RealRadicalResult, RrOptions};
use crate::syntax::{eval_row, format_scalar, format_word, parse_rows, Algebra};
use crate::witness::{gns_witness_with, WitnessChips};

const UNIT_NAMES: [&str; 4] = ["1", "i", "j", "k"];

/// u_a·u_b = sign·u_c over the units 1, i, j, k.
pub fn unit_mul(a: usize, b: usize) -> (bool, usize) {
    match (a, b) {
        (0, b) => (false, b),
        (a, 0) => (false, a),
        (a, b) if a == b => (true, 0),
        (1, 2) => (false, 3),
        (2, 3) => (false, 1),
        (3, 1) => (false, 2),
        (2, 1) => (true, 3),
        (3, 2) => (true, 1),
        (1, 3) => (true, 2),
        _ => unreachable!("unit index out of range"),
    }
}

/// a + bi + cj + dk with rational components.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Quaternion {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

impl Quaternion {
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn from_parts(p: [Scalar; 4]) -> Self {
        let [a, b, c, d] = p;
        Quaternion { a, b, c, d }
    }

    pub fn real(a: Scalar) -> Self {
        Quaternion { a, ..Default::default() }
    }

    pub fn unit(t: usize) -> Self {
        let mut p = self::zero_parts();
        p[t] = Scalar::one();
        Self::from_parts(p)
    }

    pub fn parts(&self) -> [Scalar; 4] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }

    pub fn part(&self, t: usize) -> &Scalar {
        match t {
            0 => &self.a,
            1 => &self.b,
            2 => &self.c,
            _ => &self.d,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Quaternion::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }

    pub fn neg(&self) -> Self {
        Quaternion::new(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Quaternion::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (x, y) = (self.parts(), o.parts());
        let mut out = zero_parts();
        for s in 0..4 {
            if x[s].is_zero() {
                continue;
            }
            for t in 0..4 {
                if y[t].is_zero() {
                    continue;
                }
                let (neg, u) = unit_mul(s, t);
                let v = &x[s] * &y[t];
                if neg {
                    out[u] -= v;
                } else {
                    out[u] += v;
                }
            }
        }
        Quaternion::from_parts(out)
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.a.clone(), -&self.b, -&self.c, -&self.d)
    }
}

fn zero_parts() -> [Scalar; 4] {
    [Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::zero()]
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.parts();
        write!(f, "({},{},{},{})", format_scalar(&p[0]), format_scalar(&p[1]), format_scalar(&p[2]), format_scalar(&p[3]))
    }
}

/// ψ(a + bi + cj + dk) = (a, b, c, d), truncated to the algebra's dimension.
pub fn psi_scalar<D: DivisionAlgebra>(h: &Quaternion) -> Vec<Scalar> {
    (0..D::DIM).map(|t| h.part(t).clone()).collect()
}

/// Regular representation: rows ψ(h), ψ(ih), ψ(jh), ψ(kh) (first DIM of them).
pub fn phi_dim<D: DivisionAlgebra>(h: &Quaternion) -> QMat {
    let r = D::DIM;
    let rows: Vec<Vec<Scalar>> = (0..r).map(|t| psi_scalar::<D>(&Quaternion::unit(t).mul(h))).collect();
    QMat::from_fn(r, r, |i, j| rows[i][j].clone())
}

/// The 4×4 real representation of ℍ.
pub fn phi(h: &Quaternion) -> QMat {
    phi_dim::<Quat>(h)
}

/// ℂ or ℍ, described by its real dimension.
pub trait DivisionAlgebra: Clone + Copy + fmt::Debug + Default + PartialEq + Eq + PartialOrd + Ord + 'static {
    const DIM: usize;
    /// Scalars commute with the letters x.
    const CENTRAL: bool;
    const NAME: &'static str;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Complex;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Quat;

impl DivisionAlgebra for Complex {
    const DIM: usize = 2;
    const CENTRAL: bool = true;
    const NAME: &'static str = "c";
}

impl DivisionAlgebra for Quat {
    const DIM: usize = 4;
    const CENTRAL: bool = false;
    const NAME: &'static str = "h";
}

/// Term u_{t0} y_1 u_{t1} … y_s u_{ts} in entry `col`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NcKey {
    pub col: usize,
    pub word: Word,
    pub units: Vec<u8>,
}

impl NcKey {
    fn normalize<D: DivisionAlgebra>(mut self) -> (bool, NcKey) {
        let mut neg = false;
        if D::CENTRAL {
            let mut acc = 0usize;
            for u in &mut self.units {
                let (n, r) = unit_mul(acc, *u as usize);
                neg ^= n;
                acc = r;
                *u = 0;
            }
            self.units[0] = acc as u8;
        }
        (neg, self)
    }
}

/// Row polynomial over ℂ or ℍ in noncommuting letters x.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPoly<D: DivisionAlgebra> {
    pub g: usize,
    pub ell: usize,
    pub terms: BTreeMap<NcKey, Scalar>,
    _d: PhantomData<D>,
}

impl<D: DivisionAlgebra> HPoly<D> {
    pub fn zero(g: usize, ell: usize) -> Self {
        HPoly { g, ell, terms: BTreeMap::new(), _d: PhantomData }
    }

    pub fn add_term(&mut self, key: NcKey, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let (neg, key) = key.normalize::<D>();
        let e = self.terms.entry(key.clone()).or_insert_with(Scalar::zero);
        if neg {
            *e -= c;
        } else {
            *e += c;
        }
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn constant(g: usize, ell: usize, col: usize, h: &Quaternion) -> Self {
        let mut p = Self::zero(g, ell);
        for t in 0..D::DIM {
            p.add_term(NcKey { col, word: Word::empty(), units: vec![t as u8] }, h.part(t));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|k| k.word.len() as i64).max().unwrap_or(-1)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    /// Product of a scalar (ℓ=1) polynomial `self` with `o` (any width).
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.g, o.ell);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let (neg, mid) = unit_mul(*ka.units.last().unwrap() as usize, kb.units[0] as usize);
                let mut units = ka.units[..ka.units.len() - 1].to_vec();
                units.push(mid as u8);
                units.extend_from_slice(&kb.units[1..]);
                let key = NcKey { col: kb.col, word: ka.word.concat(&kb.word), units };
                let c = ca * cb;
                out.add_term(key, &if neg { -c } else { c });
            }
        }
        out
    }

    /// Left multiplication by a scalar h ∈ 𝔽.
    pub fn left_scalar(&self, h: &Quaternion) -> Self {
        Self::constant(self.g, 1, 0, h).mul(self)
    }

    /// Adjoint of a scalar (ℓ=1) polynomial.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.g, self.ell);
        for (k, c) in &self.terms {
            let mut neg = false;
            let units: Vec<u8> = k
                .units
                .iter()
                .rev()
                .map(|&u| {
                    if u != 0 {
                        neg ^= true;
                    }
                    u
                })
                .collect();
            let key = NcKey { col: k.col, word: k.word.star(self.g), units };
            out.add_term(key, &if neg { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Embeds a real row polynomial.
    pub fn from_real(p: &VecPoly) -> Self {
        let mut out = Self::zero(p.sig.g, p.sig.ell);
        for (m, c) in &p.terms {
            out.add_term(NcKey { col: m.col, word: m.word.clone(), units: vec![0; m.word.len() + 1] }, c);
        }
        out
    }

    /// Entry `j` as a scalar (ℓ=1) polynomial.
    pub fn entry(&self, j: usize) -> Self {
        let mut out = Self::zero(self.g, 1);
        for (k, c) in &self.terms {
            if k.col == j {
                out.add_term(NcKey { col: 0, ..k.clone() }, c);
            }
        }
        out
    }
}

impl<D: DivisionAlgebra> fmt::Display for HPoly<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mut parts: Vec<String> = Vec::new();
            let mag = c.abs();
            if self.ell > 1 {
                parts.push(format!("e{}", k.col + 1));
            }
            if !mag.is_one() {
                parts.push(format_scalar(&mag));
            }
            let letters = k.word.letters(self.g);
            for (t, u) in k.units.iter().enumerate() {
                if *u != 0 {
                    parts.push(UNIT_NAMES[*u as usize].to_string());
                }
                if let Some(l) = letters.get(t) {
                    parts.push(format_word(&Word::from_letters(self.g, &[*l]), self.g));
                }
            }
            if parts.is_empty() || (self.ell > 1 && parts.len() == 1) {
                parts.push("1".into());
            }
            f.write_str(&parts.join(" "))?;
        }
        Ok(())
    }
}

impl<D: DivisionAlgebra> Algebra for HPoly<D> {
    fn zero(g: usize) -> Self {
        Self::zero(g, 1)
    }
    fn constant(g: usize, c: Scalar) -> Self {
        Self::constant(g, 1, 0, &Quaternion::real(c))
    }
    fn quaternion(g: usize, q: &[Scalar; 4]) -> std::result::Result<Self, String> {
        if q[D::DIM..].iter().any(|x| !x.is_zero()) {
            return Err(format!("quaternion literal outside field={}", D::NAME));
        }
        Ok(Self::constant(g, 1, 0, &Quaternion::from_parts(q.clone())))
    }
    fn unit(g: usize, u: char) -> std::result::Result<Self, String> {
        let t = match u {
            'i' => 1,
            'j' => 2,
            'k' => 3,
            _ => return Err(format!("unknown unit `{u}`")),
        };
        if t >= D::DIM {
            return Err(format!("unit `{u}` needs field=h"));
        }
        Ok(Self::constant(g, 1, 0, &Quaternion::unit(t)))
    }
    fn letter(g: usize, l: Letter) -> Self {
        let mut p = Self::zero(g, 1);
        p.add_term(NcKey { col: 0, word: Word::from_letters(g, &[l]), units: vec![0, 0] }, &Scalar::one());
        p
    }
    fn add(&self, o: &Self) -> Self {
        HPoly::add(self, o)
    }
    fn neg(&self) -> Self {
        HPoly::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        HPoly::mul(self, o)
    }
    fn star(&self) -> Self {
        HPoly::star(self)
    }
    fn is_zero(&self) -> bool {
        HPoly::is_zero(self)
    }
}

/// Parses rows over 𝔽 (one polynomial or a bracketed matrix).
pub fn parse_hrows<D: DivisionAlgebra>(src: &str, g: usize, ell: usize, line: usize) -> Result<Vec<HPoly<D>>> {
    let mut out = Vec::new();
    for row in parse_rows(src, line)? {
        let cols: Vec<HPoly<D>> = eval_row(&row, g, ell, line)?;
        let mut p = HPoly::zero(g, ell);
        for (j, c) in cols.into_iter().enumerate() {
            for (k, v) in c.terms {
                p.add_term(NcKey { col: j, ..k }, &v);
            }
        }
        out.push(p);
    }
    Ok(out)
}

pub fn parse_hpoly<D: DivisionAlgebra>(src: &str, g: usize, ell: usize) -> Result<HPoly<D>> {
    let mut rows = parse_hrows::<D>(src, g, ell, 1)?;
    if rows.len() != 1 {
        return Err(Error::DimensionMismatch("expected a single row".into()));
    }
    Ok(rows.remove(0))
}

/// Row polynomial over 𝔽 in letters z that commute with 𝔽 (coefficients in front).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPoly<D: DivisionAlgebra> {
    /// Number of z variables (DIM·g).
    pub gz: usize,
    pub ell: usize,
    pub terms: BTreeMap<Monomial, Quaternion>,
    _d: PhantomData<D>,
}

impl<D: DivisionAlgebra> ZPoly<D> {
    pub fn zero(gz: usize, ell: usize) -> Self {
        ZPoly { gz, ell, terms: BTreeMap::new(), _d: PhantomData }
    }

    pub fn add_term(&mut self, m: Monomial, h: &Quaternion) {
        if h.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_default();
        *e = e.add(h);
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn left_scalar(&self, h: &Quaternion) -> Self {
        let mut out = Self::zero(self.gz, self.ell);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &h.mul(c));
        }
        out
    }

    /// Product of a scalar (ℓ=1) `self` with `o`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.gz, o.ell);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(Monomial::vec(mb.col, ma.word.concat(&mb.word)), &ca.mul(cb));
            }
        }
        out
    }
}

/// z-index of the t-th component of x_m (0-based m, t).
fn zvar(m: usize, t: usize, dim: usize) -> usize {
    m * dim + t
}

/// x_m ↦ Σ_t u_t z_{m,t}; x_m* ↦ Σ_t z_{m,t}* conj(u_t).
fn letter_image<D: DivisionAlgebra>(l: Letter, g: usize) -> Vec<(usize, Quaternion)> {
    let r = D::DIM;
    let gz = r * g;
    (0..r)
        .map(|t| {
            let z = zvar(l.index - 1, t, r);
            let u = Quaternion::unit(t);
            if l.starred {
                (gz + z, u.conj())
            } else {
                (z, u)
            }
        })
        .collect()
}

/// The substitution x_m ↦ z_{4m−3} + i z_{4m−2} + j z_{4m−1} + k z_{4m} (ℂ: two components).
pub fn decommute<D: DivisionAlgebra>(p: &HPoly<D>) -> ZPoly<D> {
    let r = D::DIM;
    let gz = r * p.g;
    let mut out = ZPoly::zero(gz, p.ell);
    for (k, c) in &p.terms {
        let letters = k.word.letters(p.g);
        // expand the product unit by unit
        let mut partial: Vec<(Vec<u16>, Quaternion)> = vec![(Vec::new(), Quaternion::unit(k.units[0] as usize).scale(c))];
        for (t, l) in letters.iter().enumerate() {
            let img = letter_image::<D>(*l, p.g);
            let after = Quaternion::unit(k.units[t + 1] as usize);
            let mut next = Vec::with_capacity(partial.len() * r);
            for (w, h) in &partial {
                for (code, u) in &img {
                    let mut w2 = w.clone();
                    w2.push(*code as u16);
                    next.push((w2, h.mul(u).mul(&after)));
                }
            }
            partial = next;
        }
        for (w, h) in partial {
            out.add_term(Monomial::vec(k.col, Word(w)), &h);
        }
    }
    out
}

/// Inverse of `decommute` over ℍ:
/// z_{4m−3} ↦ ¼(x_m − i x_m i − j x_m j − k x_m k) and the three companion maps.
pub fn recompose(p: &ZPoly<Quat>) -> Result<HPoly<Quat>> {
    if !p.gz.is_multiple_of(4) {
        return Err(Error::DimensionMismatch("ℍ_c polynomials use 4g variables".into()));
    }
    let g = p.gz / 4;
    let quarter = rat(1, 4);
    // (coefficient, left unit, right unit) for each component t
    let table: [[(i64, usize, usize); 4]; 4] = [
        [(1, 0, 0), (-1, 1, 1), (-1, 2, 2), (-1, 3, 3)],
        [(-1, 1, 0), (-1, 0, 1), (-1, 3, 2), (1, 2, 3)],
        [(-1, 2, 0), (1, 3, 1), (-1, 0, 2), (-1, 1, 3)],
        [(-1, 3, 0), (-1, 2, 1), (1, 1, 2), (-1, 0, 3)],
    ];
    let zimage = |code: usize| -> HPoly<Quat> {
        let starred = code >= p.gz;
        let z = code % p.gz;
        let (m, t) = (z / 4, z % 4);
        let mut out = HPoly::zero(g, 1);
        for &(s, lu, ru) in &table[t] {
            let l = Letter { index: m + 1, starred: false };
            out.add_term(
                NcKey { col: 0, word: Word::from_letters(g, &[l]), units: vec![lu as u8, ru as u8] },
                &(&quarter * Scalar::from_integer(s.into())),
            );
        }
        if starred {
            out.star()
        } else {
            out
        }
    };
    let mut out = HPoly::zero(g, p.ell);
    for (m, h) in &p.terms {
        let mut acc = HPoly::<Quat>::constant(g, 1, 0, h);
        for &code in &m.word.0 {
            acc = acc.mul(&zimage(code as usize));
        }
        for (k, c) in acc.terms {
            out.add_term(NcKey { col: m.col, ..k }, &c);
        }
    }
    Ok(out)
}

/// Coefficientwise ψ into real rows of width DIM·ℓ.
pub fn psi<D: DivisionAlgebra>(p: &ZPoly<D>) -> VecPoly {
    let r = D::DIM;
    let sig = Signature::vector(p.gz, r * p.ell);
    let mut out = VecPoly::zero(sig);
    for (m, h) in &p.terms {
        for (t, v) in psi_scalar::<D>(h).iter().enumerate() {
            out.add_term(Monomial::vec(m.col * r + t, m.word.clone()), v);
        }
    }
    out
}

/// Real generators ψ(u_t·decommute(p)) for every unit u_t.
pub fn realify<D: DivisionAlgebra>(p: &HPoly<D>) -> Vec<VecPoly> {
    let z = decommute(p);
    (0..D::DIM).map(|t| psi(&z.left_scalar(&Quaternion::unit(t)))).collect()
}

/// Float matrix over 𝔽: Σ_t u_t parts[t].
#[derive(Clone, Debug, PartialEq)]
pub struct HMat {
    pub parts: Vec<DMatrix<f64>>,
}

impl HMat {
    pub fn zeros(dim: usize, r: usize, c: usize) -> Self {
        HMat { parts: vec![DMatrix::zeros(r, c); dim] }
    }

    pub fn real(dim: usize, m: DMatrix<f64>) -> Self {
        let mut out = Self::zeros(dim, m.nrows(), m.ncols());
        out.parts[0] = m;
        out
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn mul(&self, o: &HMat) -> HMat {
        let d = self.dim();
        let mut out = HMat::zeros(d, self.parts[0].nrows(), o.parts[0].ncols());
        for s in 0..d {
            for t in 0..d {
                let (neg, u) = unit_mul(s, t);
                let p = &self.parts[s] * &o.parts[t];
                if neg {
                    out.parts[u] -= p;
                } else {
                    out.parts[u] += p;
                }
            }
        }
        out
    }

    /// h·self for a scalar h.
    pub fn scalar_left(&self, h: &Quaternion) -> HMat {
        let d = self.dim();
        let hs = HMat { parts: (0..d).map(|t| DMatrix::from_element(1, 1, to_f64(h.part(t)))).collect() };
        let mut out = HMat::zeros(d, self.parts[0].nrows(), self.parts[0].ncols());
        for s in 0..d {
            for t in 0..d {
                let (neg, u) = unit_mul(s, t);
                let p = &self.parts[t] * hs.parts[s][(0, 0)];
                if neg {
                    out.parts[u] -= p;
                } else {
                    out.parts[u] += p;
                }
            }
        }
        out
    }

    pub fn unit_left(&self, t: usize) -> HMat {
        self.scalar_left(&Quaternion::unit(t))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> HMat {
        HMat {
            parts: self
                .parts
                .iter()
                .enumerate()
                .map(|(t, m)| if t == 0 { m.transpose() } else { -m.transpose() })
                .collect(),
        }
    }

    pub fn add(&self, o: &HMat) -> HMat {
        HMat { parts: self.parts.iter().zip(&o.parts).map(|(a, b)| a + b).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.parts.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// Entrywise real part.
    pub fn re(&self) -> &DMatrix<f64> {
        &self.parts[0]
    }

    pub fn rows(&self, start: usize, n: usize) -> HMat {
        HMat { parts: self.parts.iter().map(|m| m.rows(start, n).into_owned()).collect() }
    }
}

/// p(X)w for a row polynomial over 𝔽, X n×n over 𝔽 and w stacked (ℓ·n rows, any column count).
pub fn eval_hpoly<D: DivisionAlgebra>(p: &HPoly<D>, x: &[HMat], w: &HMat) -> Result<HMat> {
    if x.len() != p.g {
        return Err(Error::SignatureMismatch(format!("{} matrices for {} variables", x.len(), p.g)));
    }
    let n = w.parts[0].nrows() / p.ell.max(1);
    let xs: Vec<HMat> = x.iter().map(HMat::adjoint).collect();
    let mut out = HMat::zeros(D::DIM, n, w.parts[0].ncols());
    for (k, c) in &p.terms {
        // evaluate right to left: u_{ts} acts last on the vector first
        let letters = k.word.letters(p.g);
        let mut v = w.rows(k.col * n, n).unit_left(*k.units.last().unwrap() as usize);
        for t in (0..letters.len()).rev() {
            let l = letters[t];
            let m = if l.starred { &xs[l.index - 1] } else { &x[l.index - 1] };
            v = m.mul(&v).unit_left(k.units[t] as usize);
        }
        out = out.add(&v.scalar_left(&Quaternion::real(c.clone())));
    }
    Ok(out)
}

/// r(Z)w for a commuting-letter polynomial at real Z.
pub fn eval_zpoly<D: DivisionAlgebra>(p: &ZPoly<D>, z: &[DMatrix<f64>], w: &HMat) -> HMat {
    let n = w.parts[0].nrows() / p.ell.max(1);
    let mut out = HMat::zeros(D::DIM, n, 1);
    for (m, h) in &p.terms {
        let mut wm = DMatrix::identity(n, n);
        for &code in &m.word.0 {
            let c = code as usize;
            let zm = if c >= p.gz { z[c - p.gz].transpose() } else { z[c].clone() };
            wm *= zm;
        }
        let v = HMat::real(D::DIM, wm).mul(&w.rows(m.col * n, n));
        out = out.add(&v.scalar_left(h));
    }
    out
}

/// Pull-back of a real witness: X_m = Σ u_t Z_{m,t}, w_j = Σ conj(u_t) v_{j,t}.
pub fn pull_back<D: DivisionAlgebra>(z: &[DMatrix<f64>], v: &nalgebra::DVector<f64>, g: usize, ell: usize) -> (Vec<HMat>, HMat) {
    let r = D::DIM;
    let n = z.first().map(|m| m.nrows()).unwrap_or(0);
    let x = (0..g).map(|m| HMat { parts: (0..r).map(|t| z[zvar(m, t, r)].clone()).collect() }).collect();
    let mut w = HMat::zeros(r, ell * n, 1);
    for j in 0..ell {
        for t in 0..r {
            let block = v.rows((j * r + t) * n, n);
            let sign = if t == 0 { 1.0 } else { -1.0 };
            w.parts[t].rows_mut(j * n, n).copy_from(&(block * sign));
        }
    }
    (x, w)
}

/// Witness over 𝔽 with its residuals.
#[derive(Clone, Debug)]
pub struct FieldWitness {
    pub n: usize,
    pub x: Vec<HMat>,
    pub w: HMat,
    /// max_i ‖p_i(X)w‖.
    pub gen_residual: f64,
    /// ‖q(X)w‖.
    pub q_residual: f64,
}

#[derive(Clone, Debug)]
pub struct FieldMembership {
    pub member: bool,
    pub real_basis: GroebnerBasis,
    pub witness: Option<FieldWitness>,
}

/// Membership of every row of q in the real radical of the module generated by `gens` over 𝔽.
/// Returns the real radical of the realified module and the realified rows of q it misses.
pub fn member_over<D: DivisionAlgebra>(
    gens: &[HPoly<D>],
    q: &[HPoly<D>],
    opts: &RrOptions,
) -> Result<(RealRadicalResult, Vec<VecPoly>)> {
    let Some(first) = q.first() else {
        return Err(Error::DimensionMismatch("empty query".into()));
    };
    let (g, ell) = (first.g, first.ell);
    for p in gens.iter().chain(q) {
        if p.g != g || p.ell != ell {
            return Err(Error::DimensionMismatch(format!("polynomial {p} does not match the signature")));
        }
    }
    let r = D::DIM;
    let sig = Signature::vector(r * g, r * ell);
    let real_gens: Vec<VecPoly> = gens.iter().flat_map(realify).collect();
    let rr = real_radical_with(sig, &real_gens, opts)?;
    let missing: Vec<VecPoly> = q.iter().flat_map(realify).filter(|row| !rr.basis.contains(row)).collect();
    Ok((rr, missing))
}

/// Membership of q in the real radical of the module generated by `gens` over 𝔽,
/// with a pulled-back witness when q is not a member.
pub fn solve_over<D: DivisionAlgebra>(
    gens: &[HPoly<D>],
    q: &HPoly<D>,
    opts: &RrOptions,
    chips: WitnessChips,
) -> Result<FieldMembership> {
    let (g, ell) = (q.g, q.ell);
    let (rr, missing) = member_over(gens, std::slice::from_ref(q), opts)?;
    if missing.is_empty() {
        return Ok(FieldMembership { member: true, real_basis: rr.basis, witness: None });
    }
    let wit = gns_witness_with(&rr.basis, &missing, chips, &opts.sdp)?;
    let (x, w) = pull_back::<D>(&wit.x.mats, &wit.v, g, ell);
    let mut gen_residual: f64 = 0.0;
    for p in gens {
        gen_residual = gen_residual.max(eval_hpoly(p, &x, &w)?.norm());
    }
    let q_residual = eval_hpoly(q, &x, &w)?.norm();
    Ok(FieldMembership {
        member: false,
        real_basis: rr.basis,
        witness: Some(FieldWitness { n: wit.n, x, w, gen_residual, q_residual }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::int;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(s: &str) -> HPoly<Quat> {
        parse_hpoly(s, 2, 1).unwrap()
    }

    fn q(a: i64, b: i64, c: i64, d: i64) -> Quaternion {
        Quaternion::new(int(a), int(b), int(c), int(d))
    }

    #[test]
    fn regular_representation() {
        let (i, j, k) = (Quaternion::unit(1), Quaternion::unit(2), Quaternion::unit(3));
        assert_eq!(phi(&i).mul(&phi(&j)), phi(&k));
        assert_eq!(psi_scalar::<Quat>(&q(1, 2, 0, 0)), vec![int(1), int(2), int(0), int(0)]);
        let a = q(1, -2, 3, 5);
        let b = q(-4, 1, 0, 2);
        assert_eq!(phi(&a.mul(&b)), phi(&a).mul(&phi(&b)));
        assert_eq!(phi(&a.conj()), phi(&a).transpose());
        assert_eq!(phi_dim::<Complex>(&q(1, 2, 0, 0)).get(1, 0), &int(-2));
    }

    #[test]
    fn decommute_round_trip() {
        let x2s = h("x2*");
        assert_eq!(recompose(&decommute(&x2s)).unwrap(), x2s);
        for s in ["x1", "i x1 j - 2 x2* k x1", "(1,2,-1,3) x1* x2 x1 + k", "x1 i x1* + 3/2"] {
            let p = h(s);
            assert_eq!(recompose(&decommute(&p)).unwrap(), p, "{s}");
        }
        // x1 = z1 + i z2 + j z3 + k z4
        let z = decommute(&h("x1"));
        assert_eq!(z.terms.len(), 4);
        assert_eq!(z.terms[&Monomial::vec(0, Word(vec![1]))], Quaternion::unit(1));
    }

    #[test]
    fn complex_units_are_central() {
        let p: HPoly<Complex> = parse_hpoly("x1 i x2", 2, 1).unwrap();
        let r: HPoly<Complex> = parse_hpoly("i x1 x2", 2, 1).unwrap();
        assert_eq!(p, r);
        assert!(parse_hpoly::<Complex>("j x1", 2, 1).is_err());
        assert_eq!(p.star().to_string(), "-i x2* x1*");
    }

    fn rand_mats(rng: &mut ChaCha8Rng, count: usize, n: usize) -> Vec<DMatrix<f64>> {
        (0..count).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn evaluation_commutes_with_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let g = 2;
        let z = rand_mats(&mut rng, 4 * g, n);
        let v = DVector::from_fn(4 * 2 * n, |_, _| rng.random_range(-1.0..1.0));
        let r: HPoly<Quat> = parse_hpoly("e1 (1,2,0,-1) x1 j x2* + e2 k x1* x1 - e2 i", g, 2).unwrap();
        let (x, w) = pull_back::<Quat>(&z, &v, g, 2);
        let lhs = eval_hpoly(&r, &x, &w).unwrap();
        let rz = decommute(&r);
        let mid = eval_zpoly(&rz, &z, &w);
        assert!(lhs.add(&HMat { parts: mid.parts.iter().map(|m| -m).collect() }).norm() < 1e-12);
        // Re(r̂(Z)w) = ψ(r̂)(Z)v
        let real = psi(&rz).evaluate(&crate::freealg::MatrixTuple::new(z.clone()).unwrap()).unwrap();
        let rhs = real * &v;
        assert!((lhs.re().column(0) - rhs.column(0)).norm() < 1e-12);
    }

    #[test]
    fn quaternion_membership() {
        let opts = RrOptions::default();
        let gens = vec![h("x1")];
        let out = solve_over(&gens, &h("x2"), &opts, WitnessChips::Minimal).unwrap();
        assert!(!out.member);
        let w = out.witness.unwrap();
        assert!(w.gen_residual <= 1e-8 * (1.0 + w.w.norm()));
        assert!(w.q_residual >= 1e-6);
        let out = solve_over(&gens, &h("x1 j"), &opts, WitnessChips::Minimal).unwrap();
        assert!(!out.member);
        for s in ["i x1", "x2 x1", "x2 j x1", "k x1* x1"] {
            assert!(solve_over(&gens, &h(s), &opts, WitnessChips::Minimal).unwrap().member, "{s}");
        }
        let out = solve_over(&[h("x1* x1")], &h("x1"), &opts, WitnessChips::Minimal).unwrap();
        assert!(out.member);
    }

    #[test]
    fn complex_membership() {
        let opts = RrOptions::default();
        let c = |s: &str| parse_hpoly::<Complex>(s, 1, 1).unwrap();
        let out = solve_over(&[c("x1* x1")], &c("x1"), &opts, WitnessChips::Minimal).unwrap();
        assert!(out.member);
        let out = solve_over(&[c("x1* x1")], &c("i x1"), &opts, WitnessChips::Minimal).unwrap();
        assert!(out.member);
        let out = solve_over(&[c("x1")], &c("x1*"), &opts, WitnessChips::Minimal).unwrap();
        assert!(!out.member);
        let w = out.witness.unwrap();
        assert!(w.q_residual >= 1e-6 && w.gen_residual < 1e-8);
    }
}

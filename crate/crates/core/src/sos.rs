//! SOS detection: the linear matrix pencil over chip monomials, zero-diagonal
//! reduction, exact certificate extraction and verification.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::chips::ChipSpace;
use crate::error::{Error, Result};
use crate::freealg::{MatPoly, Monomial, Scalar, Signature, VecPoly};
use crate::groebner::GroebnerBasis;
use crate::linalg::{ldlt_pd, rational_as_squares, rationalize, solve_sparse, Echelon, QMat, SparseRow};
use crate::sdp::{psd_search, PsdOutcome, SdpOptions, SymMatrix};
use crate::syntax::{format_scalar, format_word, print_poly};

/// Multiplier variable α_{m,j}: chip monomial m times basis element j.
pub type AlphaVar = (Monomial, usize);

/// One B-type generator of the pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct BTerm {
    /// The free multiplier variable this generator is keyed by.
    pub label: AlphaVar,
    /// Full multiplier assignment.
    pub alpha: BTreeMap<AlphaVar, Scalar>,
    pub mat: QMat,
}

/// L(α, ζ) = Σ α B + Σ ζ Z over the monomial vector M.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub monos: Vec<Monomial>,
    pub bmats: Vec<BTerm>,
    pub zbasis: Vec<QMat>,
}

impl Pencil {
    pub fn size(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty() || (self.bmats.is_empty() && self.zbasis.is_empty())
    }

    pub fn generators(&self) -> Vec<&QMat> {
        self.bmats.iter().map(|b| &b.mat).chain(self.zbasis.iter()).collect()
    }

    pub fn float_span(&self) -> Vec<SymMatrix> {
        self.generators().into_iter().map(|m| SymMatrix::from_any(m.to_f64())).collect()
    }

    /// Text dump for debugging.
    pub fn dump(&self, g: usize) -> String {
        let mut out = String::new();
        out.push_str(&format!("M ({}):\n", self.monos.len()));
        for m in &self.monos {
            out.push_str(&format!("  e{} {}\n", m.col + 1, format_word(&m.word, g)));
        }
        let fmt_mat = |m: &QMat| -> String {
            (0..m.rows)
                .map(|i| {
                    let row: Vec<String> = (0..m.cols).map(|j| format_scalar(m.get(i, j))).collect();
                    format!("    [{}]", row.join(", "))
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        for b in &self.bmats {
            out.push_str(&format!(
                "B (chip e{} {}; basis {}):\n{}\n",
                b.label.0.col + 1,
                format_word(&b.label.0.word, g),
                b.label.1 + 1,
                fmt_mat(&b.mat)
            ));
        }
        for (i, z) in self.zbasis.iter().enumerate() {
            out.push_str(&format!("Z {}:\n{}\n", i + 1, fmt_mat(z)));
        }
        out
    }
}

/// m*ϑ + ϑ*m.
fn sym_product(m: &Monomial, theta: &VecPoly) -> MatPoly {
    let mp = MatPoly::monomial(theta.sig, m.clone(), Scalar::one());
    let a = MatPoly::star_mul(&mp, theta);
    let b = MatPoly::star_mul(theta, &mp);
    a.add(&b).expect("same signature")
}

/// All products a*b over M, with a representative index pair per product.
fn coincidence_map(monos: &[Monomial], g: usize) -> BTreeMap<Monomial, (usize, usize)> {
    let mut rep = BTreeMap::new();
    for (ia, a) in monos.iter().enumerate() {
        for (ib, b) in monos.iter().enumerate() {
            rep.entry(Monomial::star_mul(a, b, g)).or_insert((ia, ib));
        }
    }
    rep
}

/// Symmetric B with M*BM = s, for s supported on products of M.
fn coincidence_matrix(s: &MatPoly, monos: &[Monomial], rep: &BTreeMap<Monomial, (usize, usize)>, g: usize) -> QMat {
    let n = monos.len();
    let mut b = QMat::zeros(n, n);
    let half = Scalar::new(BigInt::from(1), BigInt::from(2));
    for (mu, c) in &s.terms {
        let st = mu.star(g);
        let (ia, ib) = rep[mu];
        if st == *mu {
            if ia == ib {
                b.add_at(ia, ia, c);
            } else {
                let h = c * &half;
                b.add_at(ia, ib, &h);
                b.add_at(ib, ia, &h);
            }
        } else if *mu < st {
            debug_assert_eq!(s.coeff(&st), *c, "symmetric input");
            b.add_at(ia, ib, c);
            b.add_at(ib, ia, c);
        }
    }
    b
}

/// Basis of {Z symmetric : M*ZM = 0}.
fn zero_pencil_basis(monos: &[Monomial], g: usize) -> Vec<QMat> {
    let n = monos.len();
    let mut var = Vec::new();
    for a in 0..n {
        for b in a..n {
            var.push((a, b));
        }
    }
    // group variables by the product monomial they produce
    let mut rows: BTreeMap<Monomial, SparseRow> = BTreeMap::new();
    for (v, &(a, b)) in var.iter().enumerate() {
        let p = Monomial::star_mul(&monos[a], &monos[b], g);
        *rows.entry(p.clone()).or_default().entry(v).or_insert_with(Scalar::zero) += Scalar::one();
        if a != b {
            let q = Monomial::star_mul(&monos[b], &monos[a], g);
            *rows.entry(q).or_default().entry(v).or_insert_with(Scalar::zero) += Scalar::one();
        }
    }
    let mut ech = Echelon::new();
    for (_, r) in rows {
        ech.insert(r.into_iter().filter(|(_, c)| !c.is_zero()).collect());
    }
    ech.nullspace(var.len())
        .into_iter()
        .map(|v| {
            let mut z = QMat::zeros(n, n);
            for (k, c) in v {
                let (a, b) = var[k];
                z.set(a, b, c.clone());
                z.set(b, a, c);
            }
            z
        })
        .collect()
}

/// Builds the pencil for basis G over chip space C (step (b) elimination included).
pub fn assemble_pencil(gb: &GroebnerBasis, c: &ChipSpace) -> Pencil {
    let g = gb.sig.g;
    let monos = c.to_vec();
    let rep = coincidence_map(&monos, g);
    let vars: Vec<AlphaVar> =
        monos.iter().flat_map(|m| (0..gb.elems.len()).map(move |j| (m.clone(), j))).collect();
    let prods: Vec<MatPoly> = vars.iter().map(|(m, j)| sym_product(m, &gb.elems[*j])).collect();
    // monomials outside C*C must cancel
    let mut rows: BTreeMap<Monomial, SparseRow> = BTreeMap::new();
    for (v, p) in prods.iter().enumerate() {
        for (mu, coef) in &p.terms {
            if !rep.contains_key(mu) {
                rows.entry(mu.clone()).or_default().insert(v, coef.clone());
            }
        }
    }
    let mut ech = Echelon::new();
    for (_, r) in rows {
        ech.insert(r);
    }
    let free: Vec<usize> = (0..vars.len()).filter(|v| !ech.is_pivot(*v)).collect();
    let mut bmats = Vec::new();
    for (basis_vec, f) in ech.nullspace(vars.len()).into_iter().zip(free) {
        let mut s = MatPoly::zero(gb.sig.square());
        let mut alpha = BTreeMap::new();
        for (v, coef) in &basis_vec {
            s.axpy(coef, &prods[*v]);
            alpha.insert(vars[*v].clone(), coef.clone());
        }
        if s.is_zero() {
            continue;
        }
        let mat = coincidence_matrix(&s, &monos, &rep, g);
        bmats.push(BTerm { label: vars[f].clone(), alpha, mat });
    }
    let zbasis = zero_pencil_basis(&monos, g);
    Pencil { monos, bmats, zbasis }
}

fn delete_index(m: &QMat, i: usize) -> QMat {
    let keep: Vec<usize> = (0..m.rows).filter(|&r| r != i).collect();
    QMat::from_fn(keep.len(), keep.len(), |a, b| m.get(keep[a], keep[b]).clone())
}

/// Removes indices whose diagonal entry vanishes on the whole pencil,
/// forcing the corresponding rows and columns to zero; repeats to a fixpoint.
pub fn reduce_zero_diagonal(p: &Pencil) -> Pencil {
    let mut cur = p.clone();
    loop {
        if cur.monos.is_empty() {
            return cur;
        }
        let gens: Vec<&QMat> = cur.generators();
        let n = cur.monos.len();
        let Some(i) = (0..n).find(|&i| gens.iter().all(|m| m.get(i, i).is_zero())) else {
            return cur;
        };
        let nb = cur.bmats.len();
        let mut ech = Echelon::new();
        for j in 0..n {
            let row: SparseRow = gens
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.get(i, j).is_zero())
                .map(|(v, m)| (v, m.get(i, j).clone()))
                .collect();
            if !row.is_empty() {
                ech.insert(row);
            }
        }
        let mut bmats = Vec::new();
        let mut zbasis = Vec::new();
        for v in ech.nullspace(gens.len()) {
            let mut mat = QMat::zeros(n, n);
            let mut alpha: BTreeMap<AlphaVar, Scalar> = BTreeMap::new();
            let mut label = None;
            for (gidx, coef) in &v {
                let gm = gens[*gidx];
                for (e, x) in mat.data.iter_mut().zip(&gm.data) {
                    if !x.is_zero() {
                        *e += coef * x;
                    }
                }
                if *gidx < nb {
                    let bt = &cur.bmats[*gidx];
                    label.get_or_insert_with(|| bt.label.clone());
                    for (k, a) in &bt.alpha {
                        let e = alpha.entry(k.clone()).or_insert_with(Scalar::zero);
                        *e += coef * a;
                    }
                }
            }
            alpha.retain(|_, a| !a.is_zero());
            let mat = delete_index(&mat, i);
            match label {
                Some(label) if !alpha.is_empty() => bmats.push(BTerm { label, alpha, mat }),
                _ => {
                    if !mat.is_zero() {
                        zbasis.push(mat)
                    }
                }
            }
        }
        let mut monos = cur.monos.clone();
        monos.remove(i);
        cur = Pencil { monos, bmats, zbasis };
    }
}

/// Columns of the linear system Σ α_{m,j}(m*ϑ_j + ϑ_j*m).
fn multiplier_columns(gb: &GroebnerBasis, c: &ChipSpace) -> Vec<BTreeMap<Monomial, Scalar>> {
    let mut cols = Vec::new();
    for m in c.iter() {
        for th in &gb.elems {
            cols.push(sym_product(m, th).terms);
        }
    }
    cols
}

/// Exact check that an ℓ×ℓ polynomial equals Σ_j (q_j*ι_j + ι_j*q_j) for some q_j in the span of C.
pub fn in_symmetric_module(target: &MatPoly, gb: &GroebnerBasis, c: &ChipSpace) -> bool {
    target.is_zero() || solve_sparse(&multiplier_columns(gb, c), &target.terms).is_some()
}

/// Exact check that Σφ*φ = Σ_j (q_j*ι_j + ι_j*q_j) for some q_j in the span of C.
pub fn verify_certificate_exact(phis: &[VecPoly], gb: &GroebnerBasis, c: &ChipSpace) -> bool {
    let mut target = MatPoly::zero(gb.sig.square());
    for p in phis {
        target = target.add(&MatPoly::star_mul(p, p)).expect("same signature");
    }
    in_symmetric_module(&target, gb, c)
}

/// M* L M for a Gram matrix L indexed by the pencil monomials.
pub fn expand_gram(p: &Pencil, l: &QMat, sig: Signature) -> MatPoly {
    let mut out = MatPoly::zero(sig.square());
    for (a, ma) in p.monos.iter().enumerate() {
        for (b, mb) in p.monos.iter().enumerate() {
            let c = l.get(a, b);
            if !c.is_zero() {
                out.add_term(Monomial::star_mul(ma, mb, sig.g), c);
            }
        }
    }
    out
}

/// Row pivots of a tall matrix with orthonormal columns (greedy partial pivoting).
fn pivot_rows(v: &DMatrix<f64>) -> Vec<usize> {
    let (k, r) = v.shape();
    let mut a = v.clone();
    let mut used = vec![false; k];
    let mut piv = Vec::with_capacity(r);
    for col in 0..r {
        let mut best = (0.0, usize::MAX);
        for row in 0..k {
            if !used[row] && a[(row, col)].abs() > best.0 {
                best = (a[(row, col)].abs(), row);
            }
        }
        let pr = best.1;
        if pr == usize::MAX {
            break;
        }
        used[pr] = true;
        piv.push(pr);
        for row in 0..k {
            if row != pr {
                let f = a[(row, col)] / a[(pr, col)];
                for c2 in col..r {
                    let t = a[(pr, c2)];
                    a[(row, c2)] -= f * t;
                }
            }
        }
    }
    piv
}

/// Turns a numerical PSD pencil element into exact square roots.
pub fn extract_certificate(
    p: &Pencil,
    solution: &SymMatrix,
    gb: &GroebnerBasis,
    c: &ChipSpace,
) -> Result<Vec<VecPoly>> {
    let k = p.monos.len();
    if solution.norm() == 0.0 || k == 0 {
        return Ok(Vec::new());
    }
    let sig = gb.sig;
    let gens = p.generators();
    let eig = SymmetricEigen::new(solution.m.clone());
    let lmax = eig.eigenvalues.max();
    let range: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-6 * lmax).collect();
    let r = range.len();
    let vr = DMatrix::from_columns(&range.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    let piv = if r == k { (0..k).collect() } else { pivot_rows(&vr) };
    let basis_r = if r == k {
        DMatrix::identity(k, k)
    } else {
        let block = DMatrix::from_fn(r, r, |a, b| vr[(piv[a], b)]);
        match block.try_inverse() {
            Some(inv) => &vr * inv,
            None => return Err(Error::CertificateUnverified("singular range block".into())),
        }
    };
    let mut last_err = String::new();
    for digits in [3u32, 6, 9, 12] {
        let den = 10u64.pow(digits);
        // exact range basis R with identity rows at the pivots
        let rmat = QMat::from_fn(k, r, |i, j| {
            if let Some(pos) = piv.iter().position(|&q| q == i) {
                if pos == j {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            } else {
                rationalize(basis_r[(i, j)], den)
            }
        });
        // {(coeffs, S) : Σ coeff·G = R S Rᵀ}
        let nsym = r * (r + 1) / 2;
        let ngen = gens.len();
        let mut sidx = Vec::new();
        for a in 0..r {
            for b in a..r {
                sidx.push((a, b));
            }
        }
        let mut rows: BTreeMap<(usize, usize), SparseRow> = BTreeMap::new();
        for (gi, gm) in gens.iter().enumerate() {
            for i in 0..k {
                for j in i..k {
                    let v = gm.get(i, j);
                    if !v.is_zero() {
                        rows.entry((i, j)).or_default().insert(gi, v.clone());
                    }
                }
            }
        }
        for (si, &(a, b)) in sidx.iter().enumerate() {
            for i in 0..k {
                for j in i..k {
                    // (R E_ab Rᵀ + R E_ba Rᵀ)_{ij} for a ≠ b, R E_aa Rᵀ otherwise
                    let mut v = rmat.get(i, a) * rmat.get(j, b);
                    if a != b {
                        v += rmat.get(i, b) * rmat.get(j, a);
                    }
                    if !v.is_zero() {
                        let e = rows.entry((i, j)).or_default().entry(ngen + si).or_insert_with(Scalar::zero);
                        *e -= v;
                    }
                }
            }
        }
        let mut ech = Echelon::new();
        for (_, row) in rows {
            let row: SparseRow = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            if !row.is_empty() {
                ech.insert(row);
            }
        }
        let sbasis: Vec<QMat> = ech
            .nullspace(ngen + nsym)
            .into_iter()
            .map(|v| {
                let mut s = QMat::zeros(r, r);
                for (col, val) in v {
                    if col >= ngen {
                        let (a, b) = sidx[col - ngen];
                        s.set(a, b, val.clone());
                        s.set(b, a, val);
                    }
                }
                s
            })
            .filter(|s| !s.is_zero())
            .collect();
        if sbasis.is_empty() {
            last_err = format!("no exact pencil element on the rounded range (10^{digits})");
            continue;
        }
        // target S0 = Λ restricted to the pivot block
        let s0 = DMatrix::from_fn(r, r, |a, b| solution.m[(piv[a], piv[b])]);
        let cols: Vec<DVector<f64>> = sbasis.iter().map(|s| SymMatrix::from_any(s.to_f64()).svec()).collect();
        let amat = DMatrix::from_columns(&cols);
        let target = SymMatrix::from_any(s0).svec();
        let coords = match amat.svd(true, true).solve(&target, 1e-14) {
            Ok(c) => c,
            Err(e) => {
                last_err = e.to_string();
                continue;
            }
        };
        let mut s_exact = QMat::zeros(r, r);
        for (t, s) in sbasis.iter().enumerate() {
            let ct = rationalize(coords[t], den);
            if !ct.is_zero() {
                s_exact = s_exact.add(&s.scale(&ct));
            }
        }
        let Some((l, d)) = ldlt_pd(&s_exact) else {
            last_err = format!("rounded Gram matrix not positive definite (10^{digits})");
            continue;
        };
        let rl = rmat.mul(&l);
        let mut phis = Vec::new();
        for (col, dk) in d.iter().enumerate() {
            let mut base = VecPoly::zero(sig);
            for i in 0..k {
                let v = rl.get(i, col);
                if !v.is_zero() {
                    base.add_term(p.monos[i].clone(), v);
                }
            }
            if base.is_zero() {
                continue;
            }
            for s in rational_as_squares(dk) {
                phis.push(base.scale(&s));
            }
        }
        if verify_certificate_exact(&phis, gb, c) {
            return Ok(phis);
        }
        last_err = format!("exact verification failed at 10^{digits}");
    }
    let float_data: Vec<String> = solution.m.iter().map(|v| format!("{v:.6e}")).collect();
    Err(Error::CertificateUnverified(format!("{last_err}; solution entries [{}]", float_data.join(", "))))
}

/// Outcome of one SOS detection round.
#[derive(Clone, Debug)]
pub struct SosRound {
    /// Exact square roots; empty when no nonzero SOS exists.
    pub certificate: Vec<VecPoly>,
    /// Pencil size after zero-diagonal reduction.
    pub pencil_size: usize,
    /// Largest degree among the pencil polynomials m*ϑ + ϑ*m.
    pub pencil_degree: i64,
}

/// Runs steps (b)–(h): assemble, reduce, search, extract.
pub fn sos_round(gb: &GroebnerBasis, c: &ChipSpace, opts: &SdpOptions) -> Result<SosRound> {
    let pencil = assemble_pencil(gb, c);
    let pencil_degree = c
        .iter()
        .flat_map(|m| gb.elems.iter().map(move |t| m.degree() as i64 + t.degree()))
        .max()
        .unwrap_or(-1);
    let reduced = reduce_zero_diagonal(&pencil);
    if reduced.is_empty() {
        return Ok(SosRound { certificate: Vec::new(), pencil_size: reduced.size(), pencil_degree });
    }
    let certificate = match psd_search(&reduced.float_span(), opts)? {
        PsdOutcome::Empty { .. } => Vec::new(),
        PsdOutcome::Found { matrix, .. } => extract_certificate(&reduced, &matrix, gb, c)?,
    };
    Ok(SosRound { certificate, pencil_size: reduced.size(), pencil_degree })
}

/// Human-readable certificate lines.
pub fn format_certificate(phis: &[VecPoly]) -> Vec<String> {
    phis.iter().map(print_poly).collect()
}

/// Exact check that a rational symmetric matrix has a nonnegative diagonal (cheap sanity helper).
pub fn nonnegative_diagonal(m: &QMat) -> bool {
    (0..m.rows).all(|i| !m.get(i, i).is_negative())
}

/// Float value of a pencil element Σ coeffs·generators.
pub fn pencil_element(p: &Pencil, coeffs: &[f64]) -> DMatrix<f64> {
    let k = p.size();
    let mut m = DMatrix::zeros(k, k);
    for (g, c) in p.generators().into_iter().zip(coeffs) {
        m += g.to_f64() * *c;
    }
    m
}

/// Distinct ℓ×ℓ monomials spanned by the pencil products (diagnostics).
pub fn pencil_support(p: &Pencil, g: usize) -> BTreeSet<Monomial> {
    let mut s = BTreeSet::new();
    for a in &p.monos {
        for b in &p.monos {
            s.insert(Monomial::star_mul(a, b, g));
        }
    }
    s
}

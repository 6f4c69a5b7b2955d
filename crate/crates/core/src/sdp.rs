//! Dense SDP core: decides whether a linear span of symmetric matrices
//! contains a nonzero positive semidefinite element.
//!
//! The workhorse is `max t s.t. L(y) ⪰ tI, tr L(y) = 1`, solved by a feasible
//! primal-dual interior-point method (HKM direction, Mehrotra corrector). Its
//! primal variable X certifies infeasibility: X − t*I is orthogonal to the span.
//! Boundary cases (t* ≈ 0) are resolved by facial reduction onto ker X.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    pub k: usize,
    pub m: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetrizes from the upper triangle.
    pub fn from_upper(m: DMatrix<f64>) -> Self {
        let k = m.nrows();
        let mut s = m.clone();
        for i in 0..k {
            for j in 0..i {
                s[(i, j)] = m[(j, i)];
            }
        }
        SymMatrix { k, m: s }
    }

    /// Symmetrizes by averaging.
    pub fn from_any(m: DMatrix<f64>) -> Self {
        let k = m.nrows();
        let s = (&m + m.transpose()) * 0.5;
        SymMatrix { k, m: s }
    }

    pub fn identity(k: usize) -> Self {
        SymMatrix { k, m: DMatrix::identity(k, k) }
    }

    pub fn zeros(k: usize) -> Self {
        SymMatrix { k, m: DMatrix::zeros(k, k) }
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn min_eig(&self) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        SymmetricEigen::new(self.m.clone()).eigenvalues.min()
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    /// svec with √2-scaled off-diagonals, so the dot product is tr(AB).
    pub fn svec(&self) -> DVector<f64> {
        svec(&self.m)
    }
}

fn svec_len(k: usize) -> usize {
    k * (k + 1) / 2
}

fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let k = m.nrows();
    let mut v = DVector::zeros(svec_len(k));
    let mut t = 0;
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..k {
        for j in i..k {
            v[t] = if i == j { m[(i, i)] } else { r2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
            t += 1;
        }
    }
    v
}

fn smat(v: &DVector<f64>, k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut t = 0;
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..k {
        for j in i..k {
            if i == j {
                m[(i, i)] = v[t];
            } else {
                m[(i, j)] = v[t] / r2;
                m[(j, i)] = v[t] / r2;
            }
            t += 1;
        }
    }
    m
}

/// Orthonormal basis (columns) of the span of the given vectors.
fn orthonormal_columns(vs: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out: Vec<DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return out;
    }
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let n = w.norm();
        if n > rel_tol * scale {
            out.push(w / n);
        }
    }
    out
}

/// Basis of the orthogonal complement of a span inside 𝕊^k.
pub fn orthogonal_complement(span: &[SymMatrix], k: usize) -> Vec<SymMatrix> {
    let vs: Vec<DVector<f64>> = span.iter().map(SymMatrix::svec).collect();
    let q = orthonormal_columns(&vs, 1e-10);
    let n = svec_len(k);
    let mut basis = q.clone();
    let mut out = Vec::new();
    for e in 0..n {
        let mut w = DVector::zeros(n);
        w[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
        }
        let nw = w.norm();
        if nw > 1e-8 {
            let w = w / nw;
            basis.push(w.clone());
            out.push(SymMatrix { k, m: smat(&w, k) });
        }
    }
    out
}

/// Tunables of the interior-point iteration.
#[derive(Clone, Debug)]
pub struct SdpOptions {
    /// Relative duality-gap target.
    pub gap_tol: f64,
    /// |t*| above this decides strictness.
    pub strict_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { gap_tol: 1e-10, strict_tol: 1e-6, max_iter: 150 }
    }
}

/// Result of `max t s.t. L(y) ⪰ tI, tr L(y) = 1`.
#[derive(Clone, Debug)]
pub struct MaxMinEig {
    /// Dual objective (a lower bound on t*).
    pub t: f64,
    /// Primal objective (an upper bound on t*).
    pub upper: f64,
    /// Optimal trace-one element of the span.
    pub lambda: SymMatrix,
    /// Coefficients of `lambda` in the orthonormalized basis.
    pub coords: DVector<f64>,
    /// Primal matrix: PSD, trace one, orthogonal to the traceless part of the span.
    pub x: SymMatrix,
    pub iterations: usize,
}

struct Problem {
    c: DMatrix<f64>,
    /// G_j for the free directions; the last entry is the identity (variable t).
    g: Vec<DMatrix<f64>>,
}

fn chol_inverse(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    nalgebra::Cholesky::new(s.clone()).map(|c| c.inverse())
}

/// Largest α ≤ 1 (times 0.95) keeping `m + α d` positive definite.
fn step_length(m: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let Some(ch) = nalgebra::Cholesky::new(m.clone()) else { return 0.0 };
    let l = ch.l();
    let Some(li) = l.clone().try_inverse() else { return 0.0 };
    let w = &li * d * li.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(w).eigenvalues.min();
    if lmin >= -1e-300 {
        1.0
    } else {
        (0.95 * (-1.0 / lmin)).min(1.0)
    }
}

/// tr(AB) for symmetric A.
fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn flat(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Solves the max-min-eigenvalue problem over an orthonormal basis `q`
/// with trace vector of nonzero norm.
fn solve_max_min_eig(q: &[DMatrix<f64>], k: usize, opts: &SdpOptions) -> Result<MaxMinEig> {
    let p = q.len();
    let tau = DVector::from_iterator(p, q.iter().map(|m| m.trace()));
    let tn = tau.norm_squared();
    let y0 = &tau / tn;
    // orthonormal basis of τ⊥ in ℝ^p: columns 2..p of the Householder
    // reflector sending τ/‖τ‖ to e_1
    let mut u = &tau / tn.sqrt();
    u[0] -= 1.0;
    let un = u.norm_squared();
    let refl = if un > 1e-30 {
        DMatrix::identity(p, p) - (&u * u.transpose()) * (2.0 / un)
    } else {
        DMatrix::identity(p, p)
    };
    let null = refl.columns(1, p - 1).into_owned();
    let qmat = DMatrix::from_columns(&q.iter().map(flat).collect::<Vec<_>>());
    let comb = |coef: &DVector<f64>| -> DMatrix<f64> { DMatrix::from_column_slice(k, k, (&qmat * coef).as_slice()) };
    let c = comb(&y0);
    let gflat = -(&qmat * &null);
    let mut g: Vec<DMatrix<f64>> =
        gflat.column_iter().map(|col| DMatrix::from_column_slice(k, k, col.as_slice())).collect();
    g.push(DMatrix::identity(k, k));
    let prob = Problem { c, g };
    let m = prob.g.len();
    // columns vec(G_i): tr(G_i A) for all i is one product gmatᵀ·vec(A)
    let gmat = DMatrix::from_columns(&prob.g.iter().map(flat).collect::<Vec<_>>());
    let gmat_t = gmat.transpose();
    let gdot = |a: &DMatrix<f64>| -> DVector<f64> { &gmat_t * flat(a) };
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;

    let mut x = DMatrix::identity(k, k) / k as f64;
    let mut z = DVector::zeros(m);
    let lmin_c = SymmetricEigen::new(prob.c.clone()).eigenvalues.min();
    z[m - 1] = lmin_c - 1.0;
    let mut s = &prob.c - DMatrix::identity(k, k) * z[m - 1];

    let kf = k as f64;
    let mut iter = 0;
    loop {
        let pobj = trace_prod(&prob.c, &x);
        let dobj = z[m - 1];
        let mu = trace_prod(&x, &s) / kf;
        let gap = (pobj - dobj).abs();
        let scale = 1.0 + pobj.abs().max(dobj.abs());
        if gap <= opts.gap_tol * scale || mu <= 1e-14 {
            break;
        }
        if iter >= opts.max_iter {
            if dobj > opts.strict_tol || pobj < -opts.strict_tol || gap <= 1e-7 * scale {
                break;
            }
            return Err(Error::Indeterminate(format!(
                "interior-point iteration did not converge (gap {gap:.3e} after {iter} iterations)"
            )));
        }
        iter += 1;
        let Some(si) = chol_inverse(&s) else {
            return Err(Error::Indeterminate("dual slack lost definiteness".into()));
        };
        // residuals (zero up to roundoff for this feasible start)
        let rp = &b - gdot(&x);
        let mut rd = prob.c.clone() - &s;
        for i in 0..m {
            rd -= &prob.g[i] * z[i];
        }
        // Schur complement M_ij = tr(G_i X G_j S⁻¹) = vec(G_i)·vec(S⁻¹ G_j X)
        let wcols: Vec<DVector<f64>> = prob.g.iter().map(|gj| flat(&(&si * gj * &x))).collect();
        let schur = sym(&gmat_t * DMatrix::from_columns(&wcols));
        let schur_ch = match nalgebra::Cholesky::new(schur.clone()) {
            Some(ch) => ch,
            None => {
                // near the optimum the Schur complement can lose definiteness to roundoff
                if dobj > opts.strict_tol || pobj < -opts.strict_tol || gap <= 1e-7 * scale {
                    break;
                }
                let ridge = 1e-13 * schur.diagonal().max().max(1.0);
                match nalgebra::Cholesky::new(&schur + DMatrix::identity(m, m) * ridge) {
                    Some(ch) => ch,
                    None => return Err(Error::Indeterminate("singular Schur complement".into())),
                }
            }
        };
        let xrs = &x * &rd * &si;
        let direction = |h: &DMatrix<f64>| -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
            let rhs = &rp - gdot(h) + gdot(&xrs);
            let dz = schur_ch.solve(&rhs);
            let mut ds = rd.clone();
            for i in 0..m {
                ds -= &prob.g[i] * dz[i];
            }
            let dx = sym(h - &x * &ds * &si);
            (dz, dx, ds)
        };
        // predictor
        let h_aff = -x.clone();
        let (_, dx_a, ds_a) = direction(&h_aff);
        let ap = step_length(&x, &dx_a);
        let ad = step_length(&s, &ds_a);
        let mu_aff = trace_prod(&(&x + &dx_a * ap), &(&s + &ds_a * ad)) / kf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        // corrector
        let h = &si * (sigma * mu) - &x - sym(&dx_a * &ds_a * &si);
        let (dz, dx, ds) = direction(&h);
        let ap = step_length(&x, &dx);
        let ad = step_length(&s, &ds);
        if ap < 1e-12 && ad < 1e-12 {
            return Err(Error::Indeterminate("interior-point step collapsed".into()));
        }
        x = sym(&x + &dx * ap);
        s = sym(&s + &ds * ad);
        z += &dz * ad;
    }
    // coordinates of Λ = Σ y_i Q_i
    let y = &y0 + &null * z.rows(0, p - 1);
    let lambda = SymMatrix::from_any(comb(&y));
    let t = z[m - 1];
    let upper = trace_prod(&prob.c, &x);
    Ok(MaxMinEig { t, upper, lambda, coords: y, x: SymMatrix::from_any(x), iterations: iter })
}

/// Orthonormalized view of a span together with the map back to the input coefficients.
struct Basis {
    input: Vec<DVector<f64>>,
    q: Vec<DMatrix<f64>>,
}

impl Basis {
    fn new(span: &[SymMatrix]) -> Self {
        let k = span.first().map(|s| s.k).unwrap_or(0);
        let input: Vec<DVector<f64>> = span.iter().map(SymMatrix::svec).collect();
        let q = orthonormal_columns(&input, 1e-10).into_iter().map(|v| smat(&v, k)).collect();
        Basis { input, q }
    }

    /// Least-squares coefficients of `m` in the input span.
    fn input_coeffs(&self, m: &DMatrix<f64>) -> Vec<f64> {
        if self.input.is_empty() {
            return Vec::new();
        }
        let a = DMatrix::from_columns(&self.input);
        let target = svec(m);
        let svd = a.svd(true, true);
        match svd.solve(&target, 1e-12) {
            Ok(c) => c.iter().copied().collect(),
            Err(_) => vec![0.0; self.input.len()],
        }
    }
}

/// Outcome of the nonzero-PSD search.
#[derive(Clone, Debug)]
pub enum PsdOutcome {
    /// A PSD element of trace one; `strict` when it is positive definite within the span's face.
    Found { matrix: SymMatrix, coeffs: Vec<f64>, margin: f64 },
    /// No nonzero PSD element; the certificate is PD and orthogonal to the span
    /// (absent only for an empty or entirely traceless span, where I serves).
    Empty { certificate: Option<SymMatrix> },
}

fn psd_search_inner(span: &[SymMatrix], k: usize, opts: &SdpOptions, depth: usize) -> Result<Option<(SymMatrix, f64)>> {
    if k == 0 {
        return Ok(None);
    }
    let basis = Basis::new(span);
    if basis.q.is_empty() {
        return Ok(None);
    }
    let tr: f64 = basis.q.iter().map(|m| m.trace().powi(2)).sum::<f64>().sqrt();
    if tr <= 1e-12 {
        return Ok(None);
    }
    let sol = solve_max_min_eig(&basis.q, k, opts)?;
    if sol.t > opts.strict_tol {
        return Ok(Some((sol.lambda, sol.t)));
    }
    if sol.upper < -opts.strict_tol {
        return Ok(None);
    }
    if depth > k {
        return Err(Error::Indeterminate("facial reduction did not terminate".into()));
    }
    // boundary: every PSD element lives on ker X
    let eig = SymmetricEigen::new(sol.x.m.clone());
    let lmax = eig.eigenvalues.max();
    let range: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-6 * lmax).collect();
    let kernel: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] <= 1e-6 * lmax).collect();
    if kernel.is_empty() {
        // X is definite yet t* ≈ 0: only the zero element is PSD up to tolerance
        return Ok(None);
    }
    let ur = DMatrix::from_columns(&range.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    let uk = DMatrix::from_columns(&kernel.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    // restrict to {Λ ∈ span : Λ U_R = 0}
    let p = basis.q.len();
    let rows = k * range.len();
    let mut a = DMatrix::zeros(rows.max(1), p);
    for (j, qj) in basis.q.iter().enumerate() {
        let prod = qj * &ur;
        for (t, v) in prod.iter().enumerate() {
            a[(t, j)] = *v;
        }
    }
    // null space through the eigenvectors of AᵀA
    let ata = a.transpose() * &a;
    let e2 = SymmetricEigen::new(ata);
    let emax = e2.eigenvalues.max().max(1e-300);
    let mut reduced = Vec::new();
    for r in 0..p {
        if e2.eigenvalues[r] <= 1e-16 * emax.max(1.0) {
            let coef = e2.eigenvectors.column(r);
            let mut m = DMatrix::zeros(k, k);
            for (j, qj) in basis.q.iter().enumerate() {
                m += qj * coef[j];
            }
            reduced.push(SymMatrix::from_any(uk.transpose() * m * &uk));
        }
    }
    match psd_search_inner(&reduced, kernel.len(), opts, depth + 1)? {
        None => Ok(None),
        Some((s, margin)) => {
            let lam = SymMatrix::from_any(&uk * s.m * uk.transpose());
            Ok(Some((lam, margin)))
        }
    }
}

/// Searches the span for a nonzero PSD element (trace one).
pub fn psd_search(span: &[SymMatrix], opts: &SdpOptions) -> Result<PsdOutcome> {
    let Some(k) = span.first().map(|s| s.k) else {
        return Ok(PsdOutcome::Empty { certificate: None });
    };
    if span.iter().any(|s| s.k != k) {
        return Err(Error::DimensionMismatch("span matrices differ in size".into()));
    }
    let basis = Basis::new(span);
    if basis.q.is_empty() {
        return Ok(PsdOutcome::Empty { certificate: Some(SymMatrix::identity(k)) });
    }
    let tr: f64 = basis.q.iter().map(|m| m.trace().powi(2)).sum::<f64>().sqrt();
    if tr <= 1e-12 {
        return Ok(PsdOutcome::Empty { certificate: Some(SymMatrix::identity(k)) });
    }
    let sol = solve_max_min_eig(&basis.q, k, opts)?;
    if sol.t > opts.strict_tol {
        let coeffs = basis.input_coeffs(&sol.lambda.m);
        return Ok(PsdOutcome::Found { matrix: sol.lambda, coeffs, margin: sol.t });
    }
    if sol.upper < -opts.strict_tol {
        let cert = SymMatrix::from_any(&sol.x.m - DMatrix::identity(k, k) * sol.upper);
        return Ok(PsdOutcome::Empty { certificate: Some(cert) });
    }
    match psd_search_inner(span, k, opts, 0)? {
        Some((m, margin)) => {
            let coeffs = basis.input_coeffs(&m.m);
            Ok(PsdOutcome::Found { matrix: m, coeffs, margin })
        }
        None => Ok(PsdOutcome::Empty { certificate: None }),
    }
}

/// A trace-one PSD element of the span with its coefficients, if one exists.
pub fn find_nonzero_psd(span: &[SymMatrix]) -> Result<Option<(SymMatrix, Vec<f64>)>> {
    Ok(match psd_search(span, &SdpOptions::default())? {
        PsdOutcome::Found { matrix, coeffs, .. } => Some((matrix, coeffs)),
        PsdOutcome::Empty { .. } => None,
    })
}

/// A positive definite element of the span (trace one) with its minimum eigenvalue.
pub fn find_pd(span: &[SymMatrix], opts: &SdpOptions) -> Result<Option<(SymMatrix, Vec<f64>, f64)>> {
    let Some(k) = span.first().map(|s| s.k) else { return Ok(None) };
    let basis = Basis::new(span);
    if basis.q.is_empty() || basis.q.iter().all(|m| m.trace().abs() <= 1e-12) {
        return Ok(None);
    }
    let sol = solve_max_min_eig(&basis.q, k, opts)?;
    if sol.t > opts.strict_tol {
        let coeffs = basis.input_coeffs(&sol.lambda.m);
        Ok(Some((sol.lambda, coeffs, sol.t)))
    } else {
        Ok(None)
    }
}

/// The three mutually exclusive cases for a subspace ℬ of 𝕊^k and its complement.
#[derive(Clone, Debug)]
pub enum PsdCase {
    /// ℬ contains a positive definite matrix.
    DefiniteInSpan(SymMatrix),
    /// ℬ⊥ contains a positive definite matrix.
    DefiniteInComplement(SymMatrix),
    /// Both contain nonzero PSD matrices, neither a definite one.
    Boundary { in_span: SymMatrix, in_complement: SymMatrix },
}

pub fn classify_trichotomy(span: &[SymMatrix], k: usize, opts: &SdpOptions) -> Result<PsdCase> {
    let comp = orthogonal_complement(span, k);
    let solve = |s: &[SymMatrix]| -> Result<Option<MaxMinEig>> {
        let b = Basis::new(s);
        if b.q.is_empty() || b.q.iter().all(|m| m.trace().abs() <= 1e-12) {
            return Ok(None);
        }
        solve_max_min_eig(&b.q, k, opts).map(Some)
    };
    let s1 = solve(span)?;
    let s2 = solve(&comp)?;
    let pos1 = s1.as_ref().map(|s| s.t > opts.strict_tol).unwrap_or(false);
    let pos2 = s2.as_ref().map(|s| s.t > opts.strict_tol).unwrap_or(false);
    // an empty or traceless side certifies identity in the other
    let neg1 = s1.as_ref().map(|s| s.upper < -opts.strict_tol).unwrap_or(true);
    let neg2 = s2.as_ref().map(|s| s.upper < -opts.strict_tol).unwrap_or(true);
    match (pos1 || neg2, pos2 || neg1) {
        (true, false) => {
            let m = match &s1 {
                Some(s) if s.t > opts.strict_tol => s.lambda.clone(),
                _ => {
                    let s2 = s2.as_ref();
                    match s2 {
                        Some(s) => SymMatrix::from_any(&s.x.m - DMatrix::identity(k, k) * s.upper),
                        None => SymMatrix::identity(k),
                    }
                }
            };
            Ok(PsdCase::DefiniteInSpan(m))
        }
        (false, true) => {
            let m = match &s2 {
                Some(s) if s.t > opts.strict_tol => s.lambda.clone(),
                _ => match &s1 {
                    Some(s) => SymMatrix::from_any(&s.x.m - DMatrix::identity(k, k) * s.upper),
                    None => SymMatrix::identity(k),
                },
            };
            Ok(PsdCase::DefiniteInComplement(m))
        }
        (false, false) => {
            let a = find_nonzero_psd(span)?;
            let b = find_nonzero_psd(&comp)?;
            match (a, b) {
                (Some((a, _)), Some((b, _))) => Ok(PsdCase::Boundary { in_span: a, in_complement: b }),
                _ => Err(Error::Indeterminate("boundary case without PSD witnesses".into())),
            }
        }
        (true, true) => Err(Error::Indeterminate("both sides appear definite".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(k: usize, v: &[f64]) -> SymMatrix {
        SymMatrix::from_any(DMatrix::from_row_slice(k, k, v))
    }

    #[test]
    fn identity_gives_half_identity() {
        let (m, c) = find_nonzero_psd(&[SymMatrix::identity(2)]).unwrap().unwrap();
        assert!((m.m.clone() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-8);
        assert!((c[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn indefinite_spans_have_none() {
        assert!(find_nonzero_psd(&[sm(2, &[1., 0., 0., -1.])]).unwrap().is_none());
        assert!(find_nonzero_psd(&[sm(2, &[1., 0., 0., -1.]), sm(2, &[0., 1., 1., 0.])]).unwrap().is_none());
    }

    #[test]
    fn boundary_span_uses_facial_reduction() {
        // span{diag(1,0), offdiag}: only diag(1,0) is PSD
        let r = find_nonzero_psd(&[sm(2, &[1., 0., 0., 0.]), sm(2, &[0., 1., 1., 0.])]).unwrap().unwrap();
        assert!((r.0.m[(0, 0)] - 1.0).abs() < 1e-6, "{:?}", r.0);
        assert!(r.0.min_eig() > -1e-8);
    }
}

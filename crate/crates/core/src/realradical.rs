//! The real radical loop: SOS detection alternating with Gröbner recomputation.

use crate::chips::chip_space_from_generators;
use crate::error::{Error, Result};
use crate::freealg::{MatPoly, Signature, VecPoly};
use crate::groebner::{reduced_lgb, GroebnerBasis};
use crate::sdp::SdpOptions;
use crate::sos::sos_round;

#[derive(Clone, Debug)]
pub struct RealRadicalResult {
    /// Reduced left Gröbner basis of rr(I).
    pub basis: GroebnerBasis,
    /// Number of bases examined (one SOS round each unless all constant).
    pub iterations: usize,
    /// Square roots found per productive round.
    pub certificates: Vec<Vec<VecPoly>>,
    /// Largest degree of any polynomial materialized during the run.
    pub degree_watermark: i64,
}

#[derive(Clone, Debug, Default)]
pub struct RrOptions {
    pub sdp: SdpOptions,
    /// Overrides the default cap of 10·ℓ·dim ℝ^{1×ℓ}⟨x,x*⟩_d.
    pub max_iter: Option<usize>,
}

fn default_cap(sig: Signature, d: i64) -> usize {
    let d = d.max(0) as u32;
    let words: usize = (0..=d).map(|k| (2 * sig.g).saturating_pow(k)).fold(0usize, usize::saturating_add);
    10usize.saturating_mul(sig.ell).saturating_mul(sig.ell.saturating_mul(words))
}

pub fn real_radical(sig: Signature, gens: &[VecPoly]) -> Result<RealRadicalResult> {
    real_radical_with(sig, gens, &RrOptions::default())
}

pub fn real_radical_with(sig: Signature, gens: &[VecPoly], opts: &RrOptions) -> Result<RealRadicalResult> {
    let mut basis = reduced_lgb(sig, gens)?;
    let d = gens.iter().map(VecPoly::degree).max().unwrap_or(-1);
    let cap = opts.max_iter.unwrap_or_else(|| default_cap(sig, d));
    let mut watermark = d.max(basis.degree());
    let mut certificates = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationCap(cap));
        }
        watermark = watermark.max(basis.degree());
        if basis.all_constant() {
            break;
        }
        let chips = chip_space_from_generators(sig, &basis.elems);
        let round = sos_round(&basis, &chips, &opts.sdp)?;
        watermark = watermark.max(round.pencil_degree);
        if round.certificate.is_empty() {
            break;
        }
        for p in &round.certificate {
            watermark = watermark.max(p.degree());
        }
        let mut next = basis.elems.clone();
        next.extend(round.certificate.iter().cloned());
        certificates.push(round.certificate);
        basis = reduced_lgb(sig, &next)?;
    }
    Ok(RealRadicalResult { basis, iterations, certificates, degree_watermark: watermark })
}

/// Outcome of the single-round reality test.
#[derive(Clone, Debug)]
pub struct RealTest {
    pub real: bool,
    /// Square roots of a nonzero SOS when the module is not real.
    pub certificate: Vec<VecPoly>,
}

pub fn real_test(sig: Signature, gens: &[VecPoly], opts: &SdpOptions) -> Result<RealTest> {
    let basis = reduced_lgb(sig, gens)?;
    if basis.all_constant() {
        return Ok(RealTest { real: true, certificate: Vec::new() });
    }
    let chips = chip_space_from_generators(sig, &basis.elems);
    let round = sos_round(&basis, &chips, opts)?;
    Ok(RealTest { real: round.certificate.is_empty(), certificate: round.certificate })
}

pub fn is_real(sig: Signature, gens: &[VecPoly]) -> Result<bool> {
    Ok(real_test(sig, gens, &SdpOptions::default())?.real)
}

/// Splits ν×ℓ matrices into their rows.
pub fn flatten_rows(ps: &[MatPoly]) -> Vec<VecPoly> {
    ps.iter().flat_map(|p| p.rows()).filter(|r| !r.is_zero()).collect()
}

/// q ∈ J_ν: q(X)v = 0 whenever every p_i(X)v = 0.
pub fn rr_member(q: &MatPoly, ps: &[MatPoly]) -> Result<bool> {
    Ok(rr_member_with(q, ps, &RrOptions::default())?.0)
}

/// Membership together with the computed real radical.
pub fn rr_member_with(q: &MatPoly, ps: &[MatPoly], opts: &RrOptions) -> Result<(bool, RealRadicalResult)> {
    for p in ps {
        if p.sig.g != q.sig.g || p.sig.ell != q.sig.ell {
            return Err(Error::DimensionMismatch(format!(
                "query is {}×{} in {} variables, generator is {}×{} in {}",
                q.sig.nu, q.sig.ell, q.sig.g, p.sig.nu, p.sig.ell, p.sig.g
            )));
        }
    }
    let sig = Signature::vector(q.sig.g, q.sig.ell);
    let rr = real_radical_with(sig, &flatten_rows(ps), opts)?;
    let member = q.rows().iter().all(|r| rr.basis.contains(r));
    Ok((member, rr))
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("zero polynomial has no leading term")]
    ZeroPolynomial,
    #[error("monomial outside the required span: {0}")]
    OutsideSpan(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("certificate-unverified: {0}")]
    CertificateUnverified(String),
    #[error("not-real-or-indeterminate: {0}")]
    NotRealOrIndeterminate(String),
    #[error("witness failure: {0}")]
    Witness(String),
    #[error("iteration cap {0} exceeded")]
    IterationCap(usize),
    #[error("tolerance: {0}")]
    Tolerance(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

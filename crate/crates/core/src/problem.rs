//! Problem files and matrix-tuple files.
//!
//! ```text
//! # comment
//! sig g=2 ell=1 field=r
//! x1* x1 + x2
//! query: x2
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fieldext::{parse_hrows, DivisionAlgebra, HPoly};
use crate::freealg::{MatPoly, MatrixTuple, Signature};
use crate::linalg::{to_f64, QMat};
use crate::syntax::{parse_poly_at, parse_scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FieldKind {
    #[default]
    R,
    C,
    H,
}

impl FromStr for FieldKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "r" | "R" => Ok(FieldKind::R),
            "c" | "C" => Ok(FieldKind::C),
            "h" | "H" => Ok(FieldKind::H),
            _ => Err(format!("unknown field `{s}` (expected r, c or h)")),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::R => "r",
            FieldKind::C => "c",
            FieldKind::H => "h",
        })
    }
}

/// Source text of one polynomial with its 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceLine {
    pub line: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub g: usize,
    pub ell: usize,
    pub field: FieldKind,
    pub gens: Vec<SourceLine>,
    pub query: Option<SourceLine>,
}

fn header_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col: 1, msg: msg.into() }
}

fn strip_comment(s: &str) -> &str {
    s.split('#').next().unwrap_or("").trim()
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut header: Option<(usize, usize, FieldKind)> = None;
    let mut gens = Vec::new();
    let mut query = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = strip_comment(raw);
        if s.is_empty() {
            continue;
        }
        if header.is_none() {
            let rest = s
                .strip_prefix("sig")
                .filter(|r| r.starts_with(char::is_whitespace) || r.is_empty())
                .ok_or_else(|| header_err(line, "expected header `sig g=<g> ell=<ℓ> field=<r|c|h>`"))?;
            let (mut g, mut ell, mut field) = (None, 1, FieldKind::R);
            for kv in rest.split_whitespace() {
                let (k, v) = kv.split_once('=').ok_or_else(|| header_err(line, format!("malformed `{kv}`")))?;
                match k {
                    "g" => g = Some(v.parse().map_err(|_| header_err(line, format!("bad g `{v}`")))?),
                    "ell" => ell = v.parse().map_err(|_| header_err(line, format!("bad ell `{v}`")))?,
                    "field" => field = v.parse().map_err(|e: String| header_err(line, e))?,
                    _ => return Err(header_err(line, format!("unknown header key `{k}`"))),
                }
            }
            let g: usize = g.ok_or_else(|| header_err(line, "header is missing g=<g>"))?;
            if g == 0 || ell == 0 {
                return Err(header_err(line, "g and ell must be positive"));
            }
            header = Some((g, ell, field));
            continue;
        }
        if let Some(q) = s.strip_prefix("query:") {
            if query.is_some() {
                return Err(header_err(line, "duplicate query line"));
            }
            query = Some(SourceLine { line, text: q.trim().to_string() });
        } else {
            gens.push(SourceLine { line, text: s.to_string() });
        }
    }
    let (g, ell, field) = header.ok_or_else(|| header_err(1, "missing header `sig g=<g> ell=<ℓ> field=<r|c|h>`"))?;
    Ok(ProblemFile { g, ell, field, gens, query })
}

impl ProblemFile {
    pub fn signature(&self) -> Signature {
        Signature::vector(self.g, self.ell)
    }

    pub fn real_gens(&self) -> Result<Vec<MatPoly>> {
        self.gens.iter().map(|s| parse_poly_at(&s.text, self.g, self.ell, s.line)).collect()
    }

    /// The query line, or `override_q` when given (parsed as line 0).
    pub fn real_query(&self, override_q: Option<&str>) -> Result<Option<MatPoly>> {
        match (override_q, &self.query) {
            (Some(q), _) => parse_poly_at(q, self.g, self.ell, 0).map(Some),
            (None, Some(s)) => parse_poly_at(&s.text, self.g, self.ell, s.line).map(Some),
            (None, None) => Ok(None),
        }
    }

    pub fn field_gens<D: DivisionAlgebra>(&self) -> Result<Vec<HPoly<D>>> {
        let mut out = Vec::new();
        for s in &self.gens {
            out.extend(parse_hrows::<D>(&s.text, self.g, self.ell, s.line)?);
        }
        Ok(out)
    }

    pub fn field_query<D: DivisionAlgebra>(&self, override_q: Option<&str>) -> Result<Option<Vec<HPoly<D>>>> {
        match (override_q, &self.query) {
            (Some(q), _) => parse_hrows::<D>(q, self.g, self.ell, 0).map(Some),
            (None, Some(s)) => parse_hrows::<D>(&s.text, self.g, self.ell, s.line).map(Some),
            (None, None) => Ok(None),
        }
    }
}

/// A matrix tuple read from text, kept exact when every entry is rational.
#[derive(Clone, Debug)]
pub struct TupleFile {
    pub n: usize,
    pub exact: Vec<QMat>,
}

impl TupleFile {
    pub fn to_f64(&self) -> Result<MatrixTuple> {
        MatrixTuple::new(self.exact.iter().map(QMat::to_f64).collect())
    }
}

/// `n=<n>` followed by g blocks of n rows with n entries each; blank lines and `#` comments ignored.
pub fn parse_tuple(text: &str, g: usize) -> Result<TupleFile> {
    let mut n = None;
    let mut rows: Vec<(usize, Vec<crate::freealg::Scalar>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = strip_comment(raw);
        if s.is_empty() {
            continue;
        }
        if n.is_none() {
            let v = s
                .strip_prefix("n=")
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v > 0)
                .ok_or_else(|| header_err(line, "expected `n=<n>`"))?;
            n = Some(v);
            continue;
        }
        let mut row = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v = parse_scalar(tok).ok_or_else(|| header_err(line, format!("bad entry `{tok}`")))?;
            row.push(v);
        }
        rows.push((line, row));
    }
    let n = n.ok_or_else(|| header_err(1, "missing `n=<n>`"))?;
    if rows.len() != g * n {
        return Err(Error::DimensionMismatch(format!("expected {} rows ({g} blocks of {n}), found {}", g * n, rows.len())));
    }
    let mut exact = Vec::with_capacity(g);
    for b in 0..g {
        let block = &rows[b * n..(b + 1) * n];
        for (line, r) in block {
            if r.len() != n {
                return Err(header_err(*line, format!("expected {n} entries, found {}", r.len())));
            }
        }
        exact.push(QMat::from_fn(n, n, |i, j| block[i].1[j].clone()));
    }
    Ok(TupleFile { n, exact })
}

/// Row-major f64 view, used for printing.
pub fn float_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn exact_rows(m: &QMat) -> Vec<Vec<f64>> {
    (0..m.rows).map(|i| (0..m.cols).map(|j| to_f64(m.get(i, j))).collect()).collect()
}

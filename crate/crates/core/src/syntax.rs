//! Text syntax for polynomials.
//!
//! Variables `x1..xg`, adjoint suffix `*` (binds to the preceding letter or
//! parenthesized group), multiplication by juxtaposition, row basis `e<j>`,
//! rational coefficients `3/2` or decimals `0.25`, optional `^n` powers.
//! Matrices are written `[ row ; row ]`. Over ℂ/ℍ the units `i`, `j`, `k` and
//! quaternion literals `(a,b,c,d)` are also accepted.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::freealg::{Letter, MatPoly, Monomial, Scalar, Signature, VecPoly, Word};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Scalar),
    Var(usize),
    Row(usize),
    Unit(char),
    Star,
    Plus,
    Minus,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

fn parse_decimal(s: &str) -> Option<Scalar> {
    if let Some((a, b)) = s.split_once('.') {
        let digits = format!("{a}{b}");
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
        let d = BigInt::from(10u32).pow(b.len() as u32);
        Some(Scalar::new(n, d))
    } else {
        Some(Scalar::from_integer(BigInt::from_str(s).ok()?))
    }
}

fn lex(src: &str, line: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            out.push(Spanned { tok: t, col });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = parse_decimal(&s).ok_or_else(|| perr(line, col, format!("bad number `{s}`")))?;
            out.push(Spanned { tok: Tok::Num(v), col });
            continue;
        }
        if c == 'x' || c == 'e' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(perr(line, col, format!("`{c}` must be followed by an index")));
            }
            let s: String = chars[start..i].iter().collect();
            let k: usize = s.parse().map_err(|_| perr(line, col, "index too large"))?;
            if k == 0 {
                return Err(perr(line, col, "indices start at 1"));
            }
            out.push(Spanned { tok: if c == 'x' { Tok::Var(k) } else { Tok::Row(k) }, col });
            continue;
        }
        if matches!(c, 'i' | 'j' | 'k') {
            let next_alnum = chars.get(i + 1).map(|n| n.is_alphanumeric()).unwrap_or(false);
            if !next_alnum {
                out.push(Spanned { tok: Tok::Unit(c), col });
                i += 1;
                continue;
            }
        }
        return Err(perr(line, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

/// Parsed expression tree, independent of the coefficient algebra.
#[derive(Clone, Debug)]
pub enum Expr {
    Num(Scalar),
    Quat([Scalar; 4]),
    Unit(char),
    Var(Letter),
    Row(usize),
    Sum(Vec<(bool, Expr)>),
    Prod(Vec<Expr>),
    Star(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|s| s.col).unwrap_or(self.end_col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        perr(self.line, self.col(), msg)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let mut neg = false;
        match self.peek() {
            Some(Tok::Minus) => {
                neg = true;
                self.pos += 1;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        terms.push((neg, self.term()?));
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push((false, self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push((true, self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::Sum(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while matches!(
            self.peek(),
            Some(Tok::Num(_) | Tok::Var(_) | Tok::Row(_) | Tok::Unit(_) | Tok::LParen)
        ) {
            factors.push(self.factor()?);
        }
        Ok(Expr::Prod(factors))
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    e = match e {
                        Expr::Var(l) => Expr::Var(Letter { starred: !l.starred, ..l }),
                        other => Expr::Star(Box::new(other)),
                    };
                }
                Some(Tok::Caret) => {
                    self.pos += 1;
                    let Some(Tok::Num(n)) = self.peek().cloned() else {
                        return Err(self.err("expected exponent"));
                    };
                    if !n.is_integer() || n.is_negative() || n > Scalar::from_integer(BigInt::from(64)) {
                        return Err(self.err("exponent must be an integer in 0..=64"));
                    }
                    self.pos += 1;
                    let k: u32 = n.to_integer().try_into().unwrap_or(0);
                    e = Expr::Pow(Box::new(e), k);
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn signed_number(&mut self) -> Result<Scalar> {
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let Some(Tok::Num(n)) = self.peek().cloned() else {
            return Err(self.err("expected number"));
        };
        self.pos += 1;
        let mut v = n;
        if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            let Some(Tok::Num(d)) = self.peek().cloned() else {
                return Err(self.err("expected denominator"));
            };
            if d.is_zero() {
                return Err(self.err("division by zero"));
            }
            self.pos += 1;
            v /= d;
        }
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(_)) => Ok(Expr::Num(self.signed_number()?)),
            Some(Tok::Var(k)) => {
                self.pos += 1;
                Ok(Expr::Var(Letter::x(k)))
            }
            Some(Tok::Row(k)) => {
                self.pos += 1;
                Ok(Expr::Row(k))
            }
            Some(Tok::Unit(u)) => {
                self.pos += 1;
                Ok(Expr::Unit(u))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                // quaternion literal `(a,b,c,d)`?
                let save = self.pos;
                if let Ok(a) = self.signed_number() {
                    if self.peek() == Some(&Tok::Comma) {
                        let mut q = [a, Scalar::zero(), Scalar::zero(), Scalar::zero()];
                        for slot in q.iter_mut().skip(1) {
                            self.expect(Tok::Comma, "`,` in quaternion literal")?;
                            *slot = self.signed_number()?;
                        }
                        self.expect(Tok::RParen, "`)` closing quaternion literal")?;
                        return Ok(Expr::Quat(q));
                    }
                }
                self.pos = save;
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(_) => Err(self.err("unexpected token")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses one polynomial (or bracketed matrix) into an expression list, one per row.
pub fn parse_rows(src: &str, line: usize) -> Result<Vec<Expr>> {
    let toks = lex(src, line)?;
    let end_col = src.chars().count() + 1;
    let mut p = Parser { toks: &toks, pos: 0, line, end_col };
    if p.peek().is_none() {
        return Err(p.err("empty polynomial"));
    }
    let rows = if p.peek() == Some(&Tok::LBracket) {
        p.pos += 1;
        let mut rows = vec![p.sum()?];
        while p.peek() == Some(&Tok::Semi) {
            p.pos += 1;
            rows.push(p.sum()?);
        }
        p.expect(Tok::RBracket, "`]`")?;
        rows
    } else {
        vec![p.sum()?]
    };
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(rows)
}

/// Coefficient algebras the parser can evaluate into (scalar entries).
pub trait Algebra: Clone {
    fn zero(g: usize) -> Self;
    fn constant(g: usize, c: Scalar) -> Self;
    fn quaternion(g: usize, q: &[Scalar; 4]) -> std::result::Result<Self, String>;
    fn unit(g: usize, u: char) -> std::result::Result<Self, String>;
    fn letter(g: usize, l: Letter) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn star(&self) -> Self;
    fn is_zero(&self) -> bool;
}

#[derive(Clone)]
enum Val<A> {
    S(A),
    V(Vec<A>),
}

/// Evaluates an expression into ℓ column entries.
pub fn eval_row<A: Algebra>(e: &Expr, g: usize, ell: usize, line: usize) -> Result<Vec<A>> {
    let err = |msg: String| perr(line, 1, msg);
    fn go<A: Algebra>(e: &Expr, g: usize, ell: usize, err: &dyn Fn(String) -> Error) -> Result<Val<A>> {
        Ok(match e {
            Expr::Num(c) => Val::S(A::constant(g, c.clone())),
            Expr::Quat(q) => Val::S(A::quaternion(g, q).map_err(err)?),
            Expr::Unit(u) => Val::S(A::unit(g, *u).map_err(err)?),
            Expr::Var(l) => {
                if l.index > g {
                    return Err(err(format!("variable x{} exceeds g={g}", l.index)));
                }
                Val::S(A::letter(g, *l))
            }
            Expr::Row(k) => {
                if *k > ell {
                    return Err(err(format!("row marker e{k} exceeds ell={ell}")));
                }
                let mut v = vec![A::zero(g); ell];
                v[k - 1] = A::constant(g, Scalar::one());
                Val::V(v)
            }
            Expr::Sum(terms) => {
                let mut acc: Option<Val<A>> = None;
                for (neg, t) in terms {
                    let mut v = go::<A>(t, g, ell, err)?;
                    if *neg {
                        v = match v {
                            Val::S(a) => Val::S(a.neg()),
                            Val::V(xs) => Val::V(xs.iter().map(A::neg).collect()),
                        };
                    }
                    acc = Some(match (acc, v) {
                        (None, v) => v,
                        (Some(Val::S(a)), Val::S(b)) => Val::S(a.add(&b)),
                        (Some(Val::V(a)), Val::V(b)) => Val::V(a.iter().zip(&b).map(|(x, y)| x.add(y)).collect()),
                        (Some(Val::S(a)), Val::V(b)) | (Some(Val::V(b)), Val::S(a)) => {
                            if ell == 1 {
                                Val::V(vec![b[0].add(&a)])
                            } else if a.is_zero() {
                                Val::V(b)
                            } else {
                                return Err(err("term without row marker e<j> mixed with row terms".into()));
                            }
                        }
                    });
                }
                acc.unwrap_or(Val::S(A::zero(g)))
            }
            Expr::Prod(fs) => {
                let mut acc: Val<A> = Val::S(A::constant(g, Scalar::one()));
                for f in fs {
                    let v = go::<A>(f, g, ell, err)?;
                    acc = match (acc, v) {
                        (Val::S(a), Val::S(b)) => Val::S(a.mul(&b)),
                        (Val::S(a), Val::V(b)) => Val::V(b.iter().map(|y| a.mul(y)).collect()),
                        (Val::V(a), Val::S(b)) => Val::V(a.iter().map(|x| x.mul(&b)).collect()),
                        (Val::V(_), Val::V(_)) => return Err(err("at most one row marker per term".into())),
                    };
                }
                acc
            }
            Expr::Star(inner) => match go::<A>(inner, g, ell, err)? {
                Val::S(a) => Val::S(a.star()),
                Val::V(_) => return Err(err("adjoint of a row vector is not a row vector".into())),
            },
            Expr::Pow(inner, k) => match go::<A>(inner, g, ell, err)? {
                Val::S(a) => {
                    let mut acc = A::constant(g, Scalar::one());
                    for _ in 0..*k {
                        acc = acc.mul(&a);
                    }
                    Val::S(acc)
                }
                Val::V(_) => return Err(err("cannot take powers of row vectors".into())),
            },
        })
    }
    match go::<A>(e, g, ell, &err)? {
        Val::V(v) => Ok(v),
        Val::S(a) => {
            if ell == 1 {
                Ok(vec![a])
            } else if a.is_zero() {
                Ok(vec![A::zero(g); ell])
            } else {
                Err(err(format!("missing row marker e<j> (ell={ell})")))
            }
        }
    }
}

/// Real scalar polynomials (1×1 MatPoly) as a parse target.
impl Algebra for MatPoly {
    fn zero(g: usize) -> Self {
        MatPoly::zero(Signature::scalar(g))
    }
    fn constant(g: usize, c: Scalar) -> Self {
        MatPoly::monomial(Signature::scalar(g), Monomial::unit(0), c)
    }
    fn quaternion(g: usize, q: &[Scalar; 4]) -> std::result::Result<Self, String> {
        if q[1..].iter().all(Zero::is_zero) {
            Ok(Self::constant(g, q[0].clone()))
        } else {
            Err("quaternion coefficients need field=h".into())
        }
    }
    fn unit(_: usize, u: char) -> std::result::Result<Self, String> {
        Err(format!("unit `{u}` needs field=c or field=h"))
    }
    fn letter(g: usize, l: Letter) -> Self {
        MatPoly::word(g, Word::from_letters(g, &[l]))
    }
    fn add(&self, o: &Self) -> Self {
        MatPoly::add(self, o).expect("same signature")
    }
    fn neg(&self) -> Self {
        MatPoly::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        MatPoly::mul(self, o).expect("scalar product")
    }
    fn star(&self) -> Self {
        self.involute()
    }
    fn is_zero(&self) -> bool {
        MatPoly::is_zero(self)
    }
}

/// Parses a real polynomial; one row yields a VecPoly (ν=1), brackets a ν×ℓ matrix.
pub fn parse_poly(src: &str, g: usize, ell: usize) -> Result<MatPoly> {
    parse_poly_at(src, g, ell, 1)
}

pub fn parse_poly_at(src: &str, g: usize, ell: usize, line: usize) -> Result<MatPoly> {
    let rows = parse_rows(src, line)?;
    let mut vrows = Vec::with_capacity(rows.len());
    let sig = Signature::vector(g, ell);
    for r in &rows {
        let cols: Vec<MatPoly> = eval_row(r, g, ell, line)?;
        let mut p = VecPoly::zero(sig);
        for (j, c) in cols.into_iter().enumerate() {
            for (m, v) in c.terms {
                p.add_term(Monomial::vec(j, m.word), &v);
            }
        }
        vrows.push(p);
    }
    MatPoly::from_rows(&vrows)
}

/// Parses a standalone rational: `-3`, `3/2`, `0.25`, `-1.5`.
pub fn parse_scalar(s: &str) -> Option<Scalar> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.' || c == '/') {
        return None;
    }
    let v = match body.split_once('/') {
        Some((n, d)) => {
            let d = parse_decimal(d)?;
            if d.is_zero() {
                return None;
            }
            parse_decimal(n)? / d
        }
        None => parse_decimal(body)?,
    };
    Some(if neg { -v } else { v })
}

pub fn format_scalar(c: &Scalar) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn format_word(w: &Word, g: usize) -> String {
    w.letters(g)
        .iter()
        .map(|l| format!("x{}{}", l.index, if l.starred { "*" } else { "" }))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Joins (coefficient, word-text) terms, largest first.
fn join_terms<'a>(terms: impl Iterator<Item = (&'a Scalar, String)>) -> String {
    let mut s = String::new();
    for (i, (c, w)) in terms.enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if w.is_empty() {
            format_scalar(&a)
        } else if a.is_one() {
            w
        } else {
            format!("{} {}", format_scalar(&a), w)
        };
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn print_row(p: &VecPoly, row: usize) -> String {
    let g = p.sig.g;
    if p.sig.ell == 1 {
        return join_terms(
            p.terms.iter().rev().filter(|(m, _)| m.row == row).map(|(m, c)| (c, format_word(&m.word, g))),
        );
    }
    let mut groups = Vec::new();
    for j in 0..p.sig.ell {
        let body = join_terms(
            p.terms
                .iter()
                .rev()
                .filter(|(m, _)| m.row == row && m.col == j)
                .map(|(m, c)| (c, format_word(&m.word, g))),
        );
        if body != "0" {
            groups.push(format!("e{} ({})", j + 1, body));
        }
    }
    if groups.is_empty() {
        "0".into()
    } else {
        groups.join(" + ")
    }
}

/// Canonical text form.
pub fn print_poly(p: &MatPoly) -> String {
    if p.sig.nu == 1 {
        print_row(p, 0)
    } else {
        let rows: Vec<String> = (0..p.sig.nu).map(|i| print_row(p, i)).collect();
        format!("[ {} ]", rows.join(" ; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::{int, rat};

    #[test]
    fn parses_example_row() {
        let p = parse_poly("e2 (x1 x2* - 3/2)", 2, 2).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(print_poly(&p), "e2 (x1 x2* - 3/2)");
    }

    #[test]
    fn star_binds_to_letter() {
        let a = parse_poly("x1*x2", 2, 1).unwrap();
        let b = parse_poly("x1* x2", 2, 1).unwrap();
        assert_eq!(a, b);
        let c = parse_poly("(x1 x2)*", 2, 1).unwrap();
        assert_eq!(print_poly(&c), "x2* x1*");
    }

    #[test]
    fn coefficients_and_signs() {
        let p = parse_poly("-x1 + 0.5 x2 - 2", 2, 1).unwrap();
        assert_eq!(p.coeff(&Monomial::vec(0, Word::empty())), int(-2));
        assert_eq!(print_poly(&p), "1/2 x2 - x1 - 2");
        let q = parse_poly("(x1 + x2)^2", 2, 1).unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(parse_poly("3/6", 1, 1).unwrap().coeff(&Monomial::unit(0)), rat(1, 2));
    }

    #[test]
    fn errors_carry_position() {
        match parse_poly("x1 + y", 2, 1) {
            Err(Error::Parse { line: 1, col: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_poly("x1", 2, 2).is_err());
        assert!(parse_poly("e1 e2", 2, 2).is_err());
        assert!(parse_poly("x3", 2, 1).is_err());
    }

    #[test]
    fn matrix_rows() {
        let p = parse_poly("[ e1 (x1) ; e2 (1) + e1 (x2*) ]", 2, 2).unwrap();
        assert_eq!(p.sig.nu, 2);
        assert_eq!(print_poly(&p), "[ e1 (x1) ; e1 (x2*) + e2 (1) ]");
    }
}

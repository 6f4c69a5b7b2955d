//! The `ncrr` command-line front end.
//!
//! Every subcommand reads a problem file (see [`ncrr_core::problem`]) and
//! prints either text or, with `--json`, a document carrying `"schema": 1`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ncrr_core::chips::chip_space_from_generators;
use ncrr_core::fieldext::{eval_hpoly, realify, solve_over, Complex, DivisionAlgebra, HMat, HPoly, Quat};
use ncrr_core::freealg::{MatPoly, Signature, VecPoly};
use ncrr_core::groebner::reduced_lgb;
use ncrr_core::problem::{float_rows, parse_problem, parse_tuple, FieldKind, ProblemFile};
use ncrr_core::realradical::{flatten_rows, real_radical_with, RrOptions};
use ncrr_core::sos::{assemble_pencil, reduce_zero_diagonal, sos_round};
use ncrr_core::syntax::{format_scalar, format_word, print_poly};
use ncrr_core::witness::{gns_witness_with, numeric_zero_oracle, Verdict, WitnessChips};
use ncrr_core::Error;

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ncrr", version, about = "Real radicals and Nullstellensatz witnesses for left modules over the free *-algebra")]
pub struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Coefficient field; overrides the `field=` entry of the header.
    #[arg(long, global = true, value_parser = parse_field)]
    pub field: Option<FieldKind>,
    /// Seed for randomized internals.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monomial order for basis computation.
    #[arg(long, global = true, default_value = "deglex")]
    pub order: String,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduced left Gröbner basis of the generators.
    Groebner { file: PathBuf },
    /// Real radical of the module, with the certificates found per round.
    Realradical { file: PathBuf },
    /// Decide q ∈ rr(I).
    Member {
        /// Query polynomial (defaults to the file's `query:` line).
        #[arg(long)]
        q: Option<String>,
        /// Cross-check against the numeric zero-set oracle.
        #[arg(long)]
        oracle: bool,
        file: PathBuf,
    },
    /// Matrix-tuple witness (X, v) with p(X)v = 0 for all generators and q(X)v ≠ 0.
    Witness {
        #[arg(long)]
        q: Option<String>,
        /// Re-evaluate and print residuals.
        #[arg(long)]
        check: bool,
        /// Chip space the quotient is built on (default: ball over ℝ, minimal over ℂ/ℍ).
        #[arg(long, value_enum)]
        chips: Option<ChipsArg>,
        file: PathBuf,
    },
    /// One SOS round: find a nonzero sum of squares in I + I*.
    Sos {
        /// Print the reduced linear pencil.
        #[arg(long)]
        dump_pencil: bool,
        file: PathBuf,
    },
    /// Evaluate the polynomials at a matrix tuple.
    Eval {
        /// Matrix-tuple file: `n=<n>` then g row-major blocks.
        #[arg(long)]
        at: PathBuf,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ChipsArg {
    Ball,
    Minimal,
}

fn parse_field(s: &str) -> Result<FieldKind, String> {
    s.parse()
}

/// Text and JSON renderings of one command's result.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<Report, Failure>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::SignatureMismatch(_)
        | Error::DimensionMismatch(_)
        | Error::Unsupported(_)
        | Error::ZeroPolynomial => EXIT_USAGE,
        _ => EXIT_INDETERMINATE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SignatureMismatch(_) => "signature-mismatch",
        Error::DimensionMismatch(_) => "dimension-mismatch",
        Error::Parse { .. } => "parse",
        Error::ZeroPolynomial => "zero-polynomial",
        Error::OutsideSpan(_) => "outside-span",
        Error::Indeterminate(_) => "indeterminate",
        Error::CertificateUnverified(_) => "certificate-unverified",
        Error::NotRealOrIndeterminate(_) => "not-real-or-indeterminate",
        Error::Witness(_) => "witness",
        Error::IterationCap(_) => "iteration-cap",
        Error::Tolerance(_) => "tolerance",
        Error::Unsupported(_) => "unsupported",
    }
}

/// Runs the CLI on `argv` (including the program name); returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let command = command_name(&cli.cmd);
    let result = if cli.order != "deglex" {
        Err(Failure::Usage(format!("unsupported order `{}` (only deglex)", cli.order)))
    } else {
        dispatch(&cli)
    };
    match result {
        Ok(r) => {
            if cli.json {
                let mut doc = json!({ "schema": SCHEMA, "command": command });
                if let (Value::Object(d), Value::Object(extra)) = (&mut doc, r.json) {
                    d.extend(extra);
                }
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                let _ = write!(out, "{}", r.text);
            }
            r.code
        }
        Err(f) => {
            let (code, kind, msg, pos) = match &f {
                Failure::Usage(m) => (EXIT_USAGE, "usage", m.clone(), None),
                Failure::Core(e) => {
                    let pos = match e {
                        Error::Parse { line, col, .. } => Some((*line, *col)),
                        _ => None,
                    };
                    (exit_code(e), error_kind(e), e.to_string(), pos)
                }
            };
            if cli.json {
                let mut e = json!({ "kind": kind, "message": msg });
                if let Some((line, col)) = pos {
                    e["line"] = json!(line);
                    e["col"] = json!(col);
                }
                let doc = json!({ "schema": SCHEMA, "command": command, "error": e, "exit": code });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                let _ = writeln!(err, "error: {msg}");
            }
            code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Groebner { .. } => "groebner",
        Command::Realradical { .. } => "realradical",
        Command::Member { .. } => "member",
        Command::Witness { .. } => "witness",
        Command::Sos { .. } => "sos",
        Command::Eval { .. } => "eval",
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path, field: Option<FieldKind>) -> std::result::Result<ProblemFile, Failure> {
    let mut pf = parse_problem(&read(path)?)?;
    if let Some(f) = field {
        pf.field = f;
    }
    Ok(pf)
}

fn dispatch(cli: &Cli) -> Outcome {
    let opts = RrOptions::default();
    match &cli.cmd {
        Command::Groebner { file } => groebner(&load(file, cli.field)?),
        Command::Realradical { file } => realradical(&load(file, cli.field)?, &opts),
        Command::Member { q, oracle, file } => {
            let pf = load(file, cli.field)?;
            member(&pf, q.as_deref(), *oracle, cli.seed, &opts)
        }
        Command::Witness { q, check, chips, file } => {
            let pf = load(file, cli.field)?;
            let chips = match (chips, pf.field) {
                (Some(ChipsArg::Ball), _) => WitnessChips::Ball,
                (Some(ChipsArg::Minimal), _) => WitnessChips::Minimal,
                (None, FieldKind::R) => WitnessChips::Ball,
                (None, _) => WitnessChips::Minimal,
            };
            witness(&pf, q.as_deref(), *check, chips, &opts)
        }
        Command::Sos { dump_pencil, file } => sos(&load(file, cli.field)?, *dump_pencil, &opts),
        Command::Eval { at, file } => {
            let pf = load(file, cli.field)?;
            eval(&pf, &read(at)?)
        }
    }
}

// ---------------------------------------------------------------- rendering

fn header_line(sig: Signature, field: FieldKind) -> String {
    format!("sig g={} ell={} field={}\n", sig.g, sig.ell, field)
}

fn sig_json(sig: Signature, field: FieldKind) -> Value {
    json!({ "g": sig.g, "ell": sig.ell, "field": field.to_string() })
}

/// Terms as `{row, col, word, coeff}` with 1-based row/col, letters as strings, exact rational coefficients.
pub fn poly_json(p: &MatPoly) -> Value {
    let terms: Vec<Value> = p
        .terms
        .iter()
        .rev()
        .map(|(m, c)| {
            let word: Vec<String> = m.word.letters(p.sig.g).iter().map(|l| format!("x{}{}", l.index, if l.starred { "*" } else { "" })).collect();
            json!({ "row": m.row + 1, "col": m.col + 1, "word": word, "coeff": format_scalar(c) })
        })
        .collect();
    json!({ "text": print_poly(p), "rows": p.sig.nu, "terms": terms })
}

fn fmt_f(x: f64) -> String {
    let x = if x.abs() < 5e-13 { 0.0 } else { x };
    format!("{x:.12}")
}

fn matrix_text(m: &nalgebra::DMatrix<f64>) -> String {
    float_rows(m).iter().map(|r| r.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(" ") + "\n").collect()
}

fn hmat_rows(m: &HMat) -> Vec<Vec<Vec<f64>>> {
    let p = &m.parts;
    (0..p[0].nrows()).map(|i| (0..p[0].ncols()).map(|j| p.iter().map(|q| q[(i, j)]).collect()).collect()).collect()
}

fn hmat_text(m: &HMat) -> String {
    hmat_rows(m)
        .iter()
        .map(|r| {
            r.iter().map(|e| format!("({})", e.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(","))).collect::<Vec<_>>().join(" ")
                + "\n"
        })
        .collect()
}

/// Signature, generator rows and optional query rows over ℝ.
type RealInputs = (Signature, Vec<VecPoly>, Option<Vec<VecPoly>>);

/// Generators (and a query) carried to real rows; the realified signature for ℂ/ℍ.
fn real_inputs(pf: &ProblemFile, q: Option<&str>) -> std::result::Result<RealInputs, Failure> {
    fn lift<D: DivisionAlgebra>(pf: &ProblemFile, q: Option<&str>) -> std::result::Result<RealInputs, Failure> {
        let gens = pf.field_gens::<D>()?;
        let sig = Signature::vector(D::DIM * pf.g, D::DIM * pf.ell);
        let rows = gens.iter().flat_map(realify).collect();
        let q = pf.field_query::<D>(q)?.map(|qs| qs.iter().flat_map(realify).collect());
        Ok((sig, rows, q))
    }
    match pf.field {
        FieldKind::R => {
            let gens = pf.real_gens()?;
            let q = pf.real_query(q)?.map(|p| p.rows());
            Ok((pf.signature(), flatten_rows(&gens), q))
        }
        FieldKind::C => lift::<Complex>(pf, q),
        FieldKind::H => lift::<Quat>(pf, q),
    }
}

fn realified_note(pf: &ProblemFile) -> String {
    match pf.field {
        FieldKind::R => String::new(),
        f => format!("# realified from field={f} g={} ell={}\n", pf.g, pf.ell),
    }
}

// ---------------------------------------------------------------- commands

fn groebner(pf: &ProblemFile) -> Outcome {
    let (sig, gens, _) = real_inputs(pf, None)?;
    let gb = reduced_lgb(sig, &gens)?;
    let mut text = realified_note(pf) + &header_line(sig, FieldKind::R);
    for p in &gb.elems {
        text += &print_poly(p);
        text.push('\n');
    }
    let json = json!({
        "input": sig_json(pf.signature(), pf.field),
        "signature": sig_json(sig, FieldKind::R),
        "order": "deglex",
        "basis": gb.elems.iter().map(poly_json).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, code: EXIT_OK })
}

fn realradical(pf: &ProblemFile, opts: &RrOptions) -> Outcome {
    let (sig, gens, _) = real_inputs(pf, None)?;
    let rr = real_radical_with(sig, &gens, opts)?;
    let mut text = realified_note(pf) + &header_line(sig, FieldKind::R);
    text += &format!("# iterations: {}\n", rr.iterations);
    for (i, cert) in rr.certificates.iter().enumerate() {
        let parts: Vec<String> = cert.iter().map(print_poly).collect();
        text += &format!("# round {}: {}\n", i + 1, parts.join(", "));
    }
    for p in &rr.basis.elems {
        text += &print_poly(p);
        text.push('\n');
    }
    let json = json!({
        "input": sig_json(pf.signature(), pf.field),
        "signature": sig_json(sig, FieldKind::R),
        "basis": rr.basis.elems.iter().map(poly_json).collect::<Vec<_>>(),
        "iterations": rr.iterations,
        "degree_watermark": rr.degree_watermark,
        "rounds": rr.certificates.iter().map(|c| c.iter().map(poly_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, code: EXIT_OK })
}

fn member(pf: &ProblemFile, q: Option<&str>, oracle: bool, seed: u64, opts: &RrOptions) -> Outcome {
    let (sig, gens, qrows) = real_inputs(pf, q)?;
    let qrows = qrows.ok_or_else(|| Failure::Usage("no query: pass --q or add a `query:` line".into()))?;
    let rr = real_radical_with(sig, &gens, opts)?;
    let is_member = qrows.iter().all(|r| rr.basis.contains(r));
    let mut text = String::from(if is_member { "MEMBER\n" } else { "NOT-MEMBER\n" });
    let mut json = json!({
        "input": sig_json(pf.signature(), pf.field),
        "member": is_member,
        "iterations": rr.iterations,
    });
    if oracle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut verdict = "consistent";
        let mut value = None;
        let mut any_kernel = false;
        for r in &qrows {
            match numeric_zero_oracle(&gens, r, &[1, 2, 3], 20, &mut rng)? {
                Verdict::Refuted { value: v, .. } => {
                    verdict = "refuted";
                    value = Some(v);
                    break;
                }
                Verdict::ConsistentWithMember => any_kernel = true,
                Verdict::Inconclusive => {}
            }
        }
        if verdict == "consistent" && !any_kernel {
            verdict = "inconclusive";
        }
        text += &format!("# oracle: {verdict}");
        if let Some(v) = value {
            text += &format!(" |q(X)v| = {}", fmt_f(v));
        }
        text.push('\n');
        json["oracle"] = json!({ "verdict": verdict, "value": value, "seed": seed });
    }
    Ok(Report { text, json, code: if is_member { EXIT_OK } else { EXIT_NEGATIVE } })
}

fn member_report(pf: &ProblemFile) -> Report {
    Report {
        text: "MEMBER\n# no witness: q lies in the real radical\n".into(),
        json: json!({ "input": sig_json(pf.signature(), pf.field), "member": true }),
        code: EXIT_NEGATIVE,
    }
}

fn witness(pf: &ProblemFile, q: Option<&str>, check: bool, chips: WitnessChips, opts: &RrOptions) -> Outcome {
    match pf.field {
        FieldKind::R => witness_real(pf, q, check, chips, opts),
        FieldKind::C => witness_field::<Complex>(pf, q, check, chips, opts),
        FieldKind::H => witness_field::<Quat>(pf, q, check, chips, opts),
    }
}

fn witness_real(pf: &ProblemFile, q: Option<&str>, check: bool, chips: WitnessChips, opts: &RrOptions) -> Outcome {
    let (sig, gens, qrows) = real_inputs(pf, q)?;
    let qrows = qrows.ok_or_else(|| Failure::Usage("no query: pass --q or add a `query:` line".into()))?;
    let rr = real_radical_with(sig, &gens, opts)?;
    let missing: Vec<VecPoly> = qrows.iter().filter(|r| !rr.basis.contains(r)).cloned().collect();
    if missing.is_empty() {
        return Ok(member_report(pf));
    }
    let w = gns_witness_with(&rr.basis, &missing, chips, &opts.sdp)?;
    let mut text = format!("NOT-MEMBER\nn={}\n", w.n);
    for (i, x) in w.x.mats.iter().enumerate() {
        text += &format!("# X{}\n{}", i + 1, matrix_text(x));
    }
    text += "# v\n";
    for x in w.v.iter() {
        text += &fmt_f(*x);
        text.push('\n');
    }
    let mut json = json!({
        "input": sig_json(pf.signature(), pf.field),
        "member": false,
        "n": w.n,
        "x": w.x.mats.iter().map(float_rows).collect::<Vec<_>>(),
        "v": w.v.iter().copied().collect::<Vec<_>>(),
    });
    if check {
        let mut gen_res = Vec::new();
        for p in &gens {
            gen_res.push(w.residual(p)?);
        }
        let mut q_res: f64 = 0.0;
        for r in &qrows {
            q_res = q_res.max(w.residual(r)?);
        }
        text += &check_text(&gen_res, q_res);
        json["check"] = json!({ "generators": gen_res, "query": q_res, "norm_v": w.v.norm() });
    }
    Ok(Report { text, json, code: EXIT_OK })
}

fn check_text(gen_res: &[f64], q_res: f64) -> String {
    let mut s = String::new();
    for (i, r) in gen_res.iter().enumerate() {
        s += &format!("# residual p{} = {r:.3e}\n", i + 1);
    }
    s += &format!("# residual q = {q_res:.3e}\n");
    s
}

fn witness_field<D: DivisionAlgebra>(pf: &ProblemFile, q: Option<&str>, check: bool, chips: WitnessChips, opts: &RrOptions) -> Outcome {
    let gens = pf.field_gens::<D>()?;
    let qs = pf.field_query::<D>(q)?.ok_or_else(|| Failure::Usage("no query: pass --q or add a `query:` line".into()))?;
    let mut found = None;
    for qr in &qs {
        let out = solve_over(&gens, qr, opts, chips)?;
        if let Some(w) = out.witness {
            found = Some((qr, w));
            break;
        }
    }
    let Some((qr, w)) = found else {
        return Ok(member_report(pf));
    };
    let mut text = format!("NOT-MEMBER\nn={}\n", w.n);
    for (i, x) in w.x.iter().enumerate() {
        text += &format!("# X{}\n{}", i + 1, hmat_text(x));
    }
    text += &format!("# w\n{}", hmat_text(&w.w));
    let mut json = json!({
        "input": sig_json(pf.signature(), pf.field),
        "member": false,
        "n": w.n,
        "x": w.x.iter().map(hmat_rows).collect::<Vec<_>>(),
        "w": hmat_rows(&w.w),
    });
    if check {
        let mut gen_res = Vec::new();
        for p in &gens {
            gen_res.push(eval_hpoly(p, &w.x, &w.w)?.norm());
        }
        let q_res = eval_hpoly(qr, &w.x, &w.w)?.norm();
        text += &check_text(&gen_res, q_res);
        json["check"] = json!({ "generators": gen_res, "query": q_res, "norm_v": w.w.norm() });
    }
    Ok(Report { text, json, code: EXIT_OK })
}

fn sos(pf: &ProblemFile, dump: bool, opts: &RrOptions) -> Outcome {
    let (sig, gens, _) = real_inputs(pf, None)?;
    let gb = reduced_lgb(sig, &gens)?;
    let mut text = realified_note(pf);
    let mut json = json!({ "input": sig_json(pf.signature(), pf.field), "signature": sig_json(sig, FieldKind::R) });
    if gb.all_constant() {
        text += "NO-SOS\n";
        json["sos"] = json!(false);
        json["certificate"] = json!([]);
        return Ok(Report { text, json, code: EXIT_NEGATIVE });
    }
    let chips = chip_space_from_generators(sig, &gb.elems);
    if dump {
        let pencil = reduce_zero_diagonal(&assemble_pencil(&gb, &chips));
        for line in pencil.dump(sig.g).lines() {
            text += &format!("# {line}\n");
        }
        json["pencil"] = json!({
            "size": pencil.size(),
            "monomials": pencil.monos.iter().map(|m| json!({ "col": m.col + 1, "word": format_word(&m.word, sig.g) })).collect::<Vec<_>>(),
            "generators": pencil.bmats.len(),
        });
    }
    let round = sos_round(&gb, &chips, &opts.sdp)?;
    let found = !round.certificate.is_empty();
    text += if found { "SOS\n" } else { "NO-SOS\n" };
    for p in &round.certificate {
        text += &print_poly(p);
        text.push('\n');
    }
    json["sos"] = json!(found);
    json["pencil_size"] = json!(round.pencil_size);
    json["certificate"] = json!(round.certificate.iter().map(poly_json).collect::<Vec<_>>());
    Ok(Report { text, json, code: if found { EXIT_OK } else { EXIT_NEGATIVE } })
}

fn eval(pf: &ProblemFile, tuple_text: &str) -> Outcome {
    let tuple = parse_tuple(tuple_text, pf.g)?;
    let mut text = String::new();
    let mut values = Vec::new();
    match pf.field {
        FieldKind::R => {
            let mut polys = pf.real_gens()?;
            polys.extend(pf.real_query(None)?);
            for p in &polys {
                let m = p.evaluate_exact(&tuple.exact)?;
                let rows: Vec<Vec<String>> = (0..m.rows).map(|i| (0..m.cols).map(|j| format_scalar(m.get(i, j))).collect()).collect();
                text += &format!("[{}]\n", rows.iter().map(|r| format!("[{}]", r.join(","))).collect::<Vec<_>>().join(","));
                values.push(json!({ "poly": print_poly(p), "value": rows }));
            }
        }
        FieldKind::C => eval_field::<Complex>(pf, &tuple, &mut text, &mut values)?,
        FieldKind::H => eval_field::<Quat>(pf, &tuple, &mut text, &mut values)?,
    }
    let json = json!({ "input": sig_json(pf.signature(), pf.field), "n": tuple.n, "values": values });
    Ok(Report { text, json, code: EXIT_OK })
}

fn eval_field<D: DivisionAlgebra>(
    pf: &ProblemFile,
    tuple: &ncrr_core::problem::TupleFile,
    text: &mut String,
    values: &mut Vec<Value>,
) -> std::result::Result<(), Failure> {
    let x: Vec<HMat> = tuple.to_f64()?.mats.into_iter().map(|m| HMat::real(D::DIM, m)).collect();
    let mut polys: Vec<HPoly<D>> = pf.field_gens::<D>()?;
    polys.extend(pf.field_query::<D>(None)?.unwrap_or_default());
    let id = HMat::real(D::DIM, nalgebra::DMatrix::identity(pf.ell * tuple.n, pf.ell * tuple.n));
    for p in &polys {
        let m = eval_hpoly(p, &x, &id)?;
        *text += &format!("# {p}\n{}", hmat_text(&m));
        values.push(json!({ "poly": p.to_string(), "value": hmat_rows(&m) }));
    }
    Ok(())
}

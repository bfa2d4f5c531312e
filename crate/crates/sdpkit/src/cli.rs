//! Command-line front door: parse problem files, dispatch to the modules
//! and emit JSON (or plain-text) reports.
//!
//! Exit codes: 0 on success, 2 on input/parse errors, 3 on numerical
//! failures. Floats are serialized with 12 significant digits; NaN and
//! infinities are refused. All randomness flows through `--seed`.

use crate::copos::{self, Certificate, ConeVerdict};
use crate::error::Error;
use crate::maxcut;
use crate::qcr::{self, Scheme};
use crate::sdpmodel::{parse_sdpa, BlockMatrix};
use crate::sdpsolve::{self, SolveOptions, SolveReport};
use crate::sos;
use crate::symcore::{self, SymMatrix};
use crate::theta;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Read;

#[derive(Parser)]
#[command(
    name = "sdpkit",
    about = "Dense SDP toolkit: PSD tests, factorizations, a small interior-point solver, Lovász theta, copositive/SOS hierarchies, QCR branch-and-bound and Goemans-Williamson rounding",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Input file path, or `-` for stdin.
    #[arg(long)]
    input: String,
    /// Numerical tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// RNG seed (all randomness flows through it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounding trials.
    #[arg(long, default_value_t = 2000)]
    trials: u32,
    /// Hierarchy level.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Redundant-constraint scheme for `qcr`.
    #[arg(long, value_enum, default_value_t = SchemeArg::R1)]
    scheme: SchemeArg,
    /// Worker threads for parallelizable enumeration (default 1 keeps
    /// runs byte-reproducible across machines).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    R1,
    R2,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::R1 => Scheme::R1,
            SchemeArg::R2 => Scheme::R2,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue PSD verdict for a symmetric matrix.
    Psd(Common),
    /// Cholesky factorization (semidefinite pivot rule).
    Chol(Common),
    /// Jacobi eigendecomposition.
    Eig(Common),
    /// Solve a primal-form SDP in the SDPA text format.
    Solve(Common),
    /// Lovász theta report for a graph (all formulations + sandwich data).
    Theta(Common),
    /// Maximum stable set: exact, QP local search and alpha0 relaxation.
    Stable(Common),
    /// Copositivity hierarchy battery for a symmetric matrix.
    Copos(Common),
    /// Sum-of-squares decomposition of a homogeneous polynomial.
    Sos(Common),
    /// Goemans-Williamson bound and hyperplane rounding.
    Maxcut(Common),
    /// QCR convexification and exact branch-and-bound.
    Qcr(Common),
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            println!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ParseError { .. } | Error::Io(_) | Error::DimensionMismatch(_) => 2,
                _ => 3,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<String, Error> {
    match cli.cmd {
        Cmd::Psd(a) => cmd_psd(&a),
        Cmd::Chol(a) => cmd_chol(&a),
        Cmd::Eig(a) => cmd_eig(&a),
        Cmd::Solve(a) => cmd_solve(&a),
        Cmd::Theta(a) => cmd_theta(&a),
        Cmd::Stable(a) => cmd_stable(&a),
        Cmd::Copos(a) => cmd_copos(&a),
        Cmd::Sos(a) => cmd_sos(&a),
        Cmd::Maxcut(a) => cmd_maxcut(&a),
        Cmd::Qcr(a) => cmd_qcr(&a),
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn cmd_psd(a: &Common) -> Result<String, Error> {
    let m = symcore::parse_matrix_text(&read_input(&a.input)?)?;
    let v = symcore::psd_check(&m, a.tol.unwrap_or(symcore::DEFAULT_TOL))?;
    let mut o = Json::object();
    o.field("is_psd", Json::bool(v.is_psd));
    o.field("is_pd", Json::bool(v.is_pd));
    o.field("min_eigenvalue", Json::num(v.min_eigenvalue)?);
    if let Some(w) = &v.witness {
        o.field("witness", Json::vec(w)?);
    }
    render(a, o)
}

fn cmd_chol(a: &Common) -> Result<String, Error> {
    let m = symcore::parse_matrix_text(&read_input(&a.input)?)?;
    let f = symcore::chol_psd(&m, a.tol.unwrap_or(1e-9))?;
    let mut o = Json::object();
    o.field("rank", Json::int(f.rank as i64));
    o.field("lower", Json::mat(&f.lower)?);
    render(a, o)
}

fn cmd_eig(a: &Common) -> Result<String, Error> {
    let m = symcore::parse_matrix_text(&read_input(&a.input)?)?;
    let e = symcore::eig_decompose(&m, a.tol.unwrap_or(symcore::DEFAULT_TOL))?;
    let mut o = Json::object();
    o.field("values", Json::vec(&e.values)?);
    o.field("vectors", Json::mat(&e.vectors)?);
    render(a, o)
}

fn cmd_solve(a: &Common) -> Result<String, Error> {
    let p = parse_sdpa(&read_input(&a.input)?)?;
    let mut opts = SolveOptions::default();
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    let rep = sdpsolve::solve(&p, &opts)?;
    render(a, solve_report_json(&rep)?)
}

fn solve_report_json(rep: &SolveReport) -> Result<Json, Error> {
    let mut o = Json::object();
    o.field("status", Json::str(&format!("{:?}", rep.status)));
    o.field("pobj", Json::num(rep.pobj)?);
    o.field("dobj", Json::num(rep.dobj)?);
    o.field("gap", Json::num(rep.gap)?);
    o.field("iters", Json::int(rep.iters as i64));
    o.field("x", Json::vec(&rep.x)?);
    o.field("Y", block_json(&rep.y)?);
    Ok(o)
}

fn block_json(b: &BlockMatrix) -> Result<Json, Error> {
    let mut blocks = Vec::new();
    for blk in &b.blocks {
        blocks.push(sym_json(blk)?);
    }
    Ok(Json::Array(blocks))
}

fn sym_json(m: &SymMatrix) -> Result<Json, Error> {
    let mut rows = Vec::new();
    for i in 0..m.order() {
        rows.push(Json::vec(m.row(i))?);
    }
    Ok(Json::Array(rows))
}

fn cmd_theta(a: &Common) -> Result<String, Error> {
    let g = parse_graph_auto(&read_input(&a.input)?)?;
    let r = theta::theta_report(&g)?;
    let mut o = Json::object();
    o.field("theta_primal", Json::num(r.theta_primal)?);
    o.field("theta_dual", Json::num(r.theta_dual)?);
    o.field("theta_prime", Json::num(r.theta_prime)?);
    o.field("theta_lambda_max", Json::num(r.theta_lambda_max)?);
    o.field("theta_lambda_ratio", Json::num(r.theta_lambda_ratio)?);
    o.field("theta_orthonormal", Json::num(r.theta_orthonormal)?);
    o.field("alpha", Json::int(r.alpha as i64));
    o.field("clique_cover", Json::int(r.clique_cover as i64));
    o.field("chi_star", Json::num(r.chi_star)?);
    render(a, o)
}

fn cmd_stable(a: &Common) -> Result<String, Error> {
    let g = parse_graph_auto(&read_input(&a.input)?)?;
    let alpha = theta::alpha_bruteforce(&g)?;
    let (value, x) = copos::stable_via_qp(&g)?;
    let a0 = copos::alpha0(&g)?;
    let mut o = Json::object();
    o.field("alpha", Json::int(alpha as i64));
    o.field("qp_value", Json::num(value)?);
    o.field("x", Json::vec(&x)?);
    o.field("alpha0", Json::num(a0)?);
    render(a, o)
}

fn cmd_copos(a: &Common) -> Result<String, Error> {
    let m = symcore::parse_matrix_text(&read_input(&a.input)?)?;
    let mut o = Json::object();
    o.field("dnn", verdict_json(&copos::in_dnn(&m)?)?);
    o.field("splus_plus_n", verdict_json(&copos::in_splus_plus_n(&m)?)?);
    o.field("k_r", verdict_json(&copos::k_r_member(&m, a.r.min(1))?)?);
    o.field("p_outer", verdict_json(&copos::p_r_outer(&m, a.r.max(1))?)?);
    render(a, o)
}

fn verdict_json(v: &ConeVerdict) -> Result<Json, Error> {
    let mut o = Json::object();
    o.field("cone", Json::str(&format!("{:?}", v.cone)));
    o.field("member", Json::bool(v.member));
    if let Some(r) = v.r {
        o.field("r", Json::int(r as i64));
    }
    match &v.certificate {
        Some(Certificate::Split { s, n }) => {
            let mut c = Json::object();
            c.field("s", sym_json(s)?);
            c.field("n", sym_json(n)?);
            o.field("certificate", c);
        }
        Some(Certificate::Violation { z, value }) => {
            let mut c = Json::object();
            c.field("z", Json::Array(z.iter().map(|&v| Json::int(v as i64)).collect()));
            c.field("value", Json::num(*value)?);
            o.field("certificate", c);
        }
        None => {}
    }
    Ok(o)
}

fn cmd_sos(a: &Common) -> Result<String, Error> {
    let p = sos::parse_poly_text(&read_input(&a.input)?)?;
    let out = sos::sos_decompose(&p)?;
    let mut o = Json::object();
    match out {
        sos::SosResult::Certificate(cert) => {
            o.field("sos", Json::bool(true));
            o.field(
                "basis",
                Json::Array(
                    cert.basis
                        .iter()
                        .map(|e| Json::Array(e.iter().map(|&x| Json::int(x as i64)).collect()))
                        .collect(),
                ),
            );
            o.field("gram", sym_json(&cert.gram)?);
            let mut sq = Vec::new();
            for s in &cert.squares {
                sq.push(Json::vec(s)?);
            }
            o.field("squares", Json::Array(sq));
        }
        sos::SosResult::Infeasible { margin } => {
            o.field("sos", Json::bool(false));
            o.field("margin", Json::num(margin)?);
        }
    }
    render(a, o)
}

fn cmd_maxcut(a: &Common) -> Result<String, Error> {
    let g = maxcut::parse_weighted_graph(&read_input(&a.input)?)?;
    let (_, x) = maxcut::gw_bound(&g)?;
    let r = maxcut::round_hyperplane(&x, &g, a.seed, a.trials, a.threads)?;
    let mut o = Json::object();
    o.field("sdp_bound", Json::num(r.sdp_bound)?);
    o.field("value", Json::num(r.value)?);
    o.field("best_over_trials", Json::num(r.best_over_trials)?);
    o.field("mean_over_trials", Json::num(r.mean_over_trials)?);
    o.field("trials", Json::int(r.trials as i64));
    o.field(
        "assignment",
        Json::Array(r.assignment.iter().map(|&z| Json::int(z as i64)).collect()),
    );
    render(a, o)
}

fn cmd_qcr(a: &Common) -> Result<String, Error> {
    let q = qcr::parse_binqp_text(&read_input(&a.input)?)?;
    let (bnb, _, bound) = qcr::qcr_solve(&q, a.scheme.into())?;
    let mut o = Json::object();
    o.field("best_obj", Json::num(bnb.best_obj)?);
    o.field(
        "best_x",
        Json::Array(bnb.best_x.iter().map(|&b| Json::int(b as i64)).collect()),
    );
    o.field("nodes", Json::int(bnb.nodes as i64));
    o.field("root_bound", Json::num(bnb.root_bound)?);
    o.field("sdp_bound", Json::num(bound)?);
    render(a, o)
}

/// Accepts both the DIMACS-like and the compact graph forms.
fn parse_graph_auto(text: &str) -> Result<theta::Graph, Error> {
    let head = text.trim_start();
    if head.starts_with('p') || head.starts_with('c') || head.starts_with('e') {
        theta::parse_graph_dimacs(text)
    } else {
        theta::parse_graph_compact(text)
    }
}

fn render(a: &Common, json: Json) -> Result<String, Error> {
    match a.format {
        Format::Json => Ok(json.render()),
        Format::Text => Ok(json.render_text()),
    }
}

/// Minimal ordered JSON value with deterministic 12-significant-digit
/// float formatting. NaN or infinite values are refused.
pub enum Json {
    Object(Vec<(String, Json)>),
    Array(Vec<Json>),
    Number(String),
    String(String),
    Bool(bool),
}

impl Json {
    fn object() -> Json {
        Json::Object(Vec::new())
    }

    fn field(&mut self, name: &str, value: Json) {
        if let Json::Object(fields) = self {
            fields.push((name.to_string(), value));
        }
    }

    fn bool(v: bool) -> Json {
        Json::Bool(v)
    }

    fn int(v: i64) -> Json {
        Json::Number(v.to_string())
    }

    fn str(v: &str) -> Json {
        Json::String(v.to_string())
    }

    fn num(v: f64) -> Result<Json, Error> {
        if !v.is_finite() {
            return Err(Error::NumericalTrouble(format!(
                "refusing to serialize non-finite value {v}"
            )));
        }
        Ok(Json::Number(format_sig(v, 12)))
    }

    fn vec(vs: &[f64]) -> Result<Json, Error> {
        let mut out = Vec::with_capacity(vs.len());
        for &v in vs {
            out.push(Json::num(v)?);
        }
        Ok(Json::Array(out))
    }

    fn mat(m: &symcore::Mat) -> Result<Json, Error> {
        let mut rows = Vec::with_capacity(m.rows);
        for i in 0..m.rows {
            rows.push(Json::vec(m.row(i))?);
        }
        Ok(Json::Array(rows))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Object(fields) => {
                out.push('{');
                for (k, (name, v)) in fields.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push('"');
                    out.push_str(name);
                    out.push_str("\":");
                    v.write(out);
                }
                out.push('}');
            }
            Json::Array(items) => {
                out.push('[');
                for (k, v) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    v.write(out);
                }
                out.push(']');
            }
            Json::Number(n) => out.push_str(n),
            Json::String(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        }
    }

    /// Plain-text rendering: one `path = value` line per leaf.
    fn render_text(&self) -> String {
        fn walk(v: &Json, path: &str, out: &mut String) {
            match v {
                Json::Object(fields) => {
                    for (name, v) in fields {
                        let p = if path.is_empty() {
                            name.clone()
                        } else {
                            format!("{path}.{name}")
                        };
                        walk(v, &p, out);
                    }
                }
                Json::Array(items) => {
                    let flat = items
                        .iter()
                        .all(|i| matches!(i, Json::Number(_) | Json::Bool(_) | Json::String(_)));
                    if flat {
                        let parts: Vec<String> = items.iter().map(|i| i.render()).collect();
                        out.push_str(&format!("{path} = [{}]\n", parts.join(", ")));
                    } else {
                        for (k, item) in items.iter().enumerate() {
                            walk(item, &format!("{path}[{k}]"), out);
                        }
                    }
                }
                leaf => out.push_str(&format!("{path} = {}\n", leaf.render())),
            }
        }
        let mut s = String::new();
        walk(self, "", &mut s);
        s
    }
}

/// Rounds to `sig` significant digits and prints the shortest roundtrip
/// form of the rounded value. Rounding goes through the decimal string so
/// extreme exponents stay exact.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", sig - 1, v).parse().unwrap();
    let a = rounded.abs();
    if a != 0.0 && (a >= 1e16 || a < 1e-5) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(2f64.sqrt(), 12), "1.41421356237");
        assert_eq!(format_sig(-1234567.0, 12), "-1234567");
        assert_eq!(format_sig(1e-30, 12), "1e-30");
    }

    #[test]
    fn json_rendering_is_ordered() {
        let mut o = Json::object();
        o.field("b", Json::int(1));
        o.field("a", Json::Array(vec![Json::bool(true), Json::num(0.5).unwrap()]));
        assert_eq!(o.render(), "{\"b\":1,\"a\":[true,0.5]}");
    }

    #[test]
    fn nan_is_refused() {
        assert!(Json::num(f64::NAN).is_err());
        assert!(Json::num(f64::INFINITY).is_err());
    }
}

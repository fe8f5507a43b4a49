//! Batch front-end. Every invocation reads JSON inputs and writes one JSON
//! report; the exit code is 0 on pass, 2 on a certified failure and 1 on error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classifier::{self, Certificate, ClassKind, GridConfig};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::json::{self, MatJson};
use crate::limits::{self, ClaimedClass, LimitMode, LimitOptions};
use crate::linalg::{self, CMat};
use crate::matmeasure::{self, MatrixMeasure};
use crate::stieltjes_repr::{self, Evaluator, Repr, ReprKind};
use crate::transforms::{self, Direction};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

const TOL_BOUNDS: [f64; 2] = [1e-15, 1e-2];

#[derive(Debug, Parser)]
#[command(name = "stieltjes-kit", version, about = "Matrix-valued Stieltjes functions on rays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Input JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized sample grid.
    #[arg(long, default_value_t = GridConfig::default().seed)]
    pub grid_seed: u64,
    /// Certification tolerance, in [1e-15, 1e-2].
    #[arg(long, default_value_t = classifier::TOL_CERT)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate F on the sample grid.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Certify membership in a class.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Class: s, s_via_pair, s0, sdot, sinf, t, t_via_pair, t0, tdot, tinf.
        #[arg(long, alias = "class")]
        kind: String,
    },
    /// Recover limit-defined parameters.
    Params {
        #[command(flatten)]
        common: Common,
        /// Claimed class: s, s0, sdot, sinf, t, t0.
        #[arg(long, alias = "kind")]
        class: String,
        /// Endpoint; defaults to the representation's own.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also report a single limit in this mode.
        #[arg(long)]
        mode: Option<String>,
        /// Ray angle for `--mode radial`.
        #[arg(long)]
        phi: Option<f64>,
    },
    /// Convert to another representation of the same function.
    Convert {
        #[command(flatten)]
        common: Common,
        /// Target kind: stieltjes_pair, kk_pair, nevanlinna, s0, sinf_triple, t_pair, t0, tinf_triple.
        #[arg(long)]
        to: String,
        /// Endpoint needed when leaving the Nevanlinna form.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Apply a class-preserving map.
    Transform {
        #[command(flatten)]
        common: Common,
        /// pinv, neg_pinv, dual, transpose or congruence.
        #[arg(long)]
        op: String,
        /// For neg_pinv: sinf_to_s, s_to_sinf, tinf_to_t, t_to_tinf.
        #[arg(long)]
        direction: Option<String>,
        /// New endpoint for `dual` from the T side.
        #[arg(long)]
        alpha: Option<f64>,
        /// New endpoint for `dual` from the S side.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Moments s_0..s_m of the measure and the block Hankel PSD margin.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
    /// Run every applicable check on one representation.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        m: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Eval { common }
            | Command::Certify { common, .. }
            | Command::Params { common, .. }
            | Command::Convert { common, .. }
            | Command::Transform { common, .. }
            | Command::Moments { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}

/// Report plus the exit code it implies.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

impl Outcome {
    fn pass(report: Value) -> Self {
        Outcome { report, code: EXIT_PASS }
    }
}

/// Parse `argv`, run, write the report and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let threads = exec::init_threads_from_env();
    match execute(&cli.command, threads).and_then(|o| emit(&cli.command.common().out, &o.report).map(|_| o.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn emit(out: &Option<PathBuf>, report: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

/// Prefix an input error with the file it came from.
fn at(path: &Path, e: Error) -> Error {
    match e {
        Error::InvalidInput(s) => Error::InvalidInput(format!("{}: {s}", path.display())),
        other => Error::InvalidInput(format!("{}: {other}", path.display())),
    }
}

fn load_repr(path: &Path) -> Result<Repr> {
    json::repr_from_str(&read(path)?).map_err(|e| at(path, e))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// Endpoint of the representation; a Nevanlinna triple uses its pole ray, or 0 if it has no poles.
fn endpoint_of(repr: &Repr) -> f64 {
    let e = repr.endpoint().unwrap_or(repr.excluded_set().endpoint);
    if e.is_finite() {
        e
    } else {
        0.0
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(TOL_BOUNDS[0]..=TOL_BOUNDS[1]).contains(&tol) {
        return Err(Error::InvalidInput(format!("--tol {tol:e} outside [{:e}, {:e}]", TOL_BOUNDS[0], TOL_BOUNDS[1])));
    }
    Ok(())
}

fn header(name: &str, c: &Common, threads: Option<usize>) -> Value {
    json!({
        "command": name,
        "input": c.input.display().to_string(),
        "grid_seed": c.grid_seed,
        "tol": c.tol,
        "threads": threads,
    })
}

fn merge(mut head: Value, body: Value) -> Value {
    if let (Value::Object(h), Value::Object(b)) = (&mut head, body) {
        h.extend(b);
    }
    head
}

/// `(z, F(z))` on the grid; points where `f` is undefined carry the error instead.
fn sample(f: &Evaluator, center: f64, grid: &GridConfig) -> Vec<Value> {
    let center = if center.is_finite() { center } else { 0.0 };
    let pts = classifier::grid_points(grid, center, !f.excluded().is_right());
    Exec::default().map(&pts, |p| match f.eval(p.z) {
        Ok(v) => json!({ "z": [p.z.re, p.z.im], "region": p.region, "F": linalg::to_pairs(&v) }),
        Err(e) => json!({ "z": [p.z.re, p.z.im], "region": p.region, "error": e.to_string() }),
    })
}

fn certify(f: &Evaluator, endpoint: f64, kind: ClassKind, c: &Common) -> Result<Certificate> {
    let grid = GridConfig::with_seed(c.grid_seed);
    Ok(classifier::certify_class(f, endpoint, kind, &grid)?.with_tol_cert(c.tol))
}

pub fn execute(cmd: &Command, threads: Option<usize>) -> Result<Outcome> {
    let c = cmd.common();
    check_tol(c.tol)?;
    match cmd {
        Command::Eval { .. } => {
            let repr = load_repr(&c.input)?;
            let f = repr.evaluator();
            let grid = GridConfig::with_seed(c.grid_seed);
            let body = json!({
                "representation": repr.kind(),
                "grid": grid,
                "points": sample(&f, endpoint_of(&repr), &grid),
            });
            Ok(Outcome::pass(merge(header("eval", c, threads), body)))
        }
        Command::Certify { kind, .. } => {
            let class = ClassKind::parse(kind).ok_or_else(|| Error::InvalidInput(format!("unknown class `{kind}`")))?;
            let repr = load_repr(&c.input)?;
            let cert = certify(&repr.evaluator(), endpoint_of(&repr), class, c)?;
            let code = if cert.passed() { EXIT_PASS } else { EXIT_FAIL };
            let body = json!({ "certificate": cert, "witness": if cert.passed() { None } else { cert.worst() } });
            Ok(Outcome { report: merge(header("certify", c, threads), body), code })
        }
        Command::Params { class, alpha, mode, phi, .. } => {
            let claimed =
                ClaimedClass::parse(class).ok_or_else(|| Error::InvalidInput(format!("unknown class `{class}`")))?;
            let repr = load_repr(&c.input)?;
            let f = repr.evaluator();
            let alpha = alpha.unwrap_or_else(|| endpoint_of(&repr));
            let record = limits::extract_params(&f, alpha, claimed)?;
            let mut body = json!({ "params": record });
            if let Some(m) = mode {
                let mode =
                    LimitMode::parse(m, *phi).ok_or_else(|| Error::InvalidInput(format!("unknown mode `{m}`")))?;
                let opts = LimitOptions { center: Some(alpha), ..LimitOptions::default() };
                body["limit"] =
                    json!({ "mode": m, "phi": phi, "estimate": limits::limit_at_infinity_with(&f, mode, opts)? });
            }
            Ok(Outcome::pass(merge(header("params", c, threads), body)))
        }
        Command::Convert { to, alpha, .. } => {
            let target = ReprKind::parse(to).ok_or_else(|| Error::InvalidInput(format!("unknown kind `{to}`")))?;
            let repr = load_repr(&c.input)?;
            let conv = stieltjes_repr::convert(&repr, target, *alpha)?;
            Ok(Outcome::pass(json::repr_to_value(&conv)))
        }
        Command::Transform { op, direction, alpha, beta, .. } => {
            transform(c, op, direction.as_deref(), *alpha, *beta, threads)
        }
        Command::Moments { m, .. } => {
            let mu = load_measure(&c.input)?;
            Ok(Outcome::pass(merge(header("moments", c, threads), moments_body(&mu, *m))))
        }
        Command::Report { m, .. } => report(c, *m, threads),
    }
}

fn moments_body(mu: &MatrixMeasure, m: usize) -> Value {
    let s = mu.moments(m);
    let margins: Vec<f64> = (0..=m).map(|k| matmeasure::hankel_psd_margin(&s[..=k])).collect();
    json!({
        "m": m,
        "moments": s.iter().map(|x| linalg::to_pairs(x.mat())).collect::<Vec<_>>(),
        "hankel_psd_margins": margins,
    })
}

/// A bare measure file, or the measure of a representation file.
fn load_measure(path: &Path) -> Result<MatrixMeasure> {
    let text = read(path)?;
    let is_repr = serde_json::from_str::<Value>(&text)
        .map_err(|e| at(path, Error::InvalidInput(format!("malformed JSON: {e}"))))?
        .get("kind")
        .is_some();
    if is_repr {
        Ok(load_repr(path)?.measure().clone())
    } else {
        json::measure_from_str(&text).map_err(|e| at(path, e))
    }
}

#[derive(serde::Deserialize)]
struct CongruenceTerm {
    #[serde(rename = "A")]
    a: MatJson,
    repr: json::ReprJson,
}

#[derive(serde::Deserialize)]
struct CongruenceFile {
    terms: Vec<CongruenceTerm>,
}

fn transform(
    c: &Common,
    op: &str,
    direction: Option<&str>,
    alpha: Option<f64>,
    beta: Option<f64>,
    threads: Option<usize>,
) -> Result<Outcome> {
    let grid = GridConfig::with_seed(c.grid_seed);
    let dump = |g: &Evaluator| json!({ "grid": grid, "points": sample(g, g.endpoint(), &grid) });
    let body = match op {
        "pinv" => dump(&transforms::pinv_map(&load_repr(&c.input)?.evaluator())?),
        "neg_pinv" => {
            let d = direction.ok_or_else(|| Error::InvalidInput("neg_pinv needs --direction".into()))?;
            let dir = Direction::parse(d).ok_or_else(|| Error::InvalidInput(format!("unknown direction `{d}`")))?;
            let mut b = dump(&transforms::neg_pinv_map(&load_repr(&c.input)?.evaluator(), dir)?);
            b["direction"] = to_value(&dir);
            b
        }
        "dual" => {
            let repr = load_repr(&c.input)?;
            let (target, flag) = if repr.kind().is_t_side() { (alpha, "--alpha") } else { (beta, "--beta") };
            let target = target.ok_or_else(|| Error::InvalidInput(format!("dual of {} needs {flag}", repr.kind())))?;
            return Ok(Outcome::pass(json::repr_to_value(&transforms::dual_map(&repr, target)?)));
        }
        "transpose" => {
            return Ok(Outcome::pass(json::repr_to_value(&transforms::transpose_map(&load_repr(&c.input)?)?)))
        }
        "congruence" => {
            let text = read(&c.input)?;
            let file: CongruenceFile = serde_json::from_str(&text)
                .map_err(|e| at(&c.input, Error::InvalidInput(format!("malformed JSON: {e}"))))?;
            let terms = file
                .terms
                .iter()
                .enumerate()
                .map(|(k, t)| -> Result<(CMat, Repr)> {
                    let a = json::mat_from_json(&t.a)
                        .map_err(|e| at(&c.input, json::field(&format!("terms[{k}].A"), e)))?;
                    let r = t.repr.build().map_err(|e| at(&c.input, json::field(&format!("terms[{k}].repr"), e)))?;
                    Ok((a, r))
                })
                .collect::<Result<Vec<_>>>()?;
            let sum = transforms::congruence_sum(&terms)?;
            return Ok(Outcome::pass(json::repr_to_value(&Repr::Pair(sum))));
        }
        other => return Err(Error::InvalidInput(format!("unknown op `{other}`"))),
    };
    let mut head = header("transform", c, threads);
    head["op"] = json!(op);
    Ok(Outcome::pass(merge(head, body)))
}

/// Classes a representation belongs to by construction, and the class used for limits.
fn natural_classes(kind: ReprKind) -> (&'static [ClassKind], Option<ClaimedClass>) {
    match kind {
        ReprKind::StieltjesPair | ReprKind::KkPair => (&[ClassKind::S, ClassKind::SViaPair], Some(ClaimedClass::S)),
        ReprKind::S0 => (&[ClassKind::S0, ClassKind::S], Some(ClaimedClass::S0)),
        ReprKind::SinfTriple => (&[ClassKind::Sinf], Some(ClaimedClass::SinfProduct)),
        ReprKind::TPair => (&[ClassKind::T, ClassKind::TViaPair], Some(ClaimedClass::T)),
        ReprKind::T0 => (&[ClassKind::T0, ClassKind::T], Some(ClaimedClass::T0)),
        ReprKind::TinfTriple => (&[ClassKind::Tinf], None),
        ReprKind::Nevanlinna => (&[], None),
    }
}

fn or_error<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(x) => to_value(&x),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn report(c: &Common, m: usize, threads: Option<usize>) -> Result<Outcome> {
    let repr = load_repr(&c.input)?;
    let f = repr.evaluator();
    let endpoint = endpoint_of(&repr);
    let t_side = !f.excluded().is_right();
    let (classes, claimed) = natural_classes(repr.kind());
    let certs = classes.iter().map(|&k| certify(&f, endpoint, k, c)).collect::<Result<Vec<_>>>()?;
    let passed = certs.iter().all(Certificate::passed);
    let body = json!({
        "representation": repr.kind(),
        "endpoint": endpoint,
        "certificates": certs,
        "params": claimed.map(|k| or_error(limits::extract_params(&f, endpoint, k))),
        "kernel_range": or_error(classifier::kernel_range_report(&repr)),
        "rank": or_error(classifier::rank_constancy(&f, &classifier::structure_points(endpoint, t_side))),
        "monotonicity": classes.first().map(|&k| or_error(classifier::monotonicity_chain(&f, endpoint, k))),
        "moments": moments_body(repr.measure(), m),
        "passed": passed,
    });
    Ok(Outcome { report: merge(header("report", c, threads), body), code: if passed { EXIT_PASS } else { EXIT_FAIL } })
}

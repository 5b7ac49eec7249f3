//! Batch interface. Every subcommand is a thin layer over library calls, and
//! [`run`] is callable in-process so tests can compare CLI output against
//! direct library results.
//!
//! Exit codes: 0 when everything passes, 1 when a check suite fails, 2 on
//! input errors (unreadable or malformed files, bad arguments).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::charalg::{infinitesimal_basis, parse_degree_value, Functional};
use crate::ck::butcher::{order_of_tol, random_rational};
use crate::ck::{compose, gen_trees, ButcherTableau, CkHopf};
use crate::coeff::{Coeff, TruncPoly, DEFAULT_TOL};
use crate::evolution::{convergence_table, curve_cutoff, evolve, CurveSpec};
use crate::findim::norms::banach_samples;
use crate::findim::{
    banach_norm_check, exp_character_equivalence, gn_iterated_check, kappa_check, multifalt_check, random_functional,
    shipped, tensor_truncation, FiniteCoalgebra, TensorSquare,
};
use crate::hopf::{verify_axioms, Degree, HopfAlgebra, Truncation};
use crate::par::{self, Execution};
use crate::primitive::PrimitivePolynomial;

#[derive(Parser, Debug)]
#[command(name = "hopfchar", version, about = "Truncated character groups of graded Hopf algebras")]
pub struct Cli {
    /// Instance: `ck`, `findim:<file|shipped name>`, `poly:<degrees>`, or `tensor:<instance>`.
    #[arg(long, global = true)]
    pub instance: Option<String>,
    /// Degree cutoff (an integer or `p/q`).
    #[arg(long, global = true)]
    pub cutoff: Option<String>,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for float comparisons.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List rooted trees up to an order: id, order, γ, σ (tab-separated).
    Trees { max_order: Option<usize> },
    /// Run the axiom and identity suites on an instance; prints a JSON report.
    Check,
    /// Audit the order of a Runge–Kutta tableau; prints a JSON report.
    Order { tableau: PathBuf, max_order: Option<usize> },
    /// Character arithmetic on dump files.
    Char {
        #[arg(value_enum)]
        op: CharOp,
        #[arg(required = true)]
        dumps: Vec<PathBuf>,
    },
    /// Solve η' = η⋆γ for a curve file; dump on stdout, convergence table on stderr.
    Evolve {
        curve: PathBuf,
        /// Number of step doublings in the convergence table.
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharOp {
    Exp,
    Log,
    Inv,
    Conv,
    Bch,
    Compose,
}

impl CharOp {
    fn arity(self) -> usize {
        match self {
            CharOp::Exp | CharOp::Log | CharOp::Inv => 1,
            CharOp::Conv | CharOp::Bch | CharOp::Compose => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Command failures: bad input (exit 2).
#[derive(Debug)]
struct InputError(String);

fn input<E: std::fmt::Display>(e: E) -> InputError {
    InputError(e.to_string())
}

/// What a command produced before `--out` handling.
struct Produced {
    primary: String,
    diagnostics: String,
    pass: bool,
}

impl Produced {
    fn ok(primary: String) -> Self {
        Produced {
            primary,
            diagnostics: String::new(),
            pass: true,
        }
    }

    fn with_diagnostics(mut self, d: String) -> Self {
        self.diagnostics = d;
        self
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let shown = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: shown,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: shown,
                },
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let produced = match &cli.command {
        Command::Trees { max_order } => cmd_trees(cli, *max_order),
        Command::Check => cmd_check(cli),
        Command::Order { tableau, max_order } => cmd_order(cli, tableau, *max_order),
        Command::Char { op, dumps } => cmd_char(cli, *op, dumps),
        Command::Evolve { curve, levels } => cmd_evolve(cli, curve, *levels),
    };
    match produced {
        Err(InputError(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Ok(p) => {
            let code = if p.pass { 0 } else { 1 };
            match &cli.out {
                None => Outcome {
                    code,
                    stdout: p.primary,
                    stderr: p.diagnostics,
                },
                Some(path) => match std::fs::write(path, &p.primary) {
                    Ok(()) => Outcome {
                        code,
                        stdout: String::new(),
                        stderr: p.diagnostics,
                    },
                    Err(e) => Outcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    },
                },
            }
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_json(path: &Path) -> Result<Value, InputError> {
    let s = std::fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| InputError(format!("{} is not JSON: {e}", path.display())))
}

fn cutoff_arg(cli: &Cli) -> Result<Option<Degree>, InputError> {
    cli.cutoff
        .as_deref()
        .map(|s| {
            Degree::parse(s)
                .filter(|d| *d >= Degree::ZERO)
                .ok_or_else(|| InputError(format!("bad cutoff `{s}`")))
        })
        .transpose()
}

fn usize_cutoff(cli: &Cli, positional: Option<usize>, default: usize) -> Result<usize, InputError> {
    if let Some(n) = positional {
        return Ok(n);
    }
    match cutoff_arg(cli)? {
        None => Ok(default),
        Some(d) if d.0.is_integer() => Ok(d.0.to_integer() as usize),
        Some(d) => Err(InputError(format!("cutoff {d} must be an integer here"))),
    }
}

// ---------------------------------------------------------------- instances

enum Instance {
    Ck(Arc<CkHopf>),
    Findim(Arc<FiniteCoalgebra>),
    Poly(Arc<PrimitivePolynomial>),
    TensorCk(Arc<TensorSquare<CkHopf>>),
    TensorFindim(Arc<TensorSquare<FiniteCoalgebra>>),
    TensorPoly(Arc<TensorSquare<PrimitivePolynomial>>),
}

macro_rules! with_instance {
    ($inst:expr, $h:ident => $body:expr) => {
        match $inst {
            Instance::Ck($h) => $body,
            Instance::Findim($h) => $body,
            Instance::Poly($h) => $body,
            Instance::TensorCk($h) => $body,
            Instance::TensorFindim($h) => $body,
            Instance::TensorPoly($h) => $body,
        }
    };
}

fn load_findim(spec: &str) -> Result<Arc<FiniteCoalgebra>, InputError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(c) = shipped::all().into_iter().find(|c| c.name() == format!("findim:{spec}")) {
            return Ok(c);
        }
    }
    FiniteCoalgebra::load(path).map(Arc::new).map_err(input)
}

fn parse_instance(sel: &str) -> Result<Instance, InputError> {
    if sel == "ck" {
        return Ok(Instance::Ck(CkHopf::new()));
    }
    if let Some(rest) = sel.strip_prefix("findim:") {
        return load_findim(rest).map(Instance::Findim);
    }
    if let Some(rest) = sel.strip_prefix("poly:") {
        return PrimitivePolynomial::parse(rest)
            .map(Instance::Poly)
            .ok_or_else(|| InputError(format!("bad generator degrees `{rest}`")));
    }
    if let Some(rest) = sel.strip_prefix("tensor:") {
        return match parse_instance(rest)? {
            Instance::Ck(h) => Ok(Instance::TensorCk(TensorSquare::new(h))),
            Instance::Findim(h) => Ok(Instance::TensorFindim(TensorSquare::new(h))),
            Instance::Poly(h) => Ok(Instance::TensorPoly(TensorSquare::new(h))),
            _ => Err(InputError("nested tensor squares are not supported".into())),
        };
    }
    Err(InputError(format!("unknown instance `{sel}`")))
}

fn instance_of(cli: &Cli, fallback: Option<&str>) -> Result<Instance, InputError> {
    parse_instance(cli.instance.as_deref().or(fallback).unwrap_or("ck"))
}

fn truncate<H: HopfAlgebra>(h: Arc<H>, cutoff: Degree) -> Result<Arc<Truncation<H>>, InputError> {
    Truncation::new(h, cutoff).map_err(input)
}

// ---------------------------------------------------------------- trees

fn cmd_trees(cli: &Cli, max_order: Option<usize>) -> Result<Produced, InputError> {
    let n = usize_cutoff(cli, max_order, 4)?;
    let mut out = String::new();
    for t in gen_trees(n) {
        out.push_str(&format!("{t}\t{}\t{}\t{}\n", t.order(), t.factorial(), t.symmetry()));
    }
    Ok(Produced::ok(out))
}

// ---------------------------------------------------------------- check

const MULTIFALT_SAMPLES: usize = 10;
const EQUIVALENCE_SAMPLES: usize = 20;
const BANACH_SAMPLES: usize = 1000;
const GN_SAMPLES: usize = 200;
const GN_MAX_N: usize = 5;
const KAPPA_SAMPLES: usize = 20;

#[derive(Debug, Clone, Serialize)]
struct EquivalenceSummary {
    samples: usize,
    connected: bool,
    p1_true: usize,
    /// Samples violating `P2 ⇔ P3` or `P1 ⇒ P3`.
    pattern_failures: usize,
    /// Samples violating `P1 ⇔ P3` (only counted on connected instances).
    equivalence_failures: usize,
}

/// Equivalence samples: half random infinitesimal characters (from the exact
/// nullspace), half random functionals vanishing in degree 0.
fn equivalence_suite<H: HopfAlgebra>(
    trunc: &Arc<Truncation<H>>,
    tt: &Arc<Truncation<TensorSquare<H>>>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<EquivalenceSummary, InputError> {
    let basis = infinitesimal_basis(trunc).map_err(input)?;
    let connected = trunc.hopf().is_connected();
    let mut summary = EquivalenceSummary {
        samples,
        connected,
        p1_true: 0,
        pattern_failures: 0,
        equivalence_failures: 0,
    };
    let reports = par::map_range(samples, Execution::default(), |s| {
        let mut rng = par::sample_rng(seed, s as u64);
        let phi = if s % 2 == 0 {
            basis.iter().fold(Functional::zero(trunc), |acc, b| {
                acc.add(&b.scale_rational(&random_rational(&mut rng, 3, 5))).expect("same truncation")
            })
        } else {
            random_functional(&mut rng, trunc, true)
        };
        exp_character_equivalence(&phi, tt, tol)
    });
    for r in reports {
        let r = r.map_err(input)?;
        summary.p1_true += usize::from(r.p1);
        summary.pattern_failures += usize::from(!r.pattern_holds());
        if connected {
            summary.equivalence_failures += usize::from(!r.full_equivalence());
        }
    }
    Ok(summary)
}

/// Axioms, the tensor-square identities and the exp/character equivalence.
fn check_generic<H: HopfAlgebra>(h: Arc<H>, cutoff: Degree, cli: &Cli, sections: &mut serde_json::Map<String, Value>) -> Result<bool, InputError> {
    let axioms = verify_axioms(&h, cutoff);
    let mut pass = axioms.all_pass();
    sections.insert("axioms".into(), json!(axioms));
    if !h.has_product() || h.name().starts_with("tensor:") {
        return Ok(pass);
    }
    // beyond a top degree products are undefined, so identities stop there
    let id_cutoff = h.top_degree().map_or(cutoff, |t| t.min(cutoff));
    let trunc = truncate(h.clone(), id_cutoff)?;
    let tt = tensor_truncation(&trunc).map_err(input)?;
    let quads: Vec<[Functional<H, BigRational>; 4]> = (0..MULTIFALT_SAMPLES)
        .map(|s| {
            let mut rng = par::sample_rng(cli.seed, s as u64);
            std::array::from_fn(|_| random_functional(&mut rng, &trunc, false))
        })
        .collect();
    let mf = multifalt_check(&tt, &quads, cli.tol).map_err(input)?;
    pass &= mf.pass();
    sections.insert("multifalt".into(), json!(mf));
    if h.is_connected() {
        let eq = equivalence_suite(&trunc, &tt, EQUIVALENCE_SAMPLES, cli.seed, cli.tol)?;
        pass &= eq.pattern_failures == 0 && eq.equivalence_failures == 0;
        sections.insert("exp_equivalence".into(), json!(eq));
    }
    Ok(pass)
}

fn check_findim(c: &FiniteCoalgebra, cli: &Cli, sections: &mut serde_json::Map<String, Value>) -> Result<bool, InputError> {
    let pairs = banach_samples(c, BANACH_SAMPLES, cli.seed);
    let banach = banach_norm_check(c, &pairs, Execution::default()).map_err(input)?;
    let gn = gn_iterated_check(c, GN_MAX_N, GN_SAMPLES, cli.seed, Execution::default());
    let kappa = kappa_check::<TruncPoly<2>>(c, KAPPA_SAMPLES, cli.seed);
    let pass = banach.pass() && gn.pass() && kappa.pass();
    sections.insert("banach".into(), json!(banach));
    sections.insert("gn".into(), json!(gn));
    sections.insert("kappa".into(), json!(kappa));
    Ok(pass)
}

fn cmd_check(cli: &Cli) -> Result<Produced, InputError> {
    let inst = instance_of(cli, None)?;
    let cutoff = cutoff_arg(cli)?.unwrap_or(Degree::int(4));
    let mut sections = serde_json::Map::new();
    let mut pass = true;
    if let Instance::Findim(c) = &inst {
        pass &= check_findim(c, cli, &mut sections)?;
    }
    let name = with_instance!(&inst, h => h.name());
    pass &= with_instance!(inst, h => check_generic(h, cutoff, cli, &mut sections))?;
    let mut report = serde_json::Map::new();
    report.insert("instance".into(), json!(name));
    report.insert("cutoff".into(), json!(cutoff));
    report.insert("seed".into(), json!(cli.seed));
    report.extend(sections);
    report.insert("pass".into(), json!(pass));
    Ok(Produced {
        primary: pretty(&Value::Object(report)),
        diagnostics: String::new(),
        pass,
    })
}

// ---------------------------------------------------------------- order

/// True when every number in the JSON tree is an integer (so values can be read exactly).
fn exact_numbers(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(a) => a.iter().all(exact_numbers),
        Value::Object(o) => o.values().all(exact_numbers),
        _ => true,
    }
}

fn cmd_order(cli: &Cli, path: &Path, max_order: Option<usize>) -> Result<Produced, InputError> {
    let n = usize_cutoff(cli, max_order, 5)?;
    let v = read_json(path)?;
    let report = if exact_numbers(&v) {
        let t = ButcherTableau::<BigRational>::from_json(&v).map_err(input)?;
        order_of_tol(&t, n, cli.tol)
    } else {
        let t = ButcherTableau::<f64>::from_json(&v).map_err(input)?;
        order_of_tol(&t, n, cli.tol)
    };
    Ok(Produced::ok(pretty(&report)))
}

// ---------------------------------------------------------------- char

/// A binary operation on functionals, used to inject instance-specific products.
type BinaryOp<'a, H, S> =
    &'a dyn Fn(&Functional<H, S>, &Functional<H, S>) -> Result<Functional<H, S>, crate::charalg::CharError>;

fn apply_op<H: HopfAlgebra, S: Coeff>(
    op: CharOp,
    args: &[Functional<H, S>],
    compose_fn: Option<BinaryOp<'_, H, S>>,
) -> Result<Functional<H, S>, InputError> {
    let r = match op {
        CharOp::Exp => args[0].exp_star(),
        CharOp::Log => args[0].log_star(),
        CharOp::Inv => {
            if args[0].is_character() {
                args[0].char_inverse()
            } else {
                args[0].unit_inverse()
            }
        }
        CharOp::Conv => args[0].convolve(&args[1]),
        CharOp::Bch => args[0].bch(&args[1]),
        CharOp::Compose => match compose_fn {
            Some(f) => f(&args[0], &args[1]),
            None => return Err(InputError("compose is defined for the ck instance only".into())),
        },
    };
    r.map_err(input)
}

fn char_generic<H: HopfAlgebra>(
    h: Arc<H>,
    op: CharOp,
    dumps: &[Value],
    ck_compose: bool,
) -> Result<String, InputError> {
    let cutoffs: Vec<Degree> = dumps
        .iter()
        .map(|d| d.get("cutoff").and_then(parse_degree_value).ok_or_else(|| InputError("dump without cutoff".into())))
        .collect::<Result<_, _>>()?;
    if cutoffs.windows(2).any(|w| w[0] != w[1]) {
        return Err(InputError("dumps have different cutoffs".into()));
    }
    let trunc = truncate(h, cutoffs[0])?;
    if dumps.iter().all(exact_numbers) {
        let args: Vec<Functional<H, BigRational>> = dumps
            .iter()
            .map(|d| Functional::from_dump(&trunc, d).map_err(input))
            .collect::<Result<_, _>>()?;
        let f = |a: &Functional<H, BigRational>, b: &Functional<H, BigRational>| {
            if !a.is_character() || !b.is_character() {
                return Err(crate::charalg::CharError::NotCharacter);
            }
            a.convolve(b)
        };
        Ok(pretty(&apply_op(op, &args, ck_compose.then_some(&f as _))?.to_dump()))
    } else {
        let args: Vec<Functional<H, f64>> = dumps
            .iter()
            .map(|d| Functional::from_dump(&trunc, d).map_err(input))
            .collect::<Result<_, _>>()?;
        let f = |a: &Functional<H, f64>, b: &Functional<H, f64>| {
            if !a.is_character() || !b.is_character() {
                return Err(crate::charalg::CharError::NotCharacter);
            }
            a.convolve(b)
        };
        Ok(pretty(&apply_op(op, &args, ck_compose.then_some(&f as _))?.to_dump()))
    }
}

fn cmd_char(cli: &Cli, op: CharOp, paths: &[PathBuf]) -> Result<Produced, InputError> {
    if paths.len() != op.arity() {
        return Err(InputError(format!("`{op:?}` takes {} dump(s), got {}", op.arity(), paths.len())));
    }
    let dumps: Vec<Value> = paths.iter().map(|p| read_json(p)).collect::<Result<_, _>>()?;
    let named = dumps[0].get("instance").and_then(Value::as_str);
    let inst = instance_of(cli, named)?;
    let out = match inst {
        // the B-series composition is the Butcher-group product
        Instance::Ck(h) => char_generic(h, op, &dumps, true)?,
        other => with_instance!(other, h => char_generic(h, op, &dumps, false))?,
    };
    Ok(Produced::ok(out))
}

/// Library-level B-series composition, re-exported for equivalence tests.
pub fn compose_dumps(a: &Value, b: &Value) -> Result<Value, String> {
    let cutoff = a.get("cutoff").and_then(parse_degree_value).ok_or("dump without cutoff")?;
    let trunc = Truncation::new(CkHopf::new(), cutoff).map_err(|e| e.to_string())?;
    let x = Functional::<CkHopf, BigRational>::from_dump(&trunc, a).map_err(|e| e.to_string())?;
    let y = Functional::<CkHopf, BigRational>::from_dump(&trunc, b).map_err(|e| e.to_string())?;
    compose(&x, &y).map(|f| f.to_dump()).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- evolve

/// Errors below this are round-off; slopes between them carry no information.
const ROUNDOFF_FLOOR: f64 = 1e-13;

fn format_table(t: &crate::evolution::ConvergenceTable) -> String {
    let mut s = format!("# convergence ({} reference)\nsteps\terror\tslope\n", t.reference);
    let mut prev: Option<f64> = None;
    for r in &t.rows {
        let meaningful = prev.is_some_and(|p| p > ROUNDOFF_FLOOR) && r.error > ROUNDOFF_FLOOR;
        let slope = r
            .slope
            .filter(|x| meaningful && x.is_finite())
            .map_or("-".to_string(), |x| format!("{x:.4}"));
        s.push_str(&format!("{}\t{:.6e}\t{}\n", r.steps, r.error, slope));
        prev = Some(r.error);
    }
    s
}

/// The output is η(t1) as a dump. Curves are validated exactly as
/// infinitesimal, so the only departure from the character group is the
/// integrator's own O(h⁴) error; the defect is reported, not judged.
fn evolve_generic<H: HopfAlgebra>(h: Arc<H>, v: &Value, levels: usize) -> Result<Produced, InputError> {
    let trunc = truncate(h, curve_cutoff(v).map_err(input)?)?;
    let curve = CurveSpec::from_json(&trunc, v).map_err(input)?;
    let t1 = crate::coeff::rational_to_f64(&curve.t1);
    let eta = evolve(&curve, t1, curve.steps).map_err(input)?;
    let mut diagnostics = String::new();
    if levels >= 2 {
        let table = convergence_table(&curve, &curve.t1, curve.steps, levels).map_err(input)?;
        diagnostics.push_str(&format_table(&table));
    }
    if trunc.products().is_ok() {
        let defect = eta.character_defect().map_err(input)?;
        diagnostics.push_str(&format!("# character defect at {} steps: {defect:.3e}\n", curve.steps));
    }
    Ok(Produced::ok(pretty(&eta.to_dump())).with_diagnostics(diagnostics))
}

fn cmd_evolve(cli: &Cli, path: &Path, levels: usize) -> Result<Produced, InputError> {
    let v = read_json(path)?;
    let inst = instance_of(cli, None)?;
    with_instance!(inst, h => evolve_generic(h, &v, levels))
}

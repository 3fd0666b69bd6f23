//! `qvar`: certified lower bounds for smooth functionals of a quantum
//! particle's second moments, with brute-force oracles, a functional
//! catalog, surface meshes, and squeeze-parameter conversion.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qvar_core::catalog;
use qvar_core::certify::{certify, CertifyConfig, Verdict};
use qvar_core::expr::Functional;
use qvar_core::geometry::SheetIndex;
use qvar_core::mesh::{self, MeshKind};
use qvar_core::oracle::{fock_minimize, parametric_search, Argmin};
use qvar_core::report::{
    render_report, CatalogSection, FockRecord, Json, OracleSection, ParametricRecord,
};
use qvar_core::symplectic::{bch_convert, bogoliubov_lhs, bogoliubov_rhs, SqueezeParams};
use qvar_core::tol;

#[derive(Parser)]
#[command(
    name = "qvar",
    version,
    about = "Decide whether a functional of quantum second moments is bounded below, \
             compute the sharp bound and its minimizing squeezed state, and cross-check \
             the result by brute force"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify a functional and print a JSON report
    Certify(CertifyArgs),
    /// Built-in functional families
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Brute-force minimization oracles
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Emit CSV meshes of the moment-space surfaces
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Convert shear-scale squeeze parameters (b, gamma) to complex form
    Bch(BchArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Expression in x (momentum variance), y (position variance),
    /// w (covariance); z abbreviates x + y + 2w
    #[arg(long)]
    expr: String,
    /// Parameter binding NAME=VALUE (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Planck constant (defaults to the QVAR_HBAR environment variable, then 1)
    #[arg(long)]
    hbar: Option<f64>,
    /// Highest excitation sheet to sweep
    #[arg(long, default_value_t = 5)]
    nmax: u32,
    /// Also write the JSON report to this file
    #[arg(long)]
    json: Option<PathBuf>,
    /// Skip the brute-force oracle cross-checks
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List the built-in functionals
    List,
    /// Certify one entry and compare with its expected outcome
    Run(CatalogRunArgs),
}

#[derive(Args)]
struct CatalogRunArgs {
    /// Entry name (see `catalog list`)
    name: String,
    /// Parameter override NAME=VALUE (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Planck constant (defaults to the QVAR_HBAR environment variable, then 1)
    #[arg(long)]
    hbar: Option<f64>,
    /// Highest excitation sheet to sweep
    #[arg(long, default_value_t = 5)]
    nmax: u32,
    /// Also write the JSON report to this file
    #[arg(long)]
    json: Option<PathBuf>,
    /// Skip the brute-force oracle cross-checks
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Projected gradient descent over truncated number-basis states
    Fock(FockArgs),
    /// Direct search over squeezed states of one sheet
    Sheet(SheetArgs),
}

#[derive(Args)]
struct FockArgs {
    #[arg(long)]
    expr: String,
    /// Truncation dimension of the number basis
    #[arg(long, default_value_t = 30)]
    dim: usize,
    /// Number of random restarts
    #[arg(long, default_value_t = 20)]
    restarts: u32,
    /// Seed for the restart generator
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Args)]
struct SheetArgs {
    #[arg(long)]
    expr: String,
    /// Sheet index (excitation number)
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Squeezed-state hyperboloid sheets in (u, v, w)
    Hyperboloid(HyperboloidArgs),
    /// Zero-covariance hyperbolas in (u, v)
    Heisenberg(MeshOutArgs),
    /// The line of symmetric three-variance minimizers
    TripleLine(MeshOutArgs),
}

#[derive(Args)]
struct HyperboloidArgs {
    /// Highest sheet index
    #[arg(long, default_value_t = 2)]
    nmax: u32,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Args)]
struct MeshOutArgs {
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Args)]
struct BchArgs {
    /// Shear parameter
    #[arg(long)]
    b: f64,
    /// Log-scale parameter
    #[arg(long)]
    gamma: f64,
}

/// Bad input (exit 2) versus a failure while computing (exit 1).
enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure::Runtime(msg.into())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.cmd {
        Cmd::Certify(args) => run_certify(args),
        Cmd::Catalog(CatalogCmd::List) => run_catalog_list(),
        Cmd::Catalog(CatalogCmd::Run(args)) => run_catalog_run(args),
        Cmd::Oracle(OracleCmd::Fock(args)) => run_oracle_fock(args),
        Cmd::Oracle(OracleCmd::Sheet(args)) => run_oracle_sheet(args),
        Cmd::Mesh(cmd) => run_mesh(cmd),
        Cmd::Bch(args) => run_bch(args),
    }
}

/// hbar precedence: --hbar flag, then QVAR_HBAR, then 1.
fn resolve_hbar(flag: Option<f64>) -> Result<f64, Failure> {
    let h = match flag {
        Some(h) => h,
        None => match std::env::var("QVAR_HBAR") {
            Ok(text) => text
                .trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("QVAR_HBAR is not a number: {text:?}")))?,
            Err(_) => 1.0,
        },
    };
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(usage(format!("hbar must be positive and finite, got {h}")))
    }
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("parameter {pair:?} is not of the form NAME=VALUE")))?;
        let value = v
            .trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("parameter {pair:?} has a non-numeric value")))?;
        map.insert(k.trim().to_string(), value);
    }
    Ok(map)
}

fn parse_functional(
    expr: &str,
    param_args: &[String],
    hbar: f64,
) -> Result<(Functional, BTreeMap<String, f64>), Failure> {
    let mut params = parse_params(param_args)?;
    params.insert("hbar".to_string(), hbar);
    let f = Functional::parse(expr, &params).map_err(|e| usage(e.to_string()))?;
    Ok((f, params))
}

fn run_oracles(f: &Functional, hbar: f64) -> OracleSection {
    let fock = fock_minimize(f, 30, 20, 42, hbar);
    let sheet = parametric_search(f, SheetIndex(0), hbar);
    let fock_record = match fock.argmin {
        Argmin::Fock { dim, leading_index, leading_weight } => FockRecord {
            value: fock.value,
            dim,
            restarts: 20,
            seed: 42,
            leading_index,
            leading_weight,
            converged: fock.converged,
        },
        _ => unreachable!("fock_minimize reports a fock argmin"),
    };
    let sheet_record = match sheet.argmin {
        Argmin::Squeeze { sheet: n, b, gamma } => ParametricRecord {
            value: sheet.value,
            sheet: n,
            b,
            gamma,
            converged: sheet.converged,
        },
        _ => unreachable!("parametric_search reports a squeeze argmin"),
    };
    OracleSection { parametric: Some(sheet_record), fock: Some(fock_record) }
}

/// When a certified bound exists, a strictly lower oracle value signals a
/// numeric failure; returns notes to append and whether soundness broke.
fn soundness_notes(
    verdict: Verdict,
    bound: Option<f64>,
    oracle: &OracleSection,
) -> (Vec<String>, bool) {
    let mut notes = Vec::new();
    let mut broken = false;
    if verdict != Verdict::Bounded {
        return (notes, broken);
    }
    let Some(b) = bound else {
        return (notes, broken);
    };
    if let Some(fock) = &oracle.fock {
        if fock.value < b - tol::ORACLE_FOCK_LOW * (1.0 + b.abs()) {
            broken = true;
            notes.push(format!(
                "state-space oracle found {:.6e}, below the certified bound {b:.6e}",
                fock.value
            ));
        }
    }
    if let Some(p) = &oracle.parametric {
        if p.value < b - tol::ORACLE_PARAM_LOW * (1.0 + b.abs()) {
            broken = true;
            notes.push(format!(
                "squeezed-state search found {:.6e}, below the certified bound {b:.6e}",
                p.value
            ));
        }
    }
    (notes, broken)
}

fn emit(text: &str, json_path: &Option<PathBuf>) -> Result<(), Failure> {
    println!("{text}");
    if let Some(path) = json_path {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_certify(args: CertifyArgs) -> Result<ExitCode, Failure> {
    let hbar = resolve_hbar(args.hbar)?;
    let (f, _) = parse_functional(&args.expr, &args.params, hbar)?;
    let cfg = CertifyConfig { hbar, max_sheet: args.nmax, ..Default::default() };
    let mut report = certify(&f, &cfg);
    let oracle = if args.no_oracle { None } else { Some(run_oracles(&f, hbar)) };
    let mut failed = report.verdict == Verdict::Inconclusive;
    if let Some(o) = &oracle {
        let (notes, broken) = soundness_notes(report.verdict, report.bound, o);
        report.notes.extend(notes);
        failed = failed || broken;
    }
    let text = render_report(&report, &cfg, oracle.as_ref(), None);
    emit(&text, &args.json)?;
    Ok(ExitCode::from(if failed { 1 } else { 0 }))
}

fn run_catalog_list() -> Result<ExitCode, Failure> {
    for name in catalog::NAMES {
        let desc = catalog::describe(name).unwrap_or_default();
        let defaults = catalog::default_params(name).map_err(|e| usage(e.to_string()))?;
        let shown: Vec<String> =
            defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if shown.is_empty() {
            println!("{name:<15} {desc}");
        } else {
            println!("{name:<15} {desc} [defaults: {}]", shown.join(", "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_catalog_run(args: CatalogRunArgs) -> Result<ExitCode, Failure> {
    let hbar = resolve_hbar(args.hbar)?;
    let overrides = parse_params(&args.params)?;
    let cfg = CertifyConfig { hbar, max_sheet: args.nmax, ..Default::default() };
    let run = catalog::run(&args.name, &overrides, &cfg).map_err(|e| usage(e.to_string()))?;

    let oracle = if args.no_oracle {
        None
    } else {
        let f = Functional::parse(&run.source, &run.params).map_err(|e| usage(e.to_string()))?;
        Some(run_oracles(&f, hbar))
    };
    let mut report = run.report.clone();
    let mut failed = !run.matched;
    if let Some(o) = &oracle {
        let (notes, broken) = soundness_notes(report.verdict, report.bound, o);
        report.notes.extend(notes);
        failed = failed || broken;
    }
    let (expectation_bound, expectation_verdicts) = match &run.expectation {
        catalog::Expectation::Bound(v) => (Some(*v), Vec::new()),
        catalog::Expectation::Verdicts(vs) => {
            (None, vs.iter().map(|v| v.to_string()).collect())
        }
    };
    let section = CatalogSection {
        entry: run.name.clone(),
        expectation_bound,
        expectation_verdicts,
        matched: run.matched,
        detail: run.detail.clone(),
    };
    let text = render_report(&report, &cfg, oracle.as_ref(), Some(&section));
    emit(&text, &args.json)?;
    Ok(ExitCode::from(if failed { 1 } else { 0 }))
}

fn run_oracle_fock(args: FockArgs) -> Result<ExitCode, Failure> {
    let hbar = resolve_hbar(args.hbar)?;
    if args.dim < 2 {
        return Err(usage("--dim must be at least 2"));
    }
    let (f, _) = parse_functional(&args.expr, &args.params, hbar)?;
    let r = fock_minimize(&f, args.dim, args.restarts as usize, args.seed, hbar);
    let mut j = Json::new();
    j.open_object(None);
    j.string(Some("functional"), f.source());
    j.number(Some("hbar"), hbar);
    j.integer(Some("dim"), args.dim as i64);
    j.integer(Some("restarts"), args.restarts as i64);
    j.unsigned(Some("seed"), args.seed);
    j.number(Some("value"), r.value);
    j.open_object(Some("moments"));
    j.number(Some("x"), r.moments.x);
    j.number(Some("y"), r.moments.y);
    j.number(Some("w"), r.moments.w);
    j.close_object();
    if let Argmin::Fock { leading_index, leading_weight, .. } = r.argmin {
        j.integer(Some("leading_index"), leading_index as i64);
        j.number(Some("leading_weight"), leading_weight);
    }
    j.boolean(Some("converged"), r.converged);
    j.close_object();
    println!("{}", j.finish());
    Ok(ExitCode::from(if r.converged { 0 } else { 1 }))
}

fn run_oracle_sheet(args: SheetArgs) -> Result<ExitCode, Failure> {
    let hbar = resolve_hbar(args.hbar)?;
    let (f, _) = parse_functional(&args.expr, &args.params, hbar)?;
    let r = parametric_search(&f, SheetIndex(args.n), hbar);
    let mut j = Json::new();
    j.open_object(None);
    j.string(Some("functional"), f.source());
    j.number(Some("hbar"), hbar);
    j.integer(Some("n"), args.n as i64);
    j.number(Some("value"), r.value);
    if let Argmin::Squeeze { b, gamma, .. } = r.argmin {
        j.number(Some("b"), b);
        j.number(Some("gamma"), gamma);
    }
    j.open_object(Some("moments"));
    j.number(Some("x"), r.moments.x);
    j.number(Some("y"), r.moments.y);
    j.number(Some("w"), r.moments.w);
    j.close_object();
    j.boolean(Some("converged"), r.converged);
    j.close_object();
    println!("{}", j.finish());
    Ok(ExitCode::from(if r.converged { 0 } else { 1 }))
}

fn run_mesh(cmd: MeshCmd) -> Result<ExitCode, Failure> {
    let (kind, out, hbar_flag) = match cmd {
        MeshCmd::Hyperboloid(a) => (MeshKind::Hyperboloid { nmax: a.nmax }, a.out, a.hbar),
        MeshCmd::Heisenberg(a) => (MeshKind::Heisenberg, a.out, a.hbar),
        MeshCmd::TripleLine(a) => (MeshKind::TripleLine, a.out, a.hbar),
    };
    let hbar = resolve_hbar(hbar_flag)?;
    mesh::write_csv(kind, hbar, &out)
        .map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;
    let rows = mesh::emit_csv(kind, hbar).lines().count() - 1;
    println!("wrote {rows} rows to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_bch(args: BchArgs) -> Result<ExitCode, Failure> {
    if !(args.b.is_finite() && args.gamma.is_finite()) {
        return Err(usage("b and gamma must be finite"));
    }
    let s = SqueezeParams { b: args.b, gamma: args.gamma };
    let c = bch_convert(&s);
    let (l1, l2) = bogoliubov_lhs(&s);
    let (r1, r2) = bogoliubov_rhs(&c);
    let residual = (l1 - r1).norm().max((l2 - r2).norm());
    let mut j = Json::new();
    j.open_object(None);
    j.number(Some("b"), s.b);
    j.number(Some("gamma"), s.gamma);
    j.number(Some("r"), c.r);
    j.number(Some("theta"), c.theta);
    j.number(Some("chi"), c.chi);
    j.number(Some("residual"), residual);
    j.close_object();
    println!("{}", j.finish());
    Ok(ExitCode::SUCCESS)
}

//! Command-line front end. Library errors from loading input map to exit 2,
//! failed properties to exit 1. Reports go to `--output` as JSON; a text
//! summary always goes to stdout.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{solver, symbols};
use crate::field::connection::{chern_pair, eh_residual, lambda_from_chern, mean_curvature_k, trace_curvature};
use crate::field::{EndField, GenConnection};
use crate::fixtures;
use crate::input::{connection_dump, InputSpec, Overrides, Setup};
use crate::multivector::GenVector;
use crate::report::{check_error, Check, Report};
use crate::structures::{standard_gk_pair, standard_omega, symplectic_spinor};
use crate::verify::{self, VerifyOptions, IDENTITY_TOL};
use crate::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "genkf", version, about = "Generalized-geometry identities and Einstein-Hermitian solves on flat tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite at the configured n, rank and grid.
    Verify(Common),
    /// Curvature, mean curvature and Chern data of the input connection.
    Curvature(Common),
    /// Solve the Einstein-Hermitian equation for a line bundle.
    Solve(SolveArgs),
    /// Exactness of the symbol sequence at random or given covectors.
    Symbols(SymbolsArgs),
    /// Print a saved JSON report; exit status reflects its checks.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON geometry/bundle document; the default is n = 1, 32^2, rank 1.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Points per axis, overriding the document.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Bundle rank, overriding the document.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Einstein constant; taken from the Chern pairing when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SymbolsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated covector components; replaces the random trials.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Report to print.
    #[arg(long)]
    pub input: PathBuf,
}

/// Outcome of a command before it is turned into output and an exit code.
struct Outcome {
    report: Report,
    text: String,
}

/// Failure that ends a command early.
enum Abort {
    Input(String),
    Fail(String),
}

impl From<Error> for Abort {
    fn from(e: Error) -> Self {
        Abort::Input(e.to_string())
    }
}

/// Parse arguments given without the program name.
pub fn parse_args<S: AsRef<str>>(args: &[S]) -> Result<Cli, String> {
    Cli::try_parse_from(std::iter::once("genkf").chain(args.iter().map(AsRef::as_ref))).map_err(|e| e.to_string())
}

/// Worker count from `GENKF_THREADS`; `None` leaves rayon's default.
pub fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var("GENKF_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("GENKF_THREADS must be a positive integer, got {s:?}")),
            Ok(k) => Ok(Some(k)),
        },
    }
}

fn load(common: &Common) -> Result<Setup, Abort> {
    let spec = match &common.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Abort::Input(format!("cannot read {}: {e}", path.display())))?;
            InputSpec::from_json(&text)?
        }
        None => InputSpec::default_config(),
    };
    Ok(spec.build(&Overrides { grid: common.grid, rank: common.rank })?)
}

fn config_json(setup: &Setup, common: &Common) -> Value {
    json!({
        "n": setup.grid.dim_n(),
        "grid": setup.grid.sizes(),
        "periods": setup.grid.periods(),
        "rank": setup.rank,
        "b": setup.b_const,
        "omega": setup.omega_const,
        "given_connection": setup.connection.is_some(),
        "tol": common.tol,
        "max_iter": common.max_iter,
        "trials": common.trials,
    })
}

fn cmd_verify(c: &Common) -> Result<Outcome, Abort> {
    let setup = load(c)?;
    let opts = VerifyOptions { seed: c.seed, trials: c.trials, tol: c.tol, max_iter: c.max_iter };
    let checks = verify::run_verify(&setup, &opts);
    let report = Report::new("verify", c.seed, config_json(&setup, c), checks, Value::Null);
    let text = report.to_text();
    Ok(Outcome { report, text })
}

fn connection_or_fixture(setup: &Setup, seed: u64, rank: usize, amp_v: f64) -> Result<GenConnection, Abort> {
    match &setup.connection {
        Some(conn) => Ok(conn.clone()),
        None => Ok(fixtures::connection(&mut fixtures::rng(seed), &setup.grid, rank, 0.3, amp_v)?),
    }
}

fn cmd_curvature(c: &Common) -> Result<Outcome, Abort> {
    let setup = load(c)?;
    let conn = connection_or_fixture(&setup, c.seed, setup.rank, 0.3)?;
    let psi = &setup.psi;
    let lambda = lambda_from_chern(&conn, psi)?;
    let (_, residual) = eh_residual(&conn, psi, lambda)?;
    let k = mean_curvature_k(&conn, psi)?;
    let pair = chern_pair(&conn, psi)?;
    let u = fixtures::unitary(&mut fixtures::rng(c.seed.wrapping_add(1)), conn.rank());
    let checks = vec![
        check_error("trace curvature closed", "d tr F(psi) = 0", IDENTITY_TOL, || {
            Ok(trace_curvature(&conn, psi)?.d().max_abs())
        }),
        check_error("Chern pairing V-independence", "<tr F(psi), conj psi> independent of V", IDENTITY_TOL, || {
            let zero = vec![EndField::zeros(&setup.grid, conn.rank()); setup.grid.dim()];
            Ok((chern_pair(&conn.with_v(zero)?, psi)? - pair).norm())
        }),
        check_error("Chern pairing gauge independence", "<tr F(psi), conj psi> gauge invariant", IDENTITY_TOL, || {
            Ok((chern_pair(&conn.gauge_constant(&u)?, psi)? - pair).norm())
        }),
    ];
    let data = json!({
        "lambda": lambda,
        "eh_residual": residual,
        "chern_pair": [pair.re, pair.im],
        "mean_curvature_max": k.max_abs(),
    });
    let report = Report::new("curvature", c.seed, config_json(&setup, c), checks, data);
    let text = format!(
        "{}lambda = {lambda:.12e}\nEinstein-Hermitian residual = {residual:.3e}\n",
        report.to_text()
    );
    Ok(Outcome { report, text })
}

fn cmd_solve(a: &SolveArgs) -> Result<Outcome, Abort> {
    let c = &a.common;
    let setup = load(c)?;
    if setup.rank != 1 {
        return Err(Error::NonAbelian(setup.rank).into());
    }
    let init = connection_or_fixture(&setup, c.seed, 1, 0.3)?;
    let opts = solver::SolveOptions { max_iter: c.max_iter, tol: c.tol, lambda: a.lambda, ..Default::default() };
    let (sol, trace) = match solver::solve_eh_line(&init, &setup.psi, &opts) {
        Ok(x) => x,
        Err(e @ Error::StepCollapse(_)) => return Err(Abort::Fail(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let checks = vec![Check::max_error(
        "Einstein-Hermitian residual",
        "K_A(psi) = lambda id",
        c.tol,
        if trace.converged { trace.final_residual } else { f64::INFINITY },
    )
    .with_note(format!("{} iterations, final residual {:.3e}", trace.iterations, trace.final_residual))];
    let solution = json!({
        "n": setup.grid.dim_n(),
        "grid": { "sizes": setup.grid.sizes(), "periods": setup.grid.periods() },
        "psi": { "b": setup.b_const.as_ref().map(|m| square(m)), "omega": setup.omega_const.as_ref().map(|m| square(m)) },
        "bundle": { "rank": 1 },
        "connection": connection_dump(&sol),
    });
    let text = format!(
        "{}lambda = {:.12e}\nfinal residual = {:.3e}\niterations = {}\n",
        Report::new("solve", c.seed, Value::Null, checks.clone(), Value::Null).to_text(),
        trace.lambda,
        trace.final_residual,
        trace.iterations
    );
    let data = json!({ "trace": trace, "solution": solution });
    let report = Report::new("solve", c.seed, config_json(&setup, c), checks, data);
    Ok(Outcome { report, text })
}

fn square(m: &[f64]) -> Vec<Vec<f64>> {
    let d = (m.len() as f64).sqrt().round() as usize;
    m.chunks(d.max(1)).map(<[f64]>::to_vec).collect()
}

fn cmd_symbols(a: &SymbolsArgs) -> Result<Outcome, Abort> {
    let c = &a.common;
    let setup = load(c)?;
    let n = setup.grid.dim_n();
    let gk = standard_gk_pair(n)?;
    let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n))?;
    let thetas = match &a.theta {
        Some(t) => vec![verify::covector(n, t)?],
        None => symbols::random_covectors(&mut fixtures::rng(c.seed), n, c.trials.max(1)),
    };
    if thetas.iter().any(|t: &GenVector| t.norm() == 0.0) {
        return Err(Error::ZeroCovector.into());
    }
    let (summary, reports) = symbols::symbol_trials(&gk, &psi, setup.rank, &thetas)?;
    let checks = vec![
        Check::max_error("symbol exactness", "inexact junctions over the trials", 0.0, summary.inexact_trials as f64),
        Check::max_error("symbol composition", "sigma_{i+1} o sigma_i = 0", IDENTITY_TOL, summary.max_composition),
        Check::max_error(
            "symbol kernel at B1",
            "ker sigma_1 = { f theta : f in u(r) }",
            verify::SPECIALIZATION_TOL,
            if summary.kernel_dims_ok { summary.max_kernel_residual } else { f64::INFINITY },
        ),
        Check::max_error("alternating dimension sum", "sum (-1)^i dim B^i = 0", 0.0, summary.alternating_sum.abs() as f64),
        Check::lower_bound("GK compatibility of theta", "<theta^{1,0}_+, theta^{0,1}_+> != 0", 0.0, summary.min_gk_pairing),
    ];
    let mut text = String::new();
    text.push_str(&format!("dims {:?}, ranks {:?}\n", summary.dims, reports[0].ranks));
    let data = json!({ "summary": summary, "trials": reports });
    let report = Report::new("symbols", c.seed, config_json(&setup, c), checks, data);
    text.push_str(&report.to_text());
    Ok(Outcome { report, text })
}

fn cmd_report(a: &ReportArgs) -> Result<Outcome, Abort> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| Abort::Input(format!("cannot read {}: {e}", a.input.display())))?;
    let report: Report =
        serde_json::from_str(&text).map_err(|e| Abort::Input(format!("malformed report: {e}")))?;
    if report.schema_version != crate::report::SCHEMA_VERSION {
        return Err(Abort::Input(format!("unsupported schema_version {:?}", report.schema_version)));
    }
    let text = report.to_text();
    Ok(Outcome { report, text })
}

fn write_report(path: &Path, report: &Report) -> Result<(), Abort> {
    std::fs::write(path, report.to_json()).map_err(|e| Abort::Input(format!("cannot write {}: {e}", path.display())))
}

/// What a command produced, before anything is printed or written.
#[derive(Debug)]
pub struct Execution {
    pub code: i32,
    /// Absent when the command stopped on an error.
    pub report: Option<Report>,
    /// Text summary for stdout.
    pub text: String,
    /// Diagnostic for stderr.
    pub error: Option<String>,
}

/// Run a parsed command without touching stdout or the filesystem, except
/// that `report` reads its input.
#[must_use]
pub fn execute(cli: &Cli) -> Execution {
    let result = match &cli.command {
        Command::Verify(c) => cmd_verify(c),
        Command::Curvature(c) => cmd_curvature(c),
        Command::Solve(a) => cmd_solve(a),
        Command::Symbols(a) => cmd_symbols(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(out) => {
            let code = if out.report.all_passed() { EXIT_PASS } else { EXIT_FAIL };
            Execution { code, report: Some(out.report), text: out.text, error: None }
        }
        Err(Abort::Input(msg)) => Execution { code: EXIT_INPUT, report: None, text: String::new(), error: Some(format!("error: {msg}")) },
        Err(Abort::Fail(msg)) => Execution { code: EXIT_FAIL, report: None, text: String::new(), error: Some(format!("failed: {msg}")) },
    }
}

/// Run a parsed command, print its summary, write `--output`, and return
/// the exit code.
pub fn run(cli: &Cli) -> i32 {
    let output = match &cli.command {
        Command::Verify(c) | Command::Curvature(c) => c.output.clone(),
        Command::Solve(a) => a.common.output.clone(),
        Command::Symbols(a) => a.common.output.clone(),
        Command::Report(_) => None,
    };
    let ex = execute(cli);
    if let (Some(path), Some(report)) = (&output, &ex.report) {
        if let Err(Abort::Input(msg) | Abort::Fail(msg)) = write_report(path, report) {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    }
    print!("{}", ex.text);
    if let Some(msg) = &ex.error {
        eprintln!("{msg}");
    }
    ex.code
}

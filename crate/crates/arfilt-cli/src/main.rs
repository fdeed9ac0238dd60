//! `arfilt`: Fourier coefficients of the spectral density `1/|p|^2` for
//! degree-one symmetric stable filters `p = p0 + p1 (z1 + ... + zd)`, and
//! reconstruction of `p` from prescribed covariance data.
//!
//! Subcommands:
//!   forward  evaluate coefficients at given indices
//!   inverse  recover the filter from (a, b)
//!   gamma    the feasibility constant `gamma_d`
//!   verify   self-check suites (exit 7 on any failure)
//!   table    dump a coefficient table (d = 2 or 3)
//!
//! All results go to stdout (or `--out`); timing goes to stderr so that
//! repeated runs with identical arguments produce bit-identical stdout.

mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use arfilt_core::closedform::{
    c000_hypergeom, coeff_d2, coeffs_d3_unitcube, recurrence_extend, CoeffTable3, ExtendedTable,
    MAX_SHELL,
};
use arfilt_core::error::Error as CoreError;
use arfilt_core::quadrature::torus_integral_converged;
use arfilt_core::series::{fourier_coeff_series, gamma_d, SeriesParams, MAX_DIM};
use arfilt_core::solver::{solve, CovarianceData};

use report::{complex_number, format_complex, number, to_csv, to_plain, ResultEntry, RunReport};
use verify::{run_suite, Suite, SuiteParams};

// ---------------------------------------------------------------------------
// Command-line grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "arfilt",
    version,
    about = "Fourier coefficients of degree-one symmetric autoregressive filters, \
             and the inverse reconstruction problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Fourier coefficients of 1/|p|^2 at one or more indices.
    Forward(ForwardArgs),
    /// Recover the filter from covariance data (a, b).
    Inverse(InverseArgs),
    /// Print the feasibility constant gamma_d.
    Gamma(GammaArgs),
    /// Run a self-check suite; exits 7 if any check fails.
    Verify(VerifyArgs),
    /// Print a table of coefficients for |k_i| <= kmax.
    Table(TableArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("slope").required(true).args(["s", "r"])))]
struct ForwardArgs {
    /// Number of torus variables d (1 to 6).
    #[arg(long)]
    dim: usize,
    /// Normalized slope s = -p1/p0 (real; requires d|s| < 1).
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Inverse slope r = 1/s (alternative to --s).
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Coefficient index "k1,k2,...,kd"; repeatable; default is the origin.
    #[arg(long, allow_hyphen_values = true)]
    index: Vec<String>,
    /// Evaluation method.
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Relative tolerance for series / quadrature evaluation.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Emit a JSON report instead of plain text.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV rows instead of plain text.
    #[arg(long)]
    csv: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InverseArgs {
    /// Number of torus variables d (2 to 6).
    #[arg(long)]
    dim: usize,
    /// Zero-lag covariance a = c(0) > 0.
    #[arg(long)]
    a: f64,
    /// Modulus of the first-lag covariance b.
    #[arg(long)]
    b: f64,
    /// Phase of b in radians (default 0).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b_phase: f64,
    /// Relative residual tolerance for declaring success.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Emit a JSON report instead of plain text.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaArgs {
    /// Number of torus variables d.
    #[arg(long)]
    dim: usize,
    /// Bound on the truncation error of the defining series.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Emit a JSON report instead of plain text.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which checks to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Lower end of the r sweep for identity checks.
    #[arg(long, default_value_t = 3.1)]
    rmin: f64,
    /// Upper end of the r sweep for identity checks.
    #[arg(long, default_value_t = 100.0)]
    rmax: f64,
    /// Number of r samples for identity checks.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// FFT grid size per axis for the oracle checks.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Number of torus variables (2 or 3).
    #[arg(long)]
    dim: usize,
    /// Inverse slope r = 1/s (requires r > d).
    #[arg(long)]
    r: f64,
    /// Indices range over |k_i| <= kmax.
    #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
    kmax: i64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Tolerance for series fallback entries (d = 3 beyond the recurrence).
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Series,
    Closedform,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Specfun,
    Identities,
    Inverses,
    Oracle,
    Roundtrip,
    All,
}

// ---------------------------------------------------------------------------
// Failure plumbing: every error carries the process exit code it maps to.
// ---------------------------------------------------------------------------

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::UnstableInput { .. } => 3,
            CoreError::NonConvergent { .. } => 4,
            CoreError::Infeasible { .. } => 5,
            CoreError::NoBracket { .. } | CoreError::NotPositiveDefinite { .. } => 6,
            CoreError::InvalidInput { .. } | CoreError::Domain { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

/// A finished report: the text to emit, where to put it, and the exit code.
struct Rendered {
    payload: String,
    out: Option<PathBuf>,
    exit: u8,
}

impl Rendered {
    fn emit(&self) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, &self.payload),
            None => {
                print!("{}", self.payload);
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let code = match dispatch(cli.command, threads) {
        Ok(rendered) => match rendered.emit() {
            Ok(()) => rendered.exit,
            Err(e) => {
                eprintln!("error: failed to write output: {e}");
                1
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    // Timing goes to stderr only, so stdout stays bit-identical across runs.
    eprintln!("wall time: {:.3} ms", started.elapsed().as_secs_f64() * 1e3);
    ExitCode::from(code)
}

/// Parse `ARFILT_THREADS`. The numeric kernels here are single-threaded, so
/// the value only caps what we would use and is echoed in the diagnostics;
/// a malformed value is still a usage error.
fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("ARFILT_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err("ARFILT_THREADS is not valid unicode".to_string())
        }
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("ARFILT_THREADS must be a positive integer, got {v:?}")),
        },
    }
}

fn thread_diagnostics(threads: Option<usize>) -> Value {
    json!({
        "requested": threads.map_or(Value::Null, |n| Value::from(n)),
        "used": 1,
    })
}

fn dispatch(command: Command, threads: Option<usize>) -> Result<Rendered, Failure> {
    match command {
        Command::Forward(args) => cmd_forward(args, threads),
        Command::Inverse(args) => cmd_inverse(args, threads),
        Command::Gamma(args) => cmd_gamma(args, threads),
        Command::Verify(args) => cmd_verify(args, threads),
        Command::Table(args) => cmd_table(args, threads),
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::invalid(format!("--tol must be a positive finite number, got {tol}")))
    }
}

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

/// Lazily built d = 3 closed-form tables, shared across the indices of one
/// run so the recurrence fill happens at most once.
struct D3Tables {
    r: f64,
    cube: Option<CoeffTable3>,
    ext_shell: i64,
    ext: Option<ExtendedTable>,
}

impl D3Tables {
    fn new(r: f64) -> Self {
        D3Tables { r, cube: None, ext_shell: 0, ext: None }
    }

    fn cube(&mut self) -> Result<&CoeffTable3, CoreError> {
        if self.cube.is_none() {
            self.cube = Some(coeffs_d3_unitcube(self.r)?);
        }
        Ok(self.cube.as_ref().expect("just filled"))
    }

    fn ext(&mut self, shell: i64) -> Result<&ExtendedTable, CoreError> {
        if self.ext.is_none() || self.ext_shell < shell {
            self.cube()?;
            let cube = self.cube.as_ref().expect("just filled");
            self.ext = Some(recurrence_extend(cube, self.r, shell)?);
            self.ext_shell = shell;
        }
        Ok(self.ext.as_ref().expect("just filled"))
    }
}

fn cmd_forward(args: ForwardArgs, threads: Option<usize>) -> Result<Rendered, Failure> {
    if args.dim < 1 || args.dim > MAX_DIM {
        return Err(Failure::invalid(format!(
            "--dim must be between 1 and {MAX_DIM}, got {}",
            args.dim
        )));
    }
    check_tol(args.tol)?;
    let s = match (args.s, args.r) {
        (Some(s), None) => {
            if !s.is_finite() {
                return Err(Failure::invalid(format!("--s must be finite, got {s}")));
            }
            s
        }
        (None, Some(r)) => {
            if !r.is_finite() || r == 0.0 {
                return Err(Failure::invalid(format!("--r must be finite and nonzero, got {r}")));
            }
            1.0 / r
        }
        // The ArgGroup makes these unreachable, but keep the grammar total.
        _ => return Err(Failure::invalid("exactly one of --s and --r is required")),
    };
    if args.dim as f64 * s.abs() >= 1.0 {
        return Err(CoreError::UnstableInput { dim: args.dim, modulus: s.abs() }.into());
    }
    let indices = parse_indices(&args.index, args.dim)?;

    let mut tables = D3Tables::new(if s != 0.0 { 1.0 / s } else { f64::INFINITY });
    let mut entries = Vec::with_capacity(indices.len());
    for k in &indices {
        let (value, method, tol_achieved) =
            eval_forward(args.dim, s, k, args.method, args.tol, &mut tables)?;
        entries.push(ResultEntry {
            index: k.clone(),
            value: number(value),
            method: method.to_string(),
            tol_achieved,
        });
    }

    let payload = if args.json {
        let params = json!({
            "dim": args.dim,
            "s": number(s),
            "r": if s != 0.0 { number(1.0 / s) } else { Value::Null },
            "method": method_name(args.method),
            "tol": number(args.tol),
        });
        let diagnostics = json!({ "threads": thread_diagnostics(threads) });
        RunReport::new("forward", params, entries, diagnostics).to_json()
    } else if args.csv {
        to_csv(args.dim, &entries)
    } else {
        to_plain(&entries)
    };
    Ok(Rendered { payload, out: args.out, exit: 0 })
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Auto => "auto",
        MethodArg::Series => "series",
        MethodArg::Closedform => "closedform",
        MethodArg::Quadrature => "quadrature",
    }
}

/// Parse `--index` occurrences ("k1,k2,...") into integer vectors; an empty
/// list defaults to the origin.
fn parse_indices(specs: &[String], dim: usize) -> Result<Vec<Vec<i64>>, Failure> {
    if specs.is_empty() {
        return Ok(vec![vec![0; dim]]);
    }
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let parts: Result<Vec<i64>, _> =
            spec.split(',').map(|t| t.trim().parse::<i64>()).collect();
        let k = parts.map_err(|e| Failure::invalid(format!("bad --index {spec:?}: {e}")))?;
        if k.len() != dim {
            return Err(Failure::invalid(format!(
                "--index {spec:?} has {} components, expected {dim}",
                k.len()
            )));
        }
        out.push(k);
    }
    Ok(out)
}

fn eval_forward(
    dim: usize,
    s: f64,
    k: &[i64],
    method: MethodArg,
    tol: f64,
    tables: &mut D3Tables,
) -> Result<(f64, &'static str, f64), Failure> {
    // s = 0: the density is identically 1, so the coefficients are a delta.
    if s == 0.0 {
        let v = if k.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
        return Ok((v, "series", 0.0));
    }
    match method {
        MethodArg::Series => series_value(dim, s, k, tol),
        MethodArg::Quadrature => quadrature_value(dim, s, k, tol),
        MethodArg::Closedform => closed_value(dim, s, k, tables),
        MethodArg::Auto => {
            // Closed forms exist for d <= 3 with positive slope; anything
            // they cannot reach (d = 1, r <= boundary cases, indices beyond
            // the recurrence) falls back to the series.
            if (dim == 2 || dim == 3) && s > 0.0 {
                match closed_value(dim, s, k, tables) {
                    Ok(hit) => Ok(hit),
                    Err(_) => series_value(dim, s, k, tol),
                }
            } else {
                series_value(dim, s, k, tol)
            }
        }
    }
}

fn series_value(
    dim: usize,
    s: f64,
    k: &[i64],
    tol: f64,
) -> Result<(f64, &'static str, f64), Failure> {
    let mut params = SeriesParams::new(dim, Complex64::new(s, 0.0)).map_err(Failure::from)?;
    params.tol = tol;
    let v = fourier_coeff_series(&params, k).map_err(Failure::from)?;
    Ok((v.re, "series", tol))
}

/// Starting grid and per-axis cap for the direct torus quadrature, chosen so
/// the total point count stays within the evaluator's budget.
fn quadrature_range(dim: usize) -> (usize, usize) {
    match dim {
        1 => (64, 16384),
        2 => (64, 8192),
        3 => (32, 256),
        4 => (16, 64),
        5 => (8, 32),
        _ => (8, 16),
    }
}

fn quadrature_value(
    dim: usize,
    s: f64,
    k: &[i64],
    tol: f64,
) -> Result<(f64, &'static str, f64), Failure> {
    let (n0, cap) = quadrature_range(dim);
    let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
    let f = |t: &[f64]| {
        let mut cos_sum = 0.0;
        let mut sin_sum = 0.0;
        let mut phase = 0.0;
        for (ti, ki) in t.iter().zip(&kf) {
            cos_sum += ti.cos();
            sin_sum += ti.sin();
            phase += ki * ti;
        }
        let re = 1.0 - s * cos_sum;
        let im = s * sin_sum;
        phase.cos() / (re * re + im * im)
    };
    let conv = torus_integral_converged(f, dim, n0, tol, cap).map_err(Failure::from)?;
    Ok((conv.value, "quadrature", tol))
}

fn closed_value(
    dim: usize,
    s: f64,
    k: &[i64],
    tables: &mut D3Tables,
) -> Result<(f64, &'static str, f64), Failure> {
    // Closed forms are derived for positive slope written as r = 1/s.
    if s <= 0.0 {
        return Err(Failure::invalid(format!(
            "closed forms require a positive slope, got s = {s}"
        )));
    }
    let r = 1.0 / s;
    match dim {
        2 => {
            let v = coeff_d2(r, k[0], k[1]).map_err(Failure::from)?;
            // Same-sign index pairs go through the 3F2 representation; the
            // rest is the algebraic geometric-decay branch.
            let tag = if k[0] * k[1] > 0 { "hypergeom" } else { "closedform" };
            Ok((v, tag, 1e-13))
        }
        3 => {
            let idx = [k[0], k[1], k[2]];
            let shell = idx.iter().map(|x| x.abs()).max().expect("three components");
            if idx == [0, 0, 0] {
                let v = c000_hypergeom(r).map_err(Failure::from)?;
                Ok((v, "hypergeom", 1e-13))
            } else if shell <= 1 {
                let v = tables
                    .cube()
                    .map_err(Failure::from)?
                    .get(idx)
                    .expect("unit cube covers |k|_inf <= 1");
                Ok((v, "elliptic", 1e-13))
            } else {
                let ext = tables.ext(shell).map_err(Failure::from)?;
                let v = ext.require(idx).map_err(Failure::from)?;
                Ok((v, "recurrence", 1e-12))
            }
        }
        _ => Err(Failure::invalid(format!(
            "closed forms cover --dim 2 and 3 only, got {dim}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// inverse
// ---------------------------------------------------------------------------

fn cmd_inverse(args: InverseArgs, threads: Option<usize>) -> Result<Rendered, Failure> {
    check_tol(args.tol)?;
    if args.b < 0.0 {
        return Err(Failure::invalid(format!(
            "--b is a modulus and must be >= 0 (use --b-phase for the phase), got {}",
            args.b
        )));
    }
    if !args.b_phase.is_finite() {
        return Err(Failure::invalid(format!("--b-phase must be finite, got {}", args.b_phase)));
    }
    let b = Complex64::from_polar(args.b, args.b_phase);
    let data = CovarianceData::new(args.dim, args.a, b).map_err(Failure::from)?;
    let sol = solve(&data, args.tol).map_err(Failure::from)?;

    // Judge the solution by relative residuals: the defining scalar equation
    // against its own left side, and (when available) the forward check.
    let d = args.dim as f64;
    let u = data.a + (d - 1.0) * sol.c;
    let det = data.a * u - d * b.norm_sqr();
    let lhs = data.a * u / det;
    let rel_maineq = sol.residual_maineq / lhs.max(1.0);
    let forward_ok = sol.residual_forward.map_or(true, |rf| rf <= 10.0 * args.tol);
    let within_tol = rel_maineq <= args.tol && forward_ok;

    let payload = if args.json {
        let params = json!({
            "dim": args.dim,
            "a": number(args.a),
            "b": number(args.b),
            "b_phase": number(args.b_phase),
            "tol": number(args.tol),
        });
        let results = vec![
            ResultEntry {
                index: vec![0; args.dim],
                value: number(data.a),
                method: "input".to_string(),
                tol_achieved: 0.0,
            },
            ResultEntry {
                index: first_lag(args.dim),
                value: complex_number(b),
                method: "input".to_string(),
                tol_achieved: 0.0,
            },
            ResultEntry {
                index: cross_lag(args.dim),
                value: number(sol.c),
                method: sol.method.to_string(),
                tol_achieved: rel_maineq,
            },
        ];
        let diagnostics = json!({
            "feasibility": {
                "feasible": sol.feasibility.feasible,
                "threshold": number(sol.feasibility.threshold),
                "margin": number(sol.feasibility.margin),
                "gamma": gamma_value(sol.feasibility.gamma),
            },
            "recovered": {
                "p0": number(sol.recovered.p0),
                "p1": complex_number(sol.recovered.p1),
                "slope": complex_number(sol.recovered.slope),
            },
            "min_eigenvalue": number(sol.min_eigenvalue),
            "residual_maineq_rel": number(rel_maineq),
            "residual_forward": sol.residual_forward.map_or(Value::Null, |x| number(x)),
            "root": sol.root.as_ref().map_or(Value::Null, |rt| {
                json!({
                    "bracket": [number(rt.bracket.0), number(rt.bracket.1)],
                    "iterations": rt.iterations,
                    "evaluations": rt.evaluations,
                    "extra_sign_changes": rt.extra_sign_changes,
                    "rhs_method": rt.method.to_string(),
                })
            }),
            "within_tolerance": within_tol,
            "threads": thread_diagnostics(threads),
        });
        RunReport::new("inverse", params, results, diagnostics).to_json()
    } else {
        let mut text = String::new();
        text.push_str(&format!(
            "feasible: |b| = {} < threshold = {} (margin {:.3e})\n",
            args.b, sol.feasibility.threshold, sol.feasibility.margin
        ));
        text.push_str(&format!("c        = {}   ({})\n", sol.c, sol.method));
        text.push_str(&format!("slope    = {}\n", format_complex(sol.recovered.slope)));
        text.push_str(&format!("p0       = {}\n", sol.recovered.p0));
        text.push_str(&format!("p1       = {}\n", format_complex(sol.recovered.p1)));
        text.push_str(&format!("min eig  = {:.6e}  (moment matrix positive definite)\n", sol.min_eigenvalue));
        text.push_str(&format!("residual = {:.3e} (scalar equation, relative)\n", rel_maineq));
        match sol.residual_forward {
            Some(rf) => text.push_str(&format!("residual = {rf:.3e} (forward series check)\n")),
            None => text.push_str(
                "residual = skipped (slope too near the stability boundary for the series check)\n",
            ),
        }
        text.push_str(&format!(
            "status   = {}\n",
            if within_tol { "ok" } else { "residual above tolerance" }
        ));
        text
    };
    Ok(Rendered { payload, out: args.out, exit: if within_tol { 0 } else { 4 } })
}

/// Index of the first-lag covariance, e.g. (1, 0, ..., 0).
fn first_lag(dim: usize) -> Vec<i64> {
    let mut k = vec![0; dim];
    k[0] = 1;
    k
}

/// Index of the cross covariance, e.g. (1, -1, 0, ..., 0).
fn cross_lag(dim: usize) -> Vec<i64> {
    let mut k = vec![0; dim];
    k[0] = 1;
    k[1] = -1;
    k
}

fn gamma_value(g: f64) -> Value {
    if g.is_infinite() {
        Value::String("infinite".to_string())
    } else {
        number(g)
    }
}

// ---------------------------------------------------------------------------
// gamma
// ---------------------------------------------------------------------------

fn cmd_gamma(args: GammaArgs, threads: Option<usize>) -> Result<Rendered, Failure> {
    check_tol(args.tol)?;
    if args.dim < 1 || args.dim > MAX_DIM {
        return Err(Failure::invalid(format!(
            "--dim must be between 1 and {MAX_DIM}, got {}",
            args.dim
        )));
    }
    // gamma_d is the value at the stability boundary of the lattice
    // return-probability series; it diverges for d <= 3.
    let estimate = if args.dim <= 3 { None } else { Some(gamma_d(args.dim, args.tol).map_err(Failure::from)?) };

    let payload = if args.json {
        let params = json!({ "dim": args.dim, "tol": number(args.tol) });
        let (value, tol_achieved) = match &estimate {
            None => (Value::String("infinite".to_string()), 0.0),
            Some(g) => (number(g.value), g.bound),
        };
        let results =
            vec![ResultEntry { index: vec![], value, method: "series".to_string(), tol_achieved }];
        let diagnostics = match &estimate {
            None => json!({
                "note": "the defining series diverges for d <= 3, so every |b| < a is feasible",
                "threads": thread_diagnostics(threads),
            }),
            Some(g) => json!({
                "terms": g.terms,
                "error_bound": number(g.bound),
                "feasibility_threshold_unit_a": number(1.0 - 1.0 / g.value),
                "threads": thread_diagnostics(threads),
            }),
        };
        RunReport::new("gamma", params, results, diagnostics).to_json()
    } else {
        match &estimate {
            None => format!("gamma_{} = infinite (d <= 3)\n", args.dim),
            Some(g) => format!(
                "gamma_{} = {}  (error bound {:.3e}, {} terms; feasibility threshold {} * a)\n",
                args.dim,
                g.value,
                g.bound,
                g.terms,
                1.0 - 1.0 / g.value
            ),
        }
    };
    Ok(Rendered { payload, out: args.out, exit: 0 })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: VerifyArgs, _threads: Option<usize>) -> Result<Rendered, Failure> {
    if !(args.rmin.is_finite() && args.rmax.is_finite() && args.rmin > 3.0) {
        return Err(Failure::invalid(format!(
            "--rmin/--rmax must be finite with rmin > 3 (stability for d = 3), got {} and {}",
            args.rmin, args.rmax
        )));
    }
    if args.rmax < args.rmin {
        return Err(Failure::invalid(format!(
            "--rmax ({}) must be >= --rmin ({})",
            args.rmax, args.rmin
        )));
    }
    if args.samples < 2 {
        return Err(Failure::invalid(format!("--samples must be >= 2, got {}", args.samples)));
    }
    if args.grid < 4 {
        return Err(Failure::invalid(format!("--grid must be >= 4, got {}", args.grid)));
    }
    let suite = match args.suite {
        SuiteArg::Specfun => Suite::Specfun,
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Inverses => Suite::Inverses,
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Roundtrip => Suite::Roundtrip,
        SuiteArg::All => Suite::All,
    };
    let params = SuiteParams {
        rmin: args.rmin,
        rmax: args.rmax,
        samples: args.samples,
        grid: args.grid,
    };
    let checks = run_suite(suite, &params).map_err(Failure::from)?;
    let mut payload = String::new();
    let mut failed = 0usize;
    for check in &checks {
        if !check.pass {
            failed += 1;
        }
        payload.push_str(&format!(
            "[{}] {}: residual {:.3e} (threshold {:.3e})\n",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.residual,
            check.threshold
        ));
    }
    payload.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    Ok(Rendered { payload, out: args.out, exit: if failed == 0 { 0 } else { 7 } })
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

fn cmd_table(args: TableArgs, threads: Option<usize>) -> Result<Rendered, Failure> {
    check_tol(args.tol)?;
    if args.dim != 2 && args.dim != 3 {
        return Err(Failure::invalid(format!("--dim must be 2 or 3 for table, got {}", args.dim)));
    }
    if !args.r.is_finite() {
        return Err(Failure::invalid(format!("--r must be finite, got {}", args.r)));
    }
    if args.r <= args.dim as f64 {
        return Err(CoreError::UnstableInput { dim: args.dim, modulus: 1.0 / args.r }.into());
    }
    if args.kmax < 0 {
        return Err(Failure::invalid(format!("--kmax must be >= 0, got {}", args.kmax)));
    }
    if args.dim == 3 && args.kmax > MAX_SHELL {
        return Err(Failure::invalid(format!(
            "--kmax for d = 3 is capped at {MAX_SHELL} (recurrence depth), got {}",
            args.kmax
        )));
    }

    let mut entries = Vec::new();
    if args.dim == 2 {
        for k1 in -args.kmax..=args.kmax {
            for k2 in -args.kmax..=args.kmax {
                let v = coeff_d2(args.r, k1, k2).map_err(Failure::from)?;
                let tag = if k1 * k2 > 0 { "hypergeom" } else { "closedform" };
                entries.push(ResultEntry {
                    index: vec![k1, k2],
                    value: number(v),
                    method: tag.to_string(),
                    tol_achieved: 1e-13,
                });
            }
        }
    } else {
        let cube = coeffs_d3_unitcube(args.r).map_err(Failure::from)?;
        let ext = if args.kmax >= 2 {
            Some(recurrence_extend(&cube, args.r, args.kmax).map_err(Failure::from)?)
        } else {
            None
        };
        let mut series = SeriesParams::new(args.dim, Complex64::new(1.0 / args.r, 0.0))
            .map_err(Failure::from)?;
        series.tol = args.tol;
        for k1 in -args.kmax..=args.kmax {
            for k2 in -args.kmax..=args.kmax {
                for k3 in -args.kmax..=args.kmax {
                    let idx = [k1, k2, k3];
                    let shell = idx.iter().map(|x| x.abs()).max().expect("three components");
                    let (value, tag, tol_achieved) = if shell <= 1 {
                        (cube.get(idx).expect("unit cube covers |k|_inf <= 1"), "elliptic", 1e-13)
                    } else {
                        match ext.as_ref().and_then(|t| t.get(idx)) {
                            Some(v) => (v, "recurrence", 1e-12),
                            // Orbits the recurrence cannot pin down from the
                            // seed cube are evaluated by the series instead.
                            None => {
                                let v = fourier_coeff_series(&series, &idx)
                                    .map_err(Failure::from)?;
                                (v.re, "series", args.tol)
                            }
                        }
                    };
                    entries.push(ResultEntry {
                        index: idx.to_vec(),
                        value: number(value),
                        method: tag.to_string(),
                        tol_achieved,
                    });
                }
            }
        }
    }

    let payload = match args.format {
        FormatArg::Csv => to_csv(args.dim, &entries),
        FormatArg::Json => {
            let params = json!({
                "dim": args.dim,
                "r": number(args.r),
                "kmax": args.kmax,
            });
            let diagnostics = json!({ "threads": thread_diagnostics(threads) });
            RunReport::new("table", params, entries, diagnostics).to_json()
        }
    };
    Ok(Rendered { payload, out: args.out, exit: 0 })
}

//! Command-line front end: subcommand dispatch, CSV emission, exit codes.
//!
//! Exit codes: 0 success, 1 configuration error, 2 certification or check
//! failure, 3 numerical non-convergence (reports are still written).

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::certificate;
use crate::error::Error;
use crate::field::{Bc, Grid, GridSpec, ScalarField};
use crate::greens;
use crate::problem::PNorm;
use crate::solver::{self, ProblemInstance, SolveMode, SolveReport};
use crate::study;
use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CERTIFIED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

const AFTER_HELP: &str = "\
Config file: `key = value` lines, `#` comments. Required keys: dims, n,
length, bc, a2, potential, nonlinearity, eps. Optional: b2, omega,
radial_coeff, f_value, exponent, coeffs, mode, radius, tol, max_iter, xi,
q2_potential, q2_b2, q2_omega, q2_radial_coeff.

CSV outputs:
  solve/limit/rescaled  field file columns: x1[,x2[,x3]],u
                        report file (suffix _report) columns: iteration,residual
  sweep                 columns: eps,error,gap_bound,slope
  greens-check --out    columns: check,detail,value,threshold,pass

Exit codes: 0 success, 1 config error, 2 certification/check failure,
3 numerical non-convergence (outputs are still written).";

#[derive(Parser)]
#[command(name = "epslab", version, about = "Screened semilinear fixed-point laboratory", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the contraction certificate (ball and contraction conditions)
    Certify(ConfigOnly),
    /// Picard-solve the eps problem and write the field + iteration report
    Solve(RunArgs),
    /// Solve the limiting equation q(x) u = f(u) node by node
    Limit(RunArgs),
    /// Sweep a decreasing eps list against the limiting solution
    Sweep(RunArgs),
    /// Verify kernel mass, delta limit, mass bound and resolvent limit
    GreensCheck(RunArgs),
    /// Check the Green-column ordering between two potentials
    CompareQ(ConfigOnly),
    /// Frozen-coefficient solve in stretched coordinates around xi
    Rescaled(RunArgs),
}

#[derive(Args)]
struct ConfigOnly {
    /// Path to the run configuration
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (the iteration report lands next to it)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config eps list (comma separated, decreasing)
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Override the stopping tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Override the iteration cap
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

/// Entry point used by the binary and by tests.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Certify(a) => run_certify(&a),
        Cmd::Solve(a) => run_solve(&a),
        Cmd::Limit(a) => run_limit(&a),
        Cmd::Sweep(a) => run_sweep(&a),
        Cmd::GreensCheck(a) => run_greens_check(&a),
        Cmd::CompareQ(a) => run_compare_q(&a),
        Cmd::Rescaled(a) => run_rescaled(&a),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("config error: cannot read {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    RunConfig::parse(&text).map_err(|e| {
        eprintln!("config error: {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn apply_overrides(cfg: &mut RunConfig, args: &RunArgs) {
    if let Some(eps) = &args.eps {
        cfg.eps = eps.clone();
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(max_iter) = args.max_iter {
        cfg.max_iter = max_iter;
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::LinearSolveStall { .. } | Error::RootSolveFailure { .. } | Error::Overflow { .. } => {
            EXIT_NO_CONVERGENCE
        }
        Error::CertificateRequired => EXIT_NOT_CERTIFIED,
        _ => EXIT_CONFIG,
    }
}

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

/// Builds the instance and attaches a certificate: the configured radius
/// when given, otherwise a feasibility search. `Ok(false)` means no
/// certificate could be established.
fn build_instance(cfg: &RunConfig, mode: SolveMode) -> Result<(ProblemInstance, bool), Error> {
    let grid = cfg.build_grid()?;
    let potential = cfg.build_potential()?;
    let nonlin = cfg.build_nonlinearity()?;
    let mut prob = ProblemInstance::new(grid, potential, nonlin, cfg.first_eps(), mode)?;
    let certified = match cfg.radius {
        Some(r) => prob.certify_with_radius(r)?.certified(),
        None => match prob.certify_auto() {
            Ok(found) => found.map(|c| c.certified()).unwrap_or(false),
            Err(Error::UnboundedPotential) => false,
            Err(e) => return Err(e),
        },
    };
    Ok((prob, certified))
}

fn run_certify(args: &ConfigOnly) -> i32 {
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let potential = match cfg.build_potential() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let nonlin = match cfg.build_nonlinearity() {
        Ok(n) => n,
        Err(e) => return fail(&e),
    };
    let p_norm = potential.p_norm();
    if matches!(p_norm, PNorm::Unbounded) {
        eprintln!("error: {}", Error::UnboundedPotential);
        return EXIT_CONFIG;
    }
    let radius = match cfg.radius {
        Some(r) => r,
        None => match certificate::find_radius(cfg.a2, p_norm, &nonlin) {
            Ok(Some(r)) => r,
            Ok(None) => {
                println!("no feasible radius in [1e-3, 1e3]: ball condition never holds");
                return EXIT_NOT_CERTIFIED;
            }
            Err(e) => return fail(&e),
        },
    };
    let cert = match certificate::certify(cfg.a2, p_norm, &nonlin, radius) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    println!("radius         = {:.12e}", cert.radius);
    println!("a2             = {:.12e}", cert.a2);
    println!("p_norm         = {:.12e}", cert.p_norm);
    println!("m_r            = {:.12e}", cert.m_r);
    println!("m1_r           = {:.12e}", cert.m1_r);
    println!("ball_lhs       = {:.12e}", cert.ball_lhs());
    println!("gamma          = {:.12e}", cert.gamma);
    println!("ball_ok        = {}", cert.ball_ok);
    println!("contraction_ok = {}", cert.contraction_ok);
    println!("certified      = {}", cert.certified());
    if cert.certified() {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    }
}

fn run_solve(args: &RunArgs) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    apply_overrides(&mut cfg, args);
    let mode = cfg.solve_mode();
    if matches!(mode, SolveMode::Rescaled { .. }) {
        eprintln!("config error: mode = rescaled belongs to the `rescaled` subcommand");
        return EXIT_CONFIG;
    }
    let (prob, certified) = match build_instance(&cfg, mode) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let zero = ScalarField::constant(prob.grid(), 0.0);
    let report = match solver::picard_solve(&prob, &zero, cfg.tol, cfg.max_iter) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    print_solve_summary(&report, certified, prob.certificate().map(|c| c.gamma));
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("solution.csv"));
    if let Err(e) = write_field_csv(&out, &report.final_field) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = write_report_csv(&report_path(&out), &report) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    if report.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn run_limit(args: &RunArgs) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    apply_overrides(&mut cfg, args);
    let (prob, certified) = match build_instance(&cfg, SolveMode::Limit) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    if !certified {
        eprintln!("error: the limiting solve needs a certified radius (set `radius` or pick a certifiable instance)");
        return EXIT_NOT_CERTIFIED;
    }
    let field = match solver::limit_solve(&prob) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    // iteration report from the limiting operator, which must agree
    let zero = ScalarField::constant(prob.grid(), 0.0);
    let report = match solver::picard_solve(&prob, &zero, cfg.tol, cfg.max_iter) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let agreement = field.sup_distance(&report.final_field);
    println!("nodes               = {}", field.values().len());
    println!("sup_norm            = {:.12e}", field.sup_norm());
    println!("picard_agreement    = {:.12e}", agreement);
    print_solve_summary(&report, certified, prob.certificate().map(|c| c.gamma));
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("limit.csv"));
    if let Err(e) = write_field_csv(&out, &field) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = write_report_csv(&report_path(&out), &report) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    EXIT_OK
}

fn run_sweep(args: &RunArgs) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    apply_overrides(&mut cfg, args);
    let mode = cfg.solve_mode();
    if !matches!(mode, SolveMode::EpsSplit | SolveMode::EpsFull) {
        eprintln!("config error: sweeps need mode = eps-split or eps-full");
        return EXIT_CONFIG;
    }
    let (prob, certified) = match build_instance(&cfg, mode) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    if !certified {
        eprintln!("error: sweeps need a certified instance (set `radius` or pick a certifiable one)");
        return EXIT_NOT_CERTIFIED;
    }
    let report = match study::sweep_eps(&prob, &cfg.eps, cfg.tol, cfg.max_iter) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    for s in &report.skipped {
        eprintln!("warning: skipped eps = {}: {}", s.eps, s.reason);
    }
    let fit = study::fit_rate(&report);
    for row in &report.rows {
        println!(
            "eps = {:.6e}  error = {:.12e}  gap_bound = {:.12e}",
            row.eps, row.error, row.gap_bound
        );
    }
    match &fit {
        Some(f) => {
            println!("fitted_slope = {:.6}", f.slope);
            println!("fit_residual = {:.6e}", f.fit_residual);
            if f.excluded_largest {
                println!("note: largest eps excluded from the fit as pre-asymptotic");
            }
        }
        None => println!("fitted_slope = n/a (fewer than 3 nonzero errors)"),
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    if let Err(e) = write_sweep_csv(&out, &report, fit.as_ref()) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    if report.all_converged() {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

struct Check {
    name: &'static str,
    detail: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn run_greens_check(args: &RunArgs) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    apply_overrides(&mut cfg, args);
    match greens_checks(&cfg) {
        Ok(checks) => {
            let mut all = true;
            for c in &checks {
                all &= c.pass;
                println!(
                    "{}: {} ({}, value {:.6e}, threshold {:.1e})",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.detail,
                    c.value,
                    c.threshold
                );
            }
            if let Some(out) = &args.out {
                if let Err(e) = write_checks_csv(out, &checks) {
                    eprintln!("error: cannot write {}: {e}", out.display());
                    return EXIT_CONFIG;
                }
            }
            if all {
                EXIT_OK
            } else {
                EXIT_NOT_CERTIFIED
            }
        }
        Err(e) => fail(&e),
    }
}

fn greens_checks(cfg: &RunConfig) -> Result<Vec<Check>, Error> {
    let a = cfg.a2.sqrt();
    let potential = cfg.build_potential()?;
    let mut checks = Vec::new();

    // kernel mass, standard and rescaled forms
    let eps0 = cfg.first_eps().max(1e-6);
    for params in [
        greens::KernelParams::new(eps0, a)?,
        greens::KernelParams::rescaled(a)?,
    ] {
        let quad = greens::kernel_mass_quadrature(&params, 40.0 * params.decay_length())?;
        checks.push(Check {
            name: "kernel-mass",
            detail: format!(
                "eps {:.3e}, a {:.3e}{}",
                params.eps,
                params.a,
                if params.rescaled { ", rescaled" } else { "" }
            ),
            value: quad.relative_error(),
            threshold: 1e-6,
            pass: quad.relative_error() <= 1e-6,
        });
    }

    // delta limit of the periodic Green action on a single mode
    let periodic = Grid::build(GridSpec::new(cfg.dims, cfg.n, cfg.length, Bc::Periodic))?;
    let kappa = 2.0 * std::f64::consts::PI / cfg.length;
    let mode_field = ScalarField::sample(&periodic, |x| (kappa * x[0]).cos())?;
    let rows = greens::delta_limit_check(&mode_field, &cfg.eps, a)?;
    let mut worst = 0.0f64;
    for row in &rows {
        let e2k2 = row.eps * row.eps * kappa * kappa;
        let closed = e2k2 / (cfg.a2 * (e2k2 + cfg.a2));
        worst = worst.max((row.sup_error - closed).abs());
    }
    checks.push(Check {
        name: "delta-limit",
        detail: format!("single mode kappa {kappa:.3e} vs closed form"),
        value: worst,
        threshold: 1e-10,
        pass: worst <= 1e-10,
    });

    // mass bound of the Dirichlet resolvent
    let dirichlet = Grid::build(GridSpec::new(cfg.dims, cfg.n, cfg.length, Bc::Dirichlet))?;
    let op = greens::ResolventOperator::assemble(&dirichlet, &potential, eps0)?;
    let mb = greens::mass_bound_check(&op)?;
    checks.push(Check {
        name: "mass-bound",
        detail: format!("max of resolvent applied to 1 vs 1/a2 = {:.6e}", mb.bound),
        value: mb.max_value,
        threshold: mb.bound + greens::ORDER_TOL,
        pass: mb.within_bound,
    });

    // vanishing-eps limit of the resolvent on a smooth bump
    let support = cfg.length / 4.0;
    let bump = ScalarField::sample(&dirichlet, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (support * support);
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })?;
    let dist = greens::distributional_limit_check(&bump, &potential, &cfg.eps)?;
    let decreasing = dist.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let last = dist.rows.last().map(|r| r.sup_error).unwrap_or(0.0);
    checks.push(Check {
        name: "resolvent-limit",
        detail: format!(
            "errors over eps list{}",
            if dist.boundary_warning {
                " (warning: probe touches walls)"
            } else {
                ""
            }
        ),
        value: last,
        threshold: f64::INFINITY,
        pass: decreasing && !dist.boundary_warning,
    });

    Ok(checks)
}

fn run_compare_q(args: &ConfigOnly) -> i32 {
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = (|| -> Result<greens::GreenComparison, Error> {
        let grid = Grid::build(GridSpec::new(cfg.dims, cfg.n, cfg.length, Bc::Dirichlet))?;
        let q1 = cfg.build_potential()?;
        let q2 = cfg.build_q2()?;
        let n = cfg.n;
        let mut quarter = [0usize; 3];
        let mut three_quarter = [0usize; 3];
        for d in 0..cfg.dims {
            quarter[d] = n / 4;
            three_quarter[d] = (3 * n) / 4;
        }
        let sources = [
            grid.center_index(),
            grid.ravel(quarter),
            grid.ravel(three_quarter),
        ];
        greens::green_comparison_check(&grid, &q1, &q2, &sources, cfg.first_eps())
    })();
    match result {
        Ok(cmp) => {
            println!(
                "ordered = {} (max violation {:.6e}, tolerance {:.1e})",
                cmp.ordered,
                cmp.max_violation,
                greens::ORDER_TOL
            );
            if cmp.ordered {
                EXIT_OK
            } else {
                EXIT_NOT_CERTIFIED
            }
        }
        Err(e) => fail(&e),
    }
}

fn run_rescaled(args: &RunArgs) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    apply_overrides(&mut cfg, args);
    let (prob, certified) = match build_instance(&cfg, SolveMode::EpsSplit) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    if !certified {
        eprintln!("error: the rescaled solve needs a certified radius");
        return EXIT_NOT_CERTIFIED;
    }
    let rep = match solver::rescaled_solve(cfg.xi, cfg.first_eps(), &prob, cfg.tol, cfg.max_iter) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!("frozen_q        = {:.12e}", rep.frozen_q);
    println!("constant_root   = {:.12e}", rep.constant_root);
    println!("deviation       = {:.12e}", rep.deviation);
    println!("uniqueness_lhs  = {:.12e}", rep.uniqueness_lhs);
    println!("uniqueness_ok   = {}", rep.uniqueness_ok);
    if !rep.uniqueness_ok {
        println!("warning: frozen-coefficient uniqueness inequality fails at this base point");
    }
    print_solve_summary(&rep.solve, certified, prob.certificate().map(|c| c.gamma));
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("rescaled.csv"));
    if let Err(e) = write_field_csv(&out, &rep.solve.final_field) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = write_report_csv(&report_path(&out), &rep.solve) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    if rep.solve.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn print_solve_summary(report: &SolveReport, certified: bool, gamma: Option<f64>) {
    println!("converged           = {}", report.converged);
    println!("iterations          = {}", report.iterations);
    println!("final_sup_norm      = {:.12e}", report.final_field.sup_norm());
    match report.gamma_observed {
        Some(g) => println!("gamma_observed      = {:.12e}", g),
        None => println!("gamma_observed      = n/a"),
    }
    match (certified, gamma) {
        (true, Some(g)) => println!("gamma_certified     = {:.12e}", g),
        _ => println!("gamma_certified     = n/a (not certified)"),
    }
    match report.aposteriori_error {
        Some(e) => println!("aposteriori_error   = {:.12e}", e),
        None => println!("aposteriori_error   = n/a"),
    }
}

/// `foo.csv` becomes `foo_report.csv`.
fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_report.{ext}"))
}

fn write_field_csv(path: &Path, field: &ScalarField) -> std::io::Result<()> {
    let grid = field.grid();
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    let header: Vec<&str> = match grid.dims() {
        1 => vec!["x1", "u"],
        2 => vec!["x1", "x2", "u"],
        _ => vec!["x1", "x2", "x3", "u"],
    };
    writeln!(w, "{}", header.join(","))?;
    for (flat, &v) in field.values().iter().enumerate() {
        let x = grid.node_coords(flat);
        for d in 0..grid.dims() {
            write!(w, "{:.12e},", x[d])?;
        }
        writeln!(w, "{v:.12e}")?;
    }
    w.flush()
}

fn write_report_csv(path: &Path, report: &SolveReport) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "iteration,residual")?;
    for (i, r) in report.residuals.iter().enumerate() {
        writeln!(w, "{},{r:.12e}", i + 1)?;
    }
    w.flush()
}

fn write_sweep_csv(
    path: &Path,
    report: &study::SweepReport,
    fit: Option<&study::RateFit>,
) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "eps,error,gap_bound,slope")?;
    for row in &report.rows {
        match fit {
            Some(f) => writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                row.eps, row.error, row.gap_bound, f.slope
            )?,
            None => writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},",
                row.eps, row.error, row.gap_bound
            )?,
        }
    }
    w.flush()
}

fn write_checks_csv(path: &Path, checks: &[Check]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "check,detail,value,threshold,pass")?;
    for c in checks {
        writeln!(
            w,
            "{},\"{}\",{:.12e},{:.12e},{}",
            c.name, c.detail, c.value, c.threshold, c.pass
        )?;
    }
    w.flush()
}

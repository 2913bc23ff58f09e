//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them).
//!
//! The corpus instances referenced by several criteria live in
//! `certified_corpus`.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use epslab::certificate::{certify, find_radius};
use epslab::field::{Bc, Grid, GridSpec, ScalarField};
use epslab::greens::{
    delta_limit_check, distributional_limit_check, green_comparison_check, kernel_mass_quadrature,
    mass_bound_check, KernelParams, ResolventOperator, ORDER_TOL,
};
use epslab::problem::{Nonlinearity, PNorm, PotentialSpec};
use epslab::solver::{limit_solve, picard_solve, rescaled_solve, ProblemInstance, SolveMode};
use epslab::study::{fit_rate, sweep_eps};

const PICARD_TOL: f64 = 1e-10;

fn fmt_list(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", inner.join(", "))
}

fn verdict(index: usize, label: &str, pass: bool, detail: &str) {
    println!(
        "criterion {index} ({label}): {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {index} ({label}): {detail}");
}

fn periodic(dims: usize, n: usize, len: f64) -> Arc<Grid> {
    Grid::build(GridSpec::new(dims, n, len, Bc::Periodic)).unwrap()
}

fn dirichlet(dims: usize, n: usize, len: f64) -> Arc<Grid> {
    Grid::build(GridSpec::new(dims, n, len, Bc::Dirichlet)).unwrap()
}

/// The sine instance: a^2 = 16, q = 17 + sin(2 pi x1 / L), f = e^u, R = 1.
fn sine_instance(n: usize, len: f64, eps: f64) -> ProblemInstance {
    let q = PotentialSpec::shifted_sine(16.0, 2.0 * PI / len).unwrap();
    let mut prob = ProblemInstance::new(
        periodic(1, n, len),
        q,
        Nonlinearity::Exponential,
        eps,
        SolveMode::EpsSplit,
    )
    .unwrap();
    prob.certify_with_radius(1.0).unwrap();
    prob
}

/// Certified instances exercised by the contraction and gap criteria.
fn certified_corpus() -> Vec<(String, ProblemInstance)> {
    let mut corpus = Vec::new();
    for eps in [0.4, 0.2, 0.1, 0.05] {
        corpus.push((format!("sine-exp eps={eps}"), sine_instance(256, 1.0, eps)));
    }
    {
        // constant q = 9, f = (u+1)^2, searched radius
        let q = PotentialSpec::constant(9.0, 9.0).unwrap();
        let nl = Nonlinearity::power_shift(2.0).unwrap();
        let mut prob = ProblemInstance::new(
            periodic(1, 64, 1.0),
            q,
            nl,
            0.3,
            SolveMode::EpsSplit,
        )
        .unwrap();
        prob.certify_auto().unwrap().expect("certifiable");
        corpus.push(("const-q power-shift eps=0.3".into(), prob));
    }
    {
        // 2-D, constant q above the floor, exponential f
        let q = PotentialSpec::constant(16.0, 17.5).unwrap();
        let mut prob = ProblemInstance::new(
            periodic(2, 32, 2.0),
            q,
            Nonlinearity::Exponential,
            0.3,
            SolveMode::EpsSplit,
        )
        .unwrap();
        prob.certify_with_radius(1.0).unwrap();
        corpus.push(("2d const-q exp eps=0.3".into(), prob));
    }
    {
        // 3-D sine instance, small grid
        let q = PotentialSpec::shifted_sine(16.0, 2.0 * PI).unwrap();
        let mut prob = ProblemInstance::new(
            periodic(3, 16, 1.0),
            q,
            Nonlinearity::Exponential,
            0.35,
            SolveMode::EpsSplit,
        )
        .unwrap();
        prob.certify_with_radius(1.0).unwrap();
        corpus.push(("3d sine-exp eps=0.35".into(), prob));
    }
    {
        // full resolvent path on a Dirichlet box
        let q = PotentialSpec::constant(9.0, 9.0).unwrap();
        let nl = Nonlinearity::power_shift(2.0).unwrap();
        let mut prob = ProblemInstance::new(
            dirichlet(1, 128, 4.0),
            q,
            nl,
            0.1,
            SolveMode::EpsFull,
        )
        .unwrap();
        prob.certify_auto().unwrap().expect("certifiable");
        corpus.push(("dirichlet full-path eps=0.1".into(), prob));
    }
    for (_, prob) in &corpus {
        assert!(prob.is_certified());
    }
    corpus
}

#[test]
fn criterion_1_kernel_mass() {
    let cases = [
        KernelParams::new(1.0, 1.0).unwrap(),
        KernelParams::new(0.1, 2.0).unwrap(),
        KernelParams::rescaled(3.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for params in &cases {
        let quad = kernel_mass_quadrature(params, 40.0 * params.decay_length()).unwrap();
        worst = worst.max(quad.relative_error());
    }
    verdict(
        1,
        "kernel mass",
        worst <= 1e-6,
        &format!("worst relative error {worst:.3e} (tolerance 1e-6)"),
    );
}

#[test]
fn criterion_2_certificate_arithmetic() {
    let cert = certify(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential, 1.0).unwrap();
    let ball_oracle = (2.0 + E) / 16.0;
    let gamma_oracle = (2.0 + E * E) / 16.0;
    let ball_err = (cert.ball_lhs() - ball_oracle).abs();
    let gamma_err = (cert.gamma - gamma_oracle).abs();

    let nl = Nonlinearity::power_shift(2.0).unwrap();
    let rejected = certify(4.0, PNorm::Bounded(0.0), &nl, 1.0).unwrap();
    let pass = cert.certified()
        && ball_err <= 1e-12
        && gamma_err <= 1e-12
        && (cert.ball_lhs() - 0.294892614278690).abs() <= 1e-12
        && (cert.gamma - 0.586816006183166).abs() <= 1e-12
        && !rejected.certified()
        && (rejected.gamma - 1.5).abs() <= 1e-12;
    verdict(
        2,
        "certificate arithmetic",
        pass,
        &format!(
            "ball_lhs {:.12}, gamma {:.12}, rejected gamma {:.3}",
            cert.ball_lhs(),
            cert.gamma,
            rejected.gamma
        ),
    );
}

#[test]
fn criterion_3_exactness_on_constants() {
    // q = a^2, f = c: the solution is c / a^2 for every eps
    let grid = periodic(1, 64, 1.0);
    let q = PotentialSpec::constant(4.0, 4.0).unwrap();
    let mut worst_const = 0.0f64;
    for eps in [1.0, 0.3, 0.05, 0.01] {
        let mut prob = ProblemInstance::new(
            Arc::clone(&grid),
            q.clone(),
            Nonlinearity::Constant { c: 3.0 },
            eps,
            SolveMode::EpsSplit,
        )
        .unwrap();
        prob.certify_with_radius(1.0).unwrap();
        let zero = ScalarField::constant(&grid, 0.0);
        let report = picard_solve(&prob, &zero, 1e-13, 50).unwrap();
        assert!(report.converged);
        let err = report
            .final_field
            .values()
            .iter()
            .fold(0.0f64, |m, &v| m.max((v - 0.75).abs()));
        worst_const = worst_const.max(err);
    }

    // q = 9, f = (u+1)^2: the solution is the scalar root (7 - sqrt(45))/2
    let root = (7.0 - 45f64.sqrt()) / 2.0;
    let q9 = PotentialSpec::constant(9.0, 9.0).unwrap();
    let nl = Nonlinearity::power_shift(2.0).unwrap();
    let mut prob = ProblemInstance::new(
        Arc::clone(&grid),
        q9,
        nl,
        0.25,
        SolveMode::EpsSplit,
    )
    .unwrap();
    prob.certify_auto().unwrap().expect("certifiable");
    let zero = ScalarField::constant(&grid, 0.0);
    let report = picard_solve(&prob, &zero, PICARD_TOL, 200).unwrap();
    assert!(report.converged);
    let nonlinear_err = report
        .final_field
        .values()
        .iter()
        .fold(0.0f64, |m, &v| m.max((v - root).abs()));

    let pass = worst_const <= 1e-12 && nonlinear_err <= PICARD_TOL;
    verdict(
        3,
        "exactness on constants",
        pass,
        &format!("constant-f error {worst_const:.3e} (<= 1e-12), nonlinear error {nonlinear_err:.3e} (<= {PICARD_TOL:.0e})"),
    );
}

#[test]
fn criterion_4_contraction_observance() {
    let mut detail = String::new();
    let mut pass = true;
    for (name, prob) in certified_corpus() {
        let cert = prob.certificate().unwrap();
        let zero = ScalarField::constant(prob.grid(), 0.0);
        let report = picard_solve(&prob, &zero, PICARD_TOL, 500).unwrap();
        assert!(report.converged, "{name} failed to converge");
        let observed = report.gamma_observed.expect("at least two residuals");
        let ok = observed <= cert.gamma + 0.05;
        pass &= ok;
        detail.push_str(&format!(
            "[{name}: observed {observed:.4} vs gamma {:.4}] ",
            cert.gamma
        ));
        // ball preservation along the way: re-run and watch the norms
        assert!(report.final_field.sup_norm() <= cert.radius + 1e-12);
    }
    verdict(4, "contraction observance", pass, detail.trim());
}

#[test]
fn criterion_5_singular_limit_sweep() {
    let prob = sine_instance(256, 1.0, 0.4);
    let eps_list = [0.4, 0.2, 0.1, 0.05];
    let report = sweep_eps(&prob, &eps_list, PICARD_TOL, 500).unwrap();
    assert!(report.skipped.is_empty(), "all eps levels must be resolvable");
    assert!(report.all_converged());
    let errors: Vec<f64> = report.rows.iter().map(|r| r.error).collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let fit = fit_rate(&report).expect("enough nonzero errors");
    let slope_ok = (1.5..=2.5).contains(&fit.slope);
    verdict(
        5,
        "singular limit",
        decreasing && slope_ok,
        &format!("errors {}, slope {:.3} (expected in [1.5, 2.5])", fmt_list(&errors), fit.slope),
    );
}

#[test]
fn criterion_6_aposteriori_bound() {
    let mut pass = true;
    let mut detail = String::new();

    // every corpus instance
    for (name, prob) in certified_corpus() {
        let u_limit = limit_solve(&prob).unwrap();
        let zero = ScalarField::constant(prob.grid(), 0.0);
        let report = picard_solve(&prob, &zero, PICARD_TOL, 500).unwrap();
        let measured = report.final_field.sup_distance(&u_limit);
        let gap = epslab::solver::aposteriori_gap(&u_limit, &prob).unwrap();
        let ok = measured <= gap + 2.0 * PICARD_TOL;
        pass &= ok;
        detail.push_str(&format!("[{name}: {measured:.3e} <= {gap:.3e}] "));
    }

    // every swept eps of the sine instance
    let prob = sine_instance(256, 1.0, 0.4);
    let report = sweep_eps(&prob, &[0.4, 0.2, 0.1, 0.05], PICARD_TOL, 500).unwrap();
    for row in &report.rows {
        let ok = row.error <= row.gap_bound + 2.0 * PICARD_TOL;
        pass &= ok;
        detail.push_str(&format!(
            "[sweep eps={}: {:.3e} <= {:.3e}] ",
            row.eps, row.error, row.gap_bound
        ));
    }
    verdict(6, "a-posteriori bound", pass, detail.trim());
}

#[test]
fn criterion_7_rescaled_consistency() {
    let prob = sine_instance(128, 1.0, 0.4);
    let eps_list = [0.4, 0.2, 0.1];
    let probes = [[0.0, 0.0, 0.0], [0.13, 0.0, 0.0], [-0.27, 0.0, 0.0]];
    let mut pass = true;
    let mut detail = String::new();
    for xi in probes {
        let mut prev = f64::INFINITY;
        let mut devs = Vec::new();
        for eps in eps_list {
            let rep = rescaled_solve(xi, eps, &prob, PICARD_TOL, 400).unwrap();
            assert!(rep.solve.converged);
            pass &= rep.deviation < prev;
            pass &= rep.uniqueness_ok;
            prev = rep.deviation;
            devs.push(rep.deviation);
        }
        detail.push_str(&format!("[xi={:.2}: deviations {}] ", xi[0], fmt_list(&devs)));
    }
    verdict(7, "rescaled consistency", pass, detail.trim());
}

#[test]
fn criterion_8_maximum_principle_suite() {
    let grid = dirichlet(3, 32, 4.0);
    let growing = PotentialSpec::radial_quadratic(4.0, 1.0).unwrap();
    let floor = PotentialSpec::constant(4.0, 4.0).unwrap();
    let eps = 0.5;

    // mass bound on the growing potential
    let op = ResolventOperator::assemble(&grid, &growing, eps).unwrap();
    let mb = mass_bound_check(&op).unwrap();
    let mass_ok = mb.within_bound && mb.max_value <= 0.25 + 1e-8 && mb.min_value >= -1e-8;

    // Green-column ordering at three sources
    let sources = [
        grid.center_index(),
        grid.ravel([8, 8, 8]),
        grid.ravel([24, 8, 16]),
    ];
    let cmp = green_comparison_check(&grid, &growing, &floor, &sources, eps).unwrap();

    // vanishing-eps limit on a compactly supported bump
    let support = 1.0;
    let bump = ScalarField::sample(&grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (support * support);
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
    .unwrap();
    let dist = distributional_limit_check(&bump, &growing, &[0.4, 0.2, 0.1, 0.05]).unwrap();
    let errors: Vec<f64> = dist.rows.iter().map(|r| r.sup_error).collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);

    let pass = mass_ok && cmp.ordered && decreasing && !dist.boundary_warning;
    verdict(
        8,
        "maximum principle suite",
        pass,
        &format!(
            "mass max {:.6e} <= {:.6e}; ordering violation {:.3e} (tol {ORDER_TOL:.0e}); limit errors {}",
            mb.max_value, mb.bound, cmp.max_violation, fmt_list(&errors)
        ),
    );
}

#[test]
fn criterion_9_delta_limit_closed_form() {
    let grid = periodic(1, 128, 2.0);
    let kappa = 2.0 * PI / grid.len();
    let h = ScalarField::sample(&grid, |x| (kappa * x[0]).cos()).unwrap();
    let a = 2.0;
    let rows = delta_limit_check(&h, &[0.4, 0.2, 0.1, 0.05], a).unwrap();
    let mut worst = 0.0f64;
    for row in &rows {
        let e2k2 = row.eps * row.eps * kappa * kappa;
        let closed = e2k2 / (a * a * (e2k2 + a * a));
        worst = worst.max((row.sup_error - closed).abs());
    }
    verdict(
        9,
        "delta limit closed form",
        worst <= 1e-10,
        &format!("worst deviation from closed form {worst:.3e} (tolerance 1e-10)"),
    );
}

/// Beyond the numbered criteria: a certified radius search must hand back
/// a radius that passes certification verbatim.
#[test]
fn radius_search_passes_certify_exactly() {
    let r = find_radius(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential)
        .unwrap()
        .expect("feasible");
    let cert = certify(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential, r).unwrap();
    assert!(cert.certified());
}

//! Vanishing-eps sweeps and rate fitting.
//!
//! A sweep solves a certified instance for each eps in a decreasing list,
//! compares against the limiting solution of `q(x) u = f(u)` on the same
//! grid, and records the sup error together with the computable gap bound
//! `(1/(1-gamma)) ||T_eps(u) - T_0(u)||`. Rates come from a least-squares
//! slope in log-log coordinates; only convergence itself is guaranteed,
//! the observed slope (about 2 for smooth instances) is an empirical
//! report.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::solver::{aposteriori_gap, limit_solve, picard_solve, ProblemInstance, SolveMode};

/// One eps level of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub eps: f64,
    /// `|| u_eps - u ||_sup` against the limiting solution.
    pub error: f64,
    /// The certified gap bound at this eps.
    pub gap_bound: f64,
    pub converged: bool,
}

/// An eps level skipped by the resolvability guard.
#[derive(Debug, Clone)]
pub struct SkippedEps {
    pub eps: f64,
    pub reason: String,
}

/// Per-eps errors and bounds against the shared limiting solution.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedEps>,
    pub limit: ScalarField,
}

impl SweepReport {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Result of a log-log rate fit.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Least-squares slope of `log error` against `log eps`.
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub fit_residual: f64,
    /// Whether the largest eps was dropped as pre-asymptotic.
    pub excluded_largest: bool,
}

/// Solves per eps and tabulates errors against the limiting solution.
///
/// The instance must be certified (the limit comparison needs the ball)
/// and `eps_list` strictly decreasing. Levels too coarse for the grid
/// (`eps/a < 2h`) are skipped with a reason instead of polluting the
/// table.
pub fn sweep_eps(
    prob: &ProblemInstance,
    eps_list: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SweepReport> {
    if !prob.is_certified() {
        return Err(Error::CertificateRequired);
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "eps list must be strictly decreasing".into(),
        ));
    }
    if matches!(prob.mode(), SolveMode::Limit | SolveMode::Rescaled { .. }) {
        return Err(Error::InvalidArgument(
            "sweeps need an eps-dependent mode".into(),
        ));
    }

    let limit = limit_solve(prob)?;
    let a = prob.potential().a2().sqrt();
    let h = prob.grid().spacing();
    let zero = ScalarField::constant(prob.grid(), 0.0);

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &eps in eps_list {
        if eps / a < 2.0 * h {
            skipped.push(SkippedEps {
                eps,
                reason: format!(
                    "kernel width eps/a = {:.3e} below two spacings (h = {:.3e})",
                    eps / a,
                    h
                ),
            });
            continue;
        }
        let at_eps = prob.with_eps(eps)?;
        let report = picard_solve(&at_eps, &zero, tol, max_iter)?;
        rows.push(SweepRow {
            eps,
            error: report.final_field.sup_distance(&limit),
            gap_bound: aposteriori_gap(&limit, &at_eps)?,
            converged: report.converged,
        });
    }
    Ok(SweepReport {
        rows,
        skipped,
        limit,
    })
}

/// Least-squares slope of `log error` vs `log eps`. Returns `None` when
/// fewer than three rows carry a nonzero error. The largest eps is
/// dropped (and flagged) when its error breaks the monotone decrease,
/// which marks it as pre-asymptotic.
pub fn fit_rate(report: &SweepReport) -> Option<RateFit> {
    let mut rows: Vec<&SweepRow> = report.rows.iter().filter(|r| r.error > 0.0).collect();
    let mut excluded_largest = false;
    if rows.len() >= 2 && rows[0].error <= rows[1].error {
        rows.remove(0);
        excluded_largest = true;
    }
    if rows.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let d = y - (slope * x + intercept);
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Some(RateFit {
        slope,
        fit_residual,
        excluded_largest,
    })
}

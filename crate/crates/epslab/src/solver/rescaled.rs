//! Frozen-coefficient solve in stretched coordinates.
//!
//! Around a base point `xi` the substitution `x = xi + eps y` turns the
//! problem into `-Lap_y w + a^2 w + p(xi + eps y) w = f(w)` on the
//! y-grid, solved with the unit-eps kernel `1/(|k|^2 + a^2)`. As eps
//! shrinks, the coefficient freezes at `p(xi)` and `w` flattens onto the
//! constant root of `q(xi) w = f(w)`; the report carries the sup
//! deviation from that root together with the frozen-coefficient
//! uniqueness inequality `M1(R) / q(xi) < 1`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::solver::limit::scalar_root;
use crate::solver::{picard_solve, ProblemInstance, SolveMode, SolveReport};

/// Outcome of a rescaled solve at one base point.
#[derive(Debug, Clone)]
pub struct RescaledReport {
    pub solve: SolveReport,
    /// Frozen coefficient `b^2 = q(xi)`.
    pub frozen_q: f64,
    /// Root of the scalar equation `q(xi) w = f(w)`.
    pub constant_root: f64,
    /// `|| w - constant_root ||_sup`.
    pub deviation: f64,
    /// `M1(R) / b^2`; below one the frozen problem has a unique solution.
    pub uniqueness_lhs: f64,
    pub uniqueness_ok: bool,
}

/// Solves the stretched problem around `xi` at scale `eps` and measures
/// the distance to the frozen-coefficient constant root.
pub fn rescaled_solve(
    xi: [f64; 3],
    eps: f64,
    prob: &ProblemInstance,
    tol: f64,
    max_iter: usize,
) -> Result<RescaledReport> {
    let cert = *prob.certificate().ok_or(Error::CertificateRequired)?;
    let mut stretched = prob.with_eps(eps)?.with_mode(SolveMode::Rescaled { xi })?;
    stretched.certify_with_radius(cert.radius)?;

    let zero = ScalarField::constant(stretched.grid(), 0.0);
    let solve = picard_solve(&stretched, &zero, tol, max_iter)?;

    let frozen_q = prob.potential().q_at(&xi)?;
    let constant_root = scalar_root(
        frozen_q,
        prob.potential().a2(),
        prob.nonlin(),
        cert.radius,
    )
    .ok_or_else(|| Error::RootSolveFailure {
        failed: 1,
        total: 1,
        first: 0,
    })?;
    let deviation = solve
        .final_field
        .values()
        .iter()
        .fold(0.0f64, |m, &v| m.max((v - constant_root).abs()));

    let uniqueness_lhs = prob.nonlin().bounds(cert.radius).m1 / frozen_q;
    Ok(RescaledReport {
        solve,
        frozen_q,
        constant_root,
        deviation,
        uniqueness_lhs,
        uniqueness_ok: uniqueness_lhs < 1.0,
    })
}

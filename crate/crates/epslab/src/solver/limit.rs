//! The limiting equation `q(x) u = f(u)`, solved node by node.
//!
//! At each node the scalar fixed-point iteration
//! `u <- (-(q - a^2) u + f(u)) / a^2` is tried first; under the
//! certificate it contracts towards the unique root inside `[-R, R]`.
//! Nodes where it stalls fall back to a bracketed bisection of
//! `q u - f(u)` on `[-R, R]`. Either way the accepted root carries a
//! pointwise residual `|q u - f(u)| <= 1e-12`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::problem::Nonlinearity;
use crate::solver::ProblemInstance;

/// Pointwise residual each accepted root must meet.
pub const NODE_RESIDUAL_TOL: f64 = 1e-12;

const FP_MAX_ITER: usize = 600;
const BRACKET_SCAN: usize = 256;

/// Root of the scalar equation `qv * u = f(u)` inside `[-radius, radius]`.
pub(crate) fn scalar_root(qv: f64, a2: f64, nonlin: &Nonlinearity, radius: f64) -> Option<f64> {
    let residual = |u: f64| -> Option<f64> {
        let (f, _) = nonlin.eval(u).ok()?;
        Some(qv * u - f)
    };

    // contraction pass
    let p = qv - a2;
    let mut u = 0.0;
    for _ in 0..FP_MAX_ITER {
        let (f, _) = match nonlin.eval(u) {
            Ok(v) => v,
            Err(_) => break,
        };
        if (qv * u - f).abs() <= NODE_RESIDUAL_TOL {
            return Some(u);
        }
        let next = (-p * u + f) / a2;
        if !next.is_finite() || next.abs() > 4.0 * radius.max(1.0) {
            break;
        }
        u = next;
    }

    // safeguard: bracketed bisection on [-radius, radius]
    let mut prev_u = -radius;
    let mut prev_g = residual(prev_u)?;
    let mut bracket = None;
    for i in 1..=BRACKET_SCAN {
        let cur_u = -radius + 2.0 * radius * i as f64 / BRACKET_SCAN as f64;
        let cur_g = residual(cur_u)?;
        if prev_g == 0.0 {
            bracket = Some((prev_u, prev_u));
            break;
        }
        if prev_g * cur_g <= 0.0 {
            bracket = Some((prev_u, cur_u));
            break;
        }
        prev_u = cur_u;
        prev_g = cur_g;
    }
    let (mut lo, mut hi) = bracket?;
    for _ in 0..200 {
        if hi - lo < f64::EPSILON * radius {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = residual(mid)?;
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if residual(lo)? * gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    (residual(root)?.abs() <= NODE_RESIDUAL_TOL).then_some(root)
}

/// Solves `q(x) u = f(u)` at every node inside the certified ball.
///
/// Needs a certificate on the instance for the ball radius; the instance
/// mode is irrelevant (only `q` and `f` enter).
pub fn limit_solve(prob: &ProblemInstance) -> Result<ScalarField> {
    let cert = prob.certificate().ok_or(Error::CertificateRequired)?;
    let radius = cert.radius;
    let a2 = prob.potential().a2();
    let q = prob.potential().sample_q(prob.grid())?;

    let mut values = Vec::with_capacity(q.values().len());
    let mut failed = 0usize;
    let mut first = 0usize;
    for (i, &qv) in q.values().iter().enumerate() {
        match scalar_root(qv, a2, prob.nonlin(), radius) {
            Some(u) => values.push(u),
            None => {
                if failed == 0 {
                    first = i;
                }
                failed += 1;
                values.push(f64::NAN);
            }
        }
    }
    if failed > 0 {
        return Err(Error::RootSolveFailure {
            failed,
            total: values.len(),
            first,
        });
    }
    Ok(ScalarField::from_values_unchecked(prob.grid(), values))
}

//! Contraction certificates.
//!
//! The fixed-point operator maps the ball `B_R = { v : ||v|| <= R }` into
//! itself and contracts on it when two scalar inequalities hold:
//!
//! - ball condition:        `(||p|| R + M(R)) / a^2 <= R`
//! - contraction condition: `gamma := (||p|| + M1(R)) / a^2 < 1`
//!
//! Both are plain arithmetic over the potential's sup-norm and the
//! nonlinearity bounds, so a certificate is exact up to round-off. The
//! certificate also drives the a-priori/a-posteriori error bounds of the
//! iteration, with rate `gamma`.

use crate::error::{Error, Result};
use crate::problem::{Nonlinearity, PNorm};

/// Search window and refinement target for [`find_radius`].
const RADIUS_LO: f64 = 1e-3;
const RADIUS_HI: f64 = 1e3;
const RADIUS_GRID_PER_DECADE: usize = 100;
const RADIUS_REL_TOL: f64 = 1e-6;

/// Evaluated ball and contraction conditions at a given radius.
#[derive(Debug, Clone, Copy)]
pub struct ContractionCertificate {
    /// Ball radius `R`.
    pub radius: f64,
    /// Potential floor `a^2`.
    pub a2: f64,
    /// Sup-norm of the shifted potential `p = q - a^2`.
    pub p_norm: f64,
    /// `M(R)`.
    pub m_r: f64,
    /// `M1(R)`.
    pub m1_r: f64,
    /// Contraction factor `(||p|| + M1(R)) / a^2`.
    pub gamma: f64,
    /// Whether the ball condition holds.
    pub ball_ok: bool,
    /// Whether `gamma < 1`.
    pub contraction_ok: bool,
}

impl ContractionCertificate {
    /// Left-hand side of the ball condition.
    pub fn ball_lhs(&self) -> f64 {
        (self.p_norm * self.radius + self.m_r) / self.a2
    }

    /// Both conditions hold: existence, uniqueness, and the iteration
    /// rate `gamma` are guaranteed on `B_R`.
    pub fn certified(&self) -> bool {
        self.ball_ok && self.contraction_ok
    }
}

/// Evaluates both certificate conditions at radius `r`.
///
/// Unbounded potentials cannot use this operator split; they are rejected
/// and must go through the full-Green resolvent path.
pub fn certify(
    a2: f64,
    p_norm: PNorm,
    nonlin: &Nonlinearity,
    r: f64,
) -> Result<ContractionCertificate> {
    let p_norm = match p_norm {
        PNorm::Bounded(v) => v,
        PNorm::Unbounded => return Err(Error::UnboundedPotential),
    };
    if !(a2 > 0.0) || !a2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "a^2 must be positive and finite, got {a2}"
        )));
    }
    if !(p_norm >= 0.0) || !p_norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "||p|| must be finite and nonnegative, got {p_norm}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let bounds = nonlin.bounds(r);
    let gamma = (p_norm + bounds.m1) / a2;
    Ok(ContractionCertificate {
        radius: r,
        a2,
        p_norm,
        m_r: bounds.m,
        m1_r: bounds.m1,
        gamma,
        ball_ok: (p_norm * r + bounds.m) / a2 <= r,
        contraction_ok: gamma < 1.0,
    })
}

/// Smallest radius in `[1e-3, 1e3]` satisfying the ball condition,
/// refined by bisection to `1e-6` relative width, provided the
/// contraction condition also holds there. `None` when no radius
/// qualifies; both bounds are nondecreasing in `R`, so the smallest
/// ball-feasible radius is also the best place for the contraction check.
pub fn find_radius(a2: f64, p_norm: PNorm, nonlin: &Nonlinearity) -> Result<Option<f64>> {
    let ball_holds = |r: f64| -> Result<bool> { Ok(certify(a2, p_norm, nonlin, r)?.ball_ok) };

    let decades = (RADIUS_HI / RADIUS_LO).log10();
    let steps = (decades * RADIUS_GRID_PER_DECADE as f64).ceil() as usize;
    let mut prev = RADIUS_LO;
    let mut hit = None;
    for i in 0..=steps {
        let r = RADIUS_LO * 10f64.powf(decades * i as f64 / steps as f64);
        if ball_holds(r)? {
            hit = Some((if i == 0 { r } else { prev }, r));
            break;
        }
        prev = r;
    }
    let Some((mut lo, mut hi)) = hit else {
        return Ok(None);
    };
    // bisect the transition; `hi` always satisfies the ball condition
    if lo < hi {
        while (hi - lo) / hi > RADIUS_REL_TOL {
            let mid = 0.5 * (lo + hi);
            if ball_holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let cert = certify(a2, p_norm, nonlin, hi)?;
    debug_assert!(cert.ball_ok);
    Ok(if cert.certified() { Some(hi) } else { None })
}

/// Sampled verdict on the limiting-theorem hypotheses for `f(u)/u` on
/// `[u_lo, u_hi]`: monotone growth, growth towards infinity (heuristic:
/// the right endpoint exceeds ten times the left), and
/// `min f(u)/u < a^2`.
#[derive(Debug, Clone, Copy)]
pub struct LimitHypothesesReport {
    pub monotone: bool,
    pub growing: bool,
    pub min_ratio: f64,
    pub min_at: f64,
    pub a2: f64,
    pub min_below_a2: bool,
}

impl LimitHypothesesReport {
    pub fn satisfied(&self) -> bool {
        self.monotone && self.growing && self.min_below_a2
    }
}

/// Samples `u -> f(u)/u` on `[u_lo, u_hi]` and reports the hypothesis
/// checks. Advisory only: a sampled verdict, not a proof.
pub fn check_limit_hypotheses(
    nonlin: &Nonlinearity,
    a2: f64,
    u_lo: f64,
    u_hi: f64,
) -> Result<LimitHypothesesReport> {
    if !(u_lo > 0.0) || !(u_hi > u_lo) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < u_lo < u_hi, got [{u_lo}, {u_hi}]"
        )));
    }
    const SAMPLES: usize = 4096;
    let mut monotone = true;
    let mut min_ratio = f64::INFINITY;
    let mut min_at = u_lo;
    let mut prev = f64::NEG_INFINITY;
    let mut first = 0.0;
    let mut last = 0.0;
    for i in 0..=SAMPLES {
        let u = u_lo + (u_hi - u_lo) * i as f64 / SAMPLES as f64;
        let (f, _) = nonlin.eval(u)?;
        let ratio = f / u;
        if i == 0 {
            first = ratio;
        }
        if i == SAMPLES {
            last = ratio;
        }
        if ratio < prev - 1e-12 * (1.0 + prev.abs()) {
            monotone = false;
        }
        if ratio < min_ratio {
            min_ratio = ratio;
            min_at = u;
        }
        prev = ratio;
    }
    Ok(LimitHypothesesReport {
        monotone,
        growing: last > 10.0 * first,
        min_ratio,
        min_at,
        a2,
        min_below_a2: min_ratio < a2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn certify_shifted_sine_exponential_instance() {
        // a^2 = 16, ||p|| = 2, f = e^u, R = 1
        let cert = certify(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential, 1.0).unwrap();
        assert!(cert.certified());
        assert_relative_eq!(cert.ball_lhs(), (2.0 + E) / 16.0, max_relative = 1e-15);
        assert_relative_eq!(cert.gamma, (2.0 + E * E) / 16.0, max_relative = 1e-15);
        // frozen decimal values
        assert!((cert.ball_lhs() - 0.294892614278690).abs() < 1e-12);
        assert!((cert.gamma - 0.586816006183166).abs() < 1e-12);
    }

    #[test]
    fn certify_rejects_weak_screening() {
        let nl = Nonlinearity::power_shift(2.0).unwrap();
        let cert = certify(4.0, PNorm::Bounded(0.0), &nl, 1.0).unwrap();
        assert!(!cert.certified());
        assert!(cert.ball_ok); // M(1)/4 = 4/4 <= 1 holds
        assert!(!cert.contraction_ok);
        assert_relative_eq!(cert.gamma, 1.5, max_relative = 1e-15);
    }

    #[test]
    fn certify_constant_nonlinearity_has_zero_gamma() {
        let cert = certify(
            9.0,
            PNorm::Bounded(0.0),
            &Nonlinearity::Constant { c: 1.0 },
            1.0,
        )
        .unwrap();
        assert!(cert.certified());
        assert_eq!(cert.gamma, 0.0);
    }

    #[test]
    fn certify_rejects_unbounded_potential() {
        let err = certify(16.0, PNorm::Unbounded, &Nonlinearity::Exponential, 1.0);
        assert!(matches!(err, Err(Error::UnboundedPotential)));
    }

    /// Independent bisection on the ball-condition boundary g(R) = 0.
    fn ball_boundary_root(a2: f64, p_norm: f64, nl: &Nonlinearity, mut lo: f64, mut hi: f64) -> f64 {
        let g = |r: f64| (p_norm * r + nl.bounds(r).m) / a2 - r;
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn find_radius_exponential_instance() {
        // lower root of e^R = 14 R
        let r = find_radius(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential)
            .unwrap()
            .expect("feasible");
        let oracle = ball_boundary_root(16.0, 2.0, &Nonlinearity::Exponential, 0.01, 0.2);
        assert!((r - oracle).abs() / oracle < 2e-6, "r = {r}, oracle = {oracle}");
        // the returned radius passes certify exactly
        let cert = certify(16.0, PNorm::Bounded(2.0), &Nonlinearity::Exponential, r).unwrap();
        assert!(cert.certified());
    }

    #[test]
    fn find_radius_power_shift_instance() {
        // ball boundary for (1+R)^2 <= 9R: lower root (7 - sqrt(45)) / 2
        let nl = Nonlinearity::power_shift(2.0).unwrap();
        let r = find_radius(9.0, PNorm::Bounded(0.0), &nl).unwrap().expect("feasible");
        let exact = (7.0 - 45f64.sqrt()) / 2.0;
        assert!((r - exact).abs() / exact < 2e-6, "r = {r}, exact = {exact}");
        assert!((0.13..=0.2).contains(&r));
        assert!(certify(9.0, PNorm::Bounded(0.0), &nl, r).unwrap().certified());
    }

    #[test]
    fn find_radius_none_when_screening_too_weak() {
        // e^R > R for every R, so the ball condition never holds at a^2 = 1
        let r = find_radius(1.0, PNorm::Bounded(0.0), &Nonlinearity::Exponential).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn limit_hypotheses_power_shift() {
        let nl = Nonlinearity::power_shift(2.0).unwrap();
        let rep = check_limit_hypotheses(&nl, 9.0, 1.0, 100.0).unwrap();
        assert!(rep.monotone);
        assert!(rep.growing);
        // f(u)/u = u + 2 + 1/u has minimum 4 at u = 1 on [1, inf)
        assert_relative_eq!(rep.min_ratio, 4.0, max_relative = 1e-6);
        assert!(rep.min_below_a2);
        assert!(rep.satisfied());
    }

    #[test]
    fn limit_hypotheses_exponential() {
        let rep = check_limit_hypotheses(&Nonlinearity::Exponential, 16.0, 1.0, 30.0).unwrap();
        // e^u / u is increasing past u = 1, minimum e at the left edge
        assert_relative_eq!(rep.min_ratio, E, max_relative = 1e-6);
        assert!(rep.min_below_a2);
        assert!(rep.satisfied());
    }

    #[test]
    fn limit_hypotheses_constant_fails() {
        let rep =
            check_limit_hypotheses(&Nonlinearity::Constant { c: 2.0 }, 9.0, 1.0, 50.0).unwrap();
        assert!(!rep.monotone);
        assert!(!rep.satisfied());
    }

    #[test]
    fn limit_hypotheses_rejects_bad_interval() {
        assert!(check_limit_hypotheses(&Nonlinearity::Exponential, 9.0, 0.0, 1.0).is_err());
        assert!(check_limit_hypotheses(&Nonlinearity::Exponential, 9.0, 2.0, 1.0).is_err());
    }

    proptest! {
        /// Raising a^2 strictly lowers gamma, so it can never flip a
        /// certified result to uncertified.
        #[test]
        fn certification_is_monotone_in_a2(
            a2 in 1.0f64..50.0,
            extra in 0.1f64..50.0,
            p in 0.0f64..5.0,
            r in 0.05f64..2.0,
        ) {
            let nl = Nonlinearity::Exponential;
            let base = certify(a2, PNorm::Bounded(p), &nl, r).unwrap();
            let bigger = certify(a2 + extra, PNorm::Bounded(p), &nl, r).unwrap();
            prop_assert!(bigger.gamma < base.gamma);
            if base.certified() {
                prop_assert!(bigger.certified());
            }
        }
    }
}

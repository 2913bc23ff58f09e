//! Potential and nonlinearity families.
//!
//! A potential is a closed-form (or tabulated) coefficient `q(x)` bounded
//! below by `a^2 > 0`; the shifted part `p := q - a^2 >= 0` is what the
//! fixed-point operator actually consumes. A nonlinearity is a smooth
//! closed-form `f(u)` together with its derivative and the ball bounds
//!
//! - `M(R)  = max_{|u| <= R} |f(u)|`
//! - `M1(R) = max_{|xi| <= 2R} |f'(xi)|`
//!
//! which feed the contraction certificate. Both bounds use closed
//! endpoint formulas where the family is monotone and a dense 1-D scan
//! with local refinement otherwise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};

/// Exponent guard: `exp(u)` for `u > 700` is treated as overflow.
pub const EXP_OVERFLOW_LIMIT: f64 = 700.0;

const SCAN_SAMPLES: usize = 10_000;

/// Sup-norm of the shifted potential `p = q - a^2`, or the marker for
/// potentials that grow without bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    Bounded(f64),
    Unbounded,
}

impl PNorm {
    pub fn bounded(self) -> Option<f64> {
        match self {
            PNorm::Bounded(v) => Some(v),
            PNorm::Unbounded => None,
        }
    }
}

/// Closed-form family of the potential `q`.
#[derive(Debug, Clone)]
pub enum PotentialFamily {
    /// `q = b^2` everywhere.
    Constant { b2: f64 },
    /// `q = a^2 + 1 + sin(omega x1)`.
    ShiftedSine { omega: f64 },
    /// `q = a^2 + c |x|^2`; grows without bound.
    RadialQuadratic { c: f64 },
    /// `q` given per node on a fixed grid.
    Tabulated { field: ScalarField },
}

/// A potential `q(x) >= a^2 > 0` with its lower-bound constant.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    a2: f64,
    family: PotentialFamily,
}

impl PotentialSpec {
    pub fn new(a2: f64, family: PotentialFamily) -> Result<Self> {
        if !(a2 > 0.0) || !a2.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "a^2 must be positive and finite, got {a2}"
            )));
        }
        match &family {
            PotentialFamily::Constant { b2 } => {
                if *b2 < a2 {
                    return Err(Error::InvalidPotential(format!(
                        "constant potential {b2} lies below a^2 = {a2}"
                    )));
                }
            }
            PotentialFamily::ShiftedSine { omega } => {
                if !omega.is_finite() || *omega <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "shifted-sine frequency must be positive, got {omega}"
                    )));
                }
            }
            PotentialFamily::RadialQuadratic { c } => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "radial-quadratic coefficient must be positive, got {c}"
                    )));
                }
            }
            PotentialFamily::Tabulated { field } => {
                let min = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
                if min < a2 {
                    return Err(Error::InvalidPotential(format!(
                        "tabulated potential dips to {min}, below a^2 = {a2}"
                    )));
                }
            }
        }
        Ok(Self { a2, family })
    }

    pub fn constant(a2: f64, b2: f64) -> Result<Self> {
        Self::new(a2, PotentialFamily::Constant { b2 })
    }

    pub fn shifted_sine(a2: f64, omega: f64) -> Result<Self> {
        Self::new(a2, PotentialFamily::ShiftedSine { omega })
    }

    pub fn radial_quadratic(a2: f64, c: f64) -> Result<Self> {
        Self::new(a2, PotentialFamily::RadialQuadratic { c })
    }

    pub fn tabulated(a2: f64, field: ScalarField) -> Result<Self> {
        Self::new(a2, PotentialFamily::Tabulated { field })
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    /// Whether `q` stays bounded on the whole space.
    pub fn is_bounded(&self) -> bool {
        !matches!(self.family, PotentialFamily::RadialQuadratic { .. })
    }

    /// Sup-norm of `p = q - a^2`, exact for the closed forms.
    pub fn p_norm(&self) -> PNorm {
        match &self.family {
            PotentialFamily::Constant { b2 } => PNorm::Bounded(b2 - self.a2),
            PotentialFamily::ShiftedSine { .. } => PNorm::Bounded(2.0),
            PotentialFamily::RadialQuadratic { .. } => PNorm::Unbounded,
            PotentialFamily::Tabulated { field } => {
                let max = field.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                PNorm::Bounded(max - self.a2)
            }
        }
    }

    /// `q` at a point (closed forms only; tabulated potentials are
    /// node-based and rejected here).
    pub fn q_at(&self, x: &[f64; 3]) -> Result<f64> {
        match &self.family {
            PotentialFamily::Constant { b2 } => Ok(*b2),
            PotentialFamily::ShiftedSine { omega } => Ok(self.a2 + 1.0 + (omega * x[0]).sin()),
            PotentialFamily::RadialQuadratic { c } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Ok(self.a2 + c * r2)
            }
            PotentialFamily::Tabulated { .. } => Err(Error::InvalidPotential(
                "tabulated potential has no off-node values".into(),
            )),
        }
    }

    /// Samples `q` at every node of `grid`.
    pub fn sample_q(&self, grid: &Arc<Grid>) -> Result<ScalarField> {
        match &self.family {
            PotentialFamily::Tabulated { field } => {
                if field.grid().spec() != grid.spec() {
                    return Err(Error::GridMismatch);
                }
                Ok(field.clone())
            }
            _ => ScalarField::sample(grid, |x| self.q_at(x).expect("closed form")),
        }
    }

    /// Samples `p = q - a^2` at every node of `grid`.
    pub fn sample_p(&self, grid: &Arc<Grid>) -> Result<ScalarField> {
        let a2 = self.a2;
        Ok(self.sample_q(grid)?.map(|q| q - a2))
    }
}

/// Ball bounds `M(R)` and `M1(R)` of a nonlinearity; may saturate to
/// `+inf` when the family overflows at the requested radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FBounds {
    pub m: f64,
    pub m1: f64,
}

/// Closed-form nonlinearity family providing `f`, `f'`, and ball bounds.
#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// `f = c` (derivative zero).
    Constant { c: f64 },
    /// `f = (u + 1)^m`, `m > 1`.
    PowerShift { m: f64 },
    /// `f = e^u`.
    Exponential,
    /// `f = sum_i coeffs[i] u^i`.
    Polynomial { coeffs: Vec<f64> },
}

impl Nonlinearity {
    pub fn power_shift(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::InvalidNonlinearity(format!(
                "power-shift exponent must exceed 1, got {m}"
            )));
        }
        Ok(Nonlinearity::PowerShift { m })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidNonlinearity(
                "polynomial needs at least one finite coefficient".into(),
            ));
        }
        Ok(Nonlinearity::Polynomial { coeffs })
    }

    /// `(f(u), f'(u))` with overflow guards.
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        if !u.is_finite() {
            return Err(Error::Overflow { u });
        }
        let (f, fp) = match self {
            Nonlinearity::Constant { c } => (*c, 0.0),
            Nonlinearity::PowerShift { m } => {
                let base = u + 1.0;
                (base.powf(*m), m * base.powf(m - 1.0))
            }
            Nonlinearity::Exponential => {
                if u > EXP_OVERFLOW_LIMIT {
                    return Err(Error::Overflow { u });
                }
                let e = u.exp();
                (e, e)
            }
            Nonlinearity::Polynomial { coeffs } => horner(coeffs, u),
        };
        if !f.is_finite() || !fp.is_finite() {
            return Err(Error::Overflow { u });
        }
        Ok((f, fp))
    }

    /// Whether `f(0) != 0` (the hypothesis that keeps the solution away
    /// from zero).
    pub fn nonzero_at_origin(&self) -> bool {
        match self.eval(0.0) {
            Ok((f, _)) => f != 0.0,
            Err(_) => false,
        }
    }

    /// `M(R)` and `M1(R)`; never errors, saturating to `+inf` where the
    /// family overflows.
    pub fn bounds(&self, radius: f64) -> FBounds {
        debug_assert!(radius > 0.0);
        match self {
            Nonlinearity::Constant { c } => FBounds {
                m: c.abs(),
                m1: 0.0,
            },
            Nonlinearity::PowerShift { m } => FBounds {
                // |u+1| <= 1+R on the ball, and m > 1 makes both powers increasing
                m: (1.0 + radius).powf(*m),
                m1: m * (1.0 + 2.0 * radius).powf(m - 1.0),
            },
            Nonlinearity::Exponential => FBounds {
                m: radius.exp(),
                m1: (2.0 * radius).exp(),
            },
            Nonlinearity::Polynomial { coeffs } => {
                let f = |u: f64| horner(coeffs, u).0.abs();
                let fp = |u: f64| horner(coeffs, u).1.abs();
                FBounds {
                    m: scan_max(-radius, radius, f),
                    m1: scan_max(-2.0 * radius, 2.0 * radius, fp),
                }
            }
        }
    }
}

fn horner(coeffs: &[f64], u: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut fp = 0.0;
    for &c in coeffs.iter().rev() {
        fp = fp * u + f;
        f = f * u + c;
    }
    (f, fp)
}

/// Dense scan for `max g` on `[lo, hi]` with a ternary refinement pass
/// around the best sample.
fn scan_max(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    let step = (hi - lo) / SCAN_SAMPLES as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=SCAN_SAMPLES {
        let v = g(lo + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // refine inside the bracketing interval of the winning sample
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) < g(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    best.max(g(0.5 * (a + b)))
}

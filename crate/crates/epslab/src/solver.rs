//! Fixed-point operators and Picard iteration.
//!
//! The problem `-eps^2 Lap u + q u = f(u)` is solved as a fixed point of
//! one of three operators:
//!
//! - split (bounded `q`, periodic grid): `T(u) = G_eps(-p u + f(u))`
//!   with `p = q - a^2` and `G_eps` the spectral Green action,
//! - full (growing `q`, Dirichlet box): `T(u) = A_eps^{-1} f(u)` with the
//!   finite-difference resolvent,
//! - limit (`eps = 0`): the pointwise map `T_0(u) = (-p u + f(u)) / a^2`,
//!   whose fixed points solve the algebraic equation `q(x) u = f(u)`.
//!
//! Under a contraction certificate `(R, gamma)` the iteration stays in
//! the ball `B_R`, contracts at rate `gamma`, and carries computable
//! error bounds; without one the iteration simply reports whether it
//! converged.

mod limit;
mod rescaled;

pub use limit::limit_solve;
pub use rescaled::{rescaled_solve, RescaledReport};

use std::sync::Arc;

use crate::certificate::{certify, ContractionCertificate};
use crate::error::{Error, Result};
use crate::field::{Bc, Grid, ScalarField};
use crate::greens::{KernelParams, ResolventOperator, SpectralGreen};
use crate::problem::{Nonlinearity, PNorm, PotentialSpec};

/// Which fixed-point operator a problem instance uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    /// Spectral split against constant screening; bounded potential on a
    /// periodic grid.
    EpsSplit,
    /// Full resolvent of `-eps^2 Lap + q`; Dirichlet grid, admits
    /// growing potentials.
    EpsFull,
    /// The algebraic limiting operator (no transform involved).
    Limit,
    /// Frozen-coefficient solve in stretched coordinates around `xi`.
    Rescaled { xi: [f64; 3] },
}

/// A grid, a potential, a nonlinearity, a screening scale and a mode,
/// plus an optional contraction certificate.
#[derive(Clone)]
pub struct ProblemInstance {
    grid: Arc<Grid>,
    potential: PotentialSpec,
    nonlin: Nonlinearity,
    eps: f64,
    mode: SolveMode,
    certificate: Option<ContractionCertificate>,
}

impl ProblemInstance {
    /// Validates the mode/grid/potential combination. `eps = 0` selects
    /// the limit operator regardless of mode.
    pub fn new(
        grid: Arc<Grid>,
        potential: PotentialSpec,
        nonlin: Nonlinearity,
        eps: f64,
        mode: SolveMode,
    ) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eps must be nonnegative and finite, got {eps}"
            )));
        }
        match mode {
            SolveMode::EpsSplit | SolveMode::Rescaled { .. } => {
                if !potential.is_bounded() {
                    return Err(Error::UnboundedPotential);
                }
                if grid.bc() != Bc::Periodic {
                    return Err(Error::PeriodicGridRequired);
                }
            }
            SolveMode::EpsFull => {
                if grid.bc() != Bc::Dirichlet {
                    return Err(Error::DirichletGridRequired);
                }
                if eps == 0.0 {
                    return Err(Error::InvalidArgument(
                        "the full resolvent needs eps > 0; use the limit mode".into(),
                    ));
                }
            }
            SolveMode::Limit => {}
        }
        Ok(Self {
            grid,
            potential,
            nonlin,
            eps,
            mode,
            certificate: None,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn nonlin(&self) -> &Nonlinearity {
        &self.nonlin
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    pub fn certificate(&self) -> Option<&ContractionCertificate> {
        self.certificate.as_ref()
    }

    /// Same instance at a different screening scale.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut out = Self::new(
            Arc::clone(&self.grid),
            self.potential.clone(),
            self.nonlin.clone(),
            eps,
            self.mode,
        )?;
        out.certificate = self.certificate;
        Ok(out)
    }

    /// Same instance under a different mode.
    pub fn with_mode(&self, mode: SolveMode) -> Result<Self> {
        let mut out = Self::new(
            Arc::clone(&self.grid),
            self.potential.clone(),
            self.nonlin.clone(),
            self.eps,
            mode,
        )?;
        out.certificate = self.certificate;
        Ok(out)
    }

    /// The potential sup-norm the certificate consumes: the full
    /// resolvent path absorbs `p` into the kernel and certifies against
    /// the mass bound alone.
    fn certificate_p_norm(&self) -> PNorm {
        match self.mode {
            SolveMode::EpsFull => PNorm::Bounded(0.0),
            _ => self.potential.p_norm(),
        }
    }

    /// Evaluates and stores the certificate at radius `r`.
    pub fn certify_with_radius(&mut self, r: f64) -> Result<&ContractionCertificate> {
        let cert = certify(
            self.potential.a2(),
            self.certificate_p_norm(),
            &self.nonlin,
            r,
        )?;
        self.certificate = Some(cert);
        Ok(self.certificate.as_ref().unwrap())
    }

    /// Searches for a feasible radius and stores the certificate when one
    /// exists; `Ok(None)` when no radius qualifies.
    pub fn certify_auto(&mut self) -> Result<Option<&ContractionCertificate>> {
        let found = crate::certificate::find_radius(
            self.potential.a2(),
            self.certificate_p_norm(),
            &self.nonlin,
        )?;
        match found {
            Some(r) => self.certify_with_radius(r).map(Some),
            None => Ok(None),
        }
    }

    /// True when a certificate is present and both conditions hold.
    pub fn is_certified(&self) -> bool {
        self.certificate.map(|c| c.certified()).unwrap_or(false)
    }
}

/// One Picard run: final iterate, successive-difference history, the
/// observed contraction factor, and the certified error bound.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_field: ScalarField,
    pub iterations: usize,
    /// `||u_{n+1} - u_n||` per iteration.
    pub residuals: Vec<f64>,
    /// Largest consecutive-residual ratio (needs at least two residuals).
    pub gamma_observed: Option<f64>,
    /// Certified bound `gamma/(1-gamma) * last residual` on the distance
    /// to the true fixed point.
    pub aposteriori_error: Option<f64>,
    pub converged: bool,
}

/// The concrete operator an instance iterates, assembled once per solve.
enum Step {
    Split { green: SpectralGreen, p: Vec<f64> },
    Limit { p: Vec<f64>, a2: f64 },
    Full { op: ResolventOperator },
}

fn build_step(prob: &ProblemInstance) -> Result<Step> {
    let a = prob.potential.a2().sqrt();
    match prob.mode {
        SolveMode::Limit => build_limit_step(prob),
        SolveMode::EpsSplit if prob.eps == 0.0 => build_limit_step(prob),
        SolveMode::EpsSplit => {
            let p = prob.potential.sample_p(&prob.grid)?.values().to_vec();
            let green = SpectralGreen::new(&prob.grid, KernelParams::new(prob.eps, a)?)?;
            Ok(Step::Split { green, p })
        }
        SolveMode::EpsFull => {
            // run the inner solve well below the outer stopping rule so
            // residual ratios are not solver noise
            let op = ResolventOperator::assemble(&prob.grid, &prob.potential, prob.eps)?
                .with_tolerance(1e-12);
            Ok(Step::Full { op })
        }
        SolveMode::Rescaled { xi } => {
            let a2 = prob.potential.a2();
            let mut p = Vec::with_capacity(prob.grid.num_nodes());
            for flat in 0..prob.grid.num_nodes() {
                let y = prob.grid.node_coords(flat);
                let mut x = xi;
                for d in 0..prob.grid.dims() {
                    x[d] = xi[d] + prob.eps * y[d];
                }
                p.push(prob.potential.q_at(&x)? - a2);
            }
            let green = SpectralGreen::new(&prob.grid, KernelParams::rescaled(a)?)?;
            Ok(Step::Split { green, p })
        }
    }
}

fn build_limit_step(prob: &ProblemInstance) -> Result<Step> {
    let p = prob.potential.sample_p(&prob.grid)?.values().to_vec();
    Ok(Step::Limit {
        p,
        a2: prob.potential.a2(),
    })
}

impl Step {
    fn apply(&self, u: &ScalarField, nonlin: &Nonlinearity) -> Result<ScalarField> {
        match self {
            Step::Split { green, p } => Ok(green.apply(&integrand(u, p, nonlin)?)),
            Step::Limit { p, a2 } => {
                let w = integrand(u, p, nonlin)?;
                Ok(w.map(|v| v / a2))
            }
            Step::Full { op } => {
                let fu = u.try_map(|v| nonlin.eval(v).map(|(f, _)| f))?;
                op.solve(&fu)
            }
        }
    }
}

/// `-p u + f(u)` evaluated per node.
fn integrand(u: &ScalarField, p: &[f64], nonlin: &Nonlinearity) -> Result<ScalarField> {
    let mut values = Vec::with_capacity(p.len());
    for (&ui, &pi) in u.values().iter().zip(p) {
        let (f, _) = nonlin.eval(ui)?;
        values.push(-pi * ui + f);
    }
    Ok(ScalarField::from_values_unchecked(u.grid(), values))
}

/// One application of the eps-dependent split operator
/// `T(u) = G_eps(-p u + f(u))`.
pub fn apply_t_eps(u: &ScalarField, prob: &ProblemInstance) -> Result<ScalarField> {
    match prob.mode {
        SolveMode::EpsSplit | SolveMode::Rescaled { .. } | SolveMode::EpsFull => {
            build_step(prob)?.apply(u, &prob.nonlin)
        }
        SolveMode::Limit => Err(Error::InvalidArgument(
            "the limit mode has no eps-dependent operator".into(),
        )),
    }
}

/// One application of the limiting operator `T_0(u) = (-p u + f(u))/a^2`.
pub fn apply_t0(u: &ScalarField, prob: &ProblemInstance) -> Result<ScalarField> {
    build_limit_step(prob)?.apply(u, &prob.nonlin)
}

/// Picard iteration `u_{n+1} = T(u_n)` from `init`, stopping when the
/// successive sup-norm difference drops to `tol`. Exhausting `max_iter`
/// yields a non-converged report, not an error.
pub fn picard_solve(
    prob: &ProblemInstance,
    init: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if init.grid().spec() != prob.grid.spec() {
        return Err(Error::GridMismatch);
    }
    if let Some(cert) = prob.certificate.filter(|c| c.certified()) {
        if init.sup_norm() > cert.radius {
            return Err(Error::InvalidArgument(format!(
                "initial iterate lies outside the certified ball (norm {} > R = {})",
                init.sup_norm(),
                cert.radius
            )));
        }
    }

    let step = build_step(prob)?;
    let mut u = init.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = step.apply(&u, &prob.nonlin)?;
        let r = next.sup_distance(&u);
        residuals.push(r);
        u = next;
        if r <= tol {
            converged = true;
            break;
        }
    }

    let gamma_observed = if residuals.len() >= 2 {
        Some(
            residuals
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(0.0f64, f64::max),
        )
    } else {
        None
    };
    let aposteriori_error = prob
        .certificate
        .filter(|c| c.certified())
        .zip(residuals.last())
        .map(|(c, r)| c.gamma / (1.0 - c.gamma) * r);

    Ok(SolveReport {
        final_field: u,
        iterations: residuals.len(),
        residuals,
        gamma_observed,
        aposteriori_error,
        converged,
    })
}

/// The computable gap bound `(1/(1-gamma)) ||T_eps(v) - T_0(v)||` at a
/// limiting solution `v`: an upper bound (up to iteration tolerance) on
/// `||u_eps - v||` once the contraction is certified.
pub fn aposteriori_gap(u_limit: &ScalarField, prob: &ProblemInstance) -> Result<f64> {
    let cert = prob.certificate.ok_or(Error::CertificateRequired)?;
    if !cert.certified() {
        return Err(Error::PreconditionViolated(
            "the a-posteriori gap needs a certified contraction".into(),
        ));
    }
    let t_eps = apply_t_eps(u_limit, prob)?;
    let t0 = apply_t0(u_limit, prob)?;
    Ok(t_eps.sup_distance(&t0) / (1.0 - cert.gamma))
}

//! C ABI for the epslab solver library.
//!
//! Conventions:
//! - every fallible call returns an [`EpslabStatus`] and writes results
//!   through out-pointers; `Ok` is zero,
//! - problems and solve reports are opaque handles created by `_new`
//!   calls and released by the matching `_free`,
//! - the last failure message per thread is readable through
//!   [`epslab_last_error_message`] until the next failing call,
//! - no call panics across the boundary.
//!
//! The generated header lives at `include/epslab.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use epslab::certificate::{self, ContractionCertificate};
use epslab::error::Error;
use epslab::field::{Bc, Grid, GridSpec, ScalarField};
use epslab::greens::{kernel_mass_quadrature, yukawa_eval, KernelParams};
use epslab::problem::{Nonlinearity, PNorm, PotentialSpec};
use epslab::solver::{limit_solve, picard_solve, ProblemInstance, SolveMode, SolveReport};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpslabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotCertified = 3,
    NoConvergence = 4,
    NumericFailure = 5,
}

/// Boundary condition of the box.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpslabBc {
    Periodic = 0,
    Dirichlet = 1,
}

/// Potential family; `potential_param` is the constant level b^2, the
/// sine frequency omega, or the quadratic coefficient respectively.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpslabPotential {
    Constant = 0,
    ShiftedSine = 1,
    RadialQuadratic = 2,
}

/// Nonlinearity family; `nonlinearity_param` is the constant value or
/// the power-shift exponent (ignored for the exponential).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpslabNonlinearity {
    Constant = 0,
    PowerShift = 1,
    Exponential = 2,
}

/// Fixed-point operator choice.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpslabMode {
    EpsSplit = 0,
    EpsFull = 1,
    Limit = 2,
}

/// Plain-data mirror of the contraction certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EpslabCertificate {
    pub radius: f64,
    pub a2: f64,
    pub p_norm: f64,
    pub m_r: f64,
    pub m1_r: f64,
    pub gamma: f64,
    pub ball_lhs: f64,
    pub ball_ok: bool,
    pub contraction_ok: bool,
    pub certified: bool,
}

/// Everything needed to build a problem handle. A nonpositive `radius`
/// requests a feasibility search; failing to find one is not an error
/// (check `epslab_problem_certified`).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EpslabProblemConfig {
    pub dims: u32,
    pub n: u32,
    pub length: f64,
    pub bc: EpslabBc,
    pub a2: f64,
    pub potential: EpslabPotential,
    pub potential_param: f64,
    pub nonlinearity: EpslabNonlinearity,
    pub nonlinearity_param: f64,
    pub mode: EpslabMode,
    pub eps: f64,
    pub radius: f64,
}

/// Opaque problem handle.
pub struct EpslabProblem {
    inner: ProblemInstance,
}

/// Opaque solve-report handle.
pub struct EpslabReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EpslabStatus {
    set_error(&err.to_string());
    match err {
        Error::LinearSolveStall { .. } | Error::RootSolveFailure { .. } => {
            EpslabStatus::NoConvergence
        }
        Error::Overflow { .. } | Error::NonFiniteSample { .. } => EpslabStatus::NumericFailure,
        Error::CertificateRequired => EpslabStatus::NotCertified,
        _ => EpslabStatus::InvalidArgument,
    }
}

fn null_pointer() -> EpslabStatus {
    set_error("null pointer argument");
    EpslabStatus::NullPointer
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn epslab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn epslab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Pointwise Yukawa kernel value at radius `r > 0`.
#[no_mangle]
pub extern "C" fn epslab_yukawa_eval(
    eps: f64,
    a: f64,
    rescaled: bool,
    r: f64,
    out: *mut f64,
) -> EpslabStatus {
    if out.is_null() {
        return null_pointer();
    }
    let params = if rescaled {
        KernelParams::rescaled(a)
    } else {
        KernelParams::new(eps, a)
    };
    match params.and_then(|p| yukawa_eval(&p, r)) {
        Ok(v) => {
            unsafe { *out = v };
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Radial quadrature of the kernel mass over `[0, r_max]`; the exact
/// value is `1/a^2`.
#[no_mangle]
pub extern "C" fn epslab_kernel_mass(
    eps: f64,
    a: f64,
    rescaled: bool,
    r_max: f64,
    out: *mut f64,
) -> EpslabStatus {
    if out.is_null() {
        return null_pointer();
    }
    let params = if rescaled {
        KernelParams::rescaled(a)
    } else {
        KernelParams::new(eps, a)
    };
    match params.and_then(|p| kernel_mass_quadrature(&p, r_max)) {
        Ok(q) => {
            unsafe { *out = q.value };
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

fn build_nonlinearity(kind: EpslabNonlinearity, param: f64) -> Result<Nonlinearity, Error> {
    match kind {
        EpslabNonlinearity::Constant => Ok(Nonlinearity::Constant { c: param }),
        EpslabNonlinearity::PowerShift => Nonlinearity::power_shift(param),
        EpslabNonlinearity::Exponential => Ok(Nonlinearity::Exponential),
    }
}

fn fill_certificate(cert: &ContractionCertificate, out: *mut EpslabCertificate) {
    let value = EpslabCertificate {
        radius: cert.radius,
        a2: cert.a2,
        p_norm: cert.p_norm,
        m_r: cert.m_r,
        m1_r: cert.m1_r,
        gamma: cert.gamma,
        ball_lhs: cert.ball_lhs(),
        ball_ok: cert.ball_ok,
        contraction_ok: cert.contraction_ok,
        certified: cert.certified(),
    };
    unsafe { *out = value };
}

/// Evaluates the ball and contraction conditions at radius `r`.
#[no_mangle]
pub extern "C" fn epslab_certify(
    a2: f64,
    p_norm: f64,
    nonlinearity: EpslabNonlinearity,
    nonlinearity_param: f64,
    r: f64,
    out: *mut EpslabCertificate,
) -> EpslabStatus {
    if out.is_null() {
        return null_pointer();
    }
    let result = build_nonlinearity(nonlinearity, nonlinearity_param)
        .and_then(|nl| certificate::certify(a2, PNorm::Bounded(p_norm), &nl, r));
    match result {
        Ok(cert) => {
            fill_certificate(&cert, out);
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Searches `[1e-3, 1e3]` for the smallest certified radius. `out_found`
/// reports whether one exists; `out_radius` is only meaningful then.
#[no_mangle]
pub extern "C" fn epslab_find_radius(
    a2: f64,
    p_norm: f64,
    nonlinearity: EpslabNonlinearity,
    nonlinearity_param: f64,
    out_radius: *mut f64,
    out_found: *mut bool,
) -> EpslabStatus {
    if out_radius.is_null() || out_found.is_null() {
        return null_pointer();
    }
    let result = build_nonlinearity(nonlinearity, nonlinearity_param)
        .and_then(|nl| certificate::find_radius(a2, PNorm::Bounded(p_norm), &nl));
    match result {
        Ok(found) => {
            unsafe {
                *out_found = found.is_some();
                *out_radius = found.unwrap_or(0.0);
            }
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

fn build_problem(config: &EpslabProblemConfig) -> Result<ProblemInstance, Error> {
    let bc = match config.bc {
        EpslabBc::Periodic => Bc::Periodic,
        EpslabBc::Dirichlet => Bc::Dirichlet,
    };
    let grid = Grid::build(GridSpec::new(
        config.dims as usize,
        config.n as usize,
        config.length,
        bc,
    ))?;
    let potential = match config.potential {
        EpslabPotential::Constant => PotentialSpec::constant(config.a2, config.potential_param),
        EpslabPotential::ShiftedSine => {
            PotentialSpec::shifted_sine(config.a2, config.potential_param)
        }
        EpslabPotential::RadialQuadratic => {
            PotentialSpec::radial_quadratic(config.a2, config.potential_param)
        }
    }?;
    let nonlin = build_nonlinearity(config.nonlinearity, config.nonlinearity_param)?;
    let mode = match config.mode {
        EpslabMode::EpsSplit => SolveMode::EpsSplit,
        EpslabMode::EpsFull => SolveMode::EpsFull,
        EpslabMode::Limit => SolveMode::Limit,
    };
    let mut prob = ProblemInstance::new(grid, potential, nonlin, config.eps, mode)?;
    if config.radius > 0.0 {
        prob.certify_with_radius(config.radius)?;
    } else {
        match prob.certify_auto() {
            Ok(_) => {}
            Err(Error::UnboundedPotential) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(prob)
}

/// Builds a problem handle from a config. The caller owns the handle and
/// must release it with `epslab_problem_free`.
#[no_mangle]
pub extern "C" fn epslab_problem_new(
    config: *const EpslabProblemConfig,
    out: *mut *mut EpslabProblem,
) -> EpslabStatus {
    if config.is_null() || out.is_null() {
        return null_pointer();
    }
    let config = unsafe { &*config };
    match build_problem(config) {
        Ok(inner) => {
            let handle = Box::new(EpslabProblem { inner });
            unsafe { *out = Box::into_raw(handle) };
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a problem handle. Null is ignored.
#[no_mangle]
pub extern "C" fn epslab_problem_free(problem: *mut EpslabProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Whether the handle carries a certified contraction.
#[no_mangle]
pub extern "C" fn epslab_problem_certified(
    problem: *const EpslabProblem,
    out: *mut bool,
) -> EpslabStatus {
    if problem.is_null() || out.is_null() {
        return null_pointer();
    }
    let problem = unsafe { &*problem };
    unsafe { *out = problem.inner.is_certified() };
    EpslabStatus::Ok
}

/// Copies the certificate attached to the handle, if any.
#[no_mangle]
pub extern "C" fn epslab_problem_certificate(
    problem: *const EpslabProblem,
    out: *mut EpslabCertificate,
) -> EpslabStatus {
    if problem.is_null() || out.is_null() {
        return null_pointer();
    }
    let problem = unsafe { &*problem };
    match problem.inner.certificate() {
        Some(cert) => {
            fill_certificate(cert, out);
            EpslabStatus::Ok
        }
        None => {
            set_error("no certificate attached to this problem");
            EpslabStatus::NotCertified
        }
    }
}

/// Number of grid nodes (the length of any solution buffer).
#[no_mangle]
pub extern "C" fn epslab_problem_num_nodes(
    problem: *const EpslabProblem,
    out: *mut usize,
) -> EpslabStatus {
    if problem.is_null() || out.is_null() {
        return null_pointer();
    }
    let problem = unsafe { &*problem };
    unsafe { *out = problem.inner.grid().num_nodes() };
    EpslabStatus::Ok
}

/// Runs the Picard iteration from the zero field. A report handle is
/// produced even without convergence; the status says which.
#[no_mangle]
pub extern "C" fn epslab_solve(
    problem: *const EpslabProblem,
    tol: f64,
    max_iter: usize,
    out: *mut *mut EpslabReport,
) -> EpslabStatus {
    if problem.is_null() || out.is_null() {
        return null_pointer();
    }
    let problem = unsafe { &*problem };
    let zero = ScalarField::constant(problem.inner.grid(), 0.0);
    match picard_solve(&problem.inner, &zero, tol, max_iter) {
        Ok(report) => {
            let converged = report.converged;
            let handle = Box::new(EpslabReport { inner: report });
            unsafe { *out = Box::into_raw(handle) };
            if converged {
                EpslabStatus::Ok
            } else {
                set_error("iteration cap reached before the tolerance");
                EpslabStatus::NoConvergence
            }
        }
        Err(e) => status_of(&e),
    }
}

/// Solves the limiting equation `q(x) u = f(u)` node by node (requires a
/// certified handle). The report carries the field with no iteration
/// history.
#[no_mangle]
pub extern "C" fn epslab_solve_limit(
    problem: *const EpslabProblem,
    out: *mut *mut EpslabReport,
) -> EpslabStatus {
    if problem.is_null() || out.is_null() {
        return null_pointer();
    }
    let problem = unsafe { &*problem };
    match limit_solve(&problem.inner) {
        Ok(field) => {
            let report = SolveReport {
                final_field: field,
                iterations: 0,
                residuals: Vec::new(),
                gamma_observed: None,
                aposteriori_error: None,
                converged: true,
            };
            let handle = Box::new(EpslabReport { inner: report });
            unsafe { *out = Box::into_raw(handle) };
            EpslabStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a report handle. Null is ignored.
#[no_mangle]
pub extern "C" fn epslab_report_free(report: *mut EpslabReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

#[no_mangle]
pub extern "C" fn epslab_report_converged(
    report: *const EpslabReport,
    out: *mut bool,
) -> EpslabStatus {
    if report.is_null() || out.is_null() {
        return null_pointer();
    }
    unsafe { *out = (*report).inner.converged };
    EpslabStatus::Ok
}

#[no_mangle]
pub extern "C" fn epslab_report_iterations(
    report: *const EpslabReport,
    out: *mut usize,
) -> EpslabStatus {
    if report.is_null() || out.is_null() {
        return null_pointer();
    }
    unsafe { *out = (*report).inner.iterations };
    EpslabStatus::Ok
}

/// Successive-difference norm of iteration `index` (zero-based).
#[no_mangle]
pub extern "C" fn epslab_report_residual(
    report: *const EpslabReport,
    index: usize,
    out: *mut f64,
) -> EpslabStatus {
    if report.is_null() || out.is_null() {
        return null_pointer();
    }
    let report = unsafe { &*report };
    match report.inner.residuals.get(index) {
        Some(&r) => {
            unsafe { *out = r };
            EpslabStatus::Ok
        }
        None => {
            set_error("residual index out of range");
            EpslabStatus::InvalidArgument
        }
    }
}

/// Largest observed consecutive-residual ratio. `out_present` is false
/// when fewer than two residuals were recorded.
#[no_mangle]
pub extern "C" fn epslab_report_gamma_observed(
    report: *const EpslabReport,
    out_present: *mut bool,
    out_value: *mut f64,
) -> EpslabStatus {
    if report.is_null() || out_present.is_null() || out_value.is_null() {
        return null_pointer();
    }
    let report = unsafe { &*report };
    unsafe {
        *out_present = report.inner.gamma_observed.is_some();
        *out_value = report.inner.gamma_observed.unwrap_or(0.0);
    }
    EpslabStatus::Ok
}

/// Certified bound on the distance to the true fixed point, when the
/// problem carried a certificate.
#[no_mangle]
pub extern "C" fn epslab_report_error_bound(
    report: *const EpslabReport,
    out_present: *mut bool,
    out_value: *mut f64,
) -> EpslabStatus {
    if report.is_null() || out_present.is_null() || out_value.is_null() {
        return null_pointer();
    }
    let report = unsafe { &*report };
    unsafe {
        *out_present = report.inner.aposteriori_error.is_some();
        *out_value = report.inner.aposteriori_error.unwrap_or(0.0);
    }
    EpslabStatus::Ok
}

#[no_mangle]
pub extern "C" fn epslab_report_sup_norm(
    report: *const EpslabReport,
    out: *mut f64,
) -> EpslabStatus {
    if report.is_null() || out.is_null() {
        return null_pointer();
    }
    unsafe { *out = (*report).inner.final_field.sup_norm() };
    EpslabStatus::Ok
}

/// Number of values in the solution field.
#[no_mangle]
pub extern "C" fn epslab_report_solution_len(
    report: *const EpslabReport,
    out: *mut usize,
) -> EpslabStatus {
    if report.is_null() || out.is_null() {
        return null_pointer();
    }
    unsafe { *out = (*report).inner.final_field.values().len() };
    EpslabStatus::Ok
}

/// Copies the solution values (x-fastest node order) into `buffer`,
/// which must hold exactly `len` doubles.
#[no_mangle]
pub extern "C" fn epslab_report_copy_solution(
    report: *const EpslabReport,
    buffer: *mut f64,
    len: usize,
) -> EpslabStatus {
    if report.is_null() || buffer.is_null() {
        return null_pointer();
    }
    let report = unsafe { &*report };
    let values = report.inner.final_field.values();
    if values.len() != len {
        set_error("solution buffer length mismatch");
        return EpslabStatus::InvalidArgument;
    }
    unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, len) };
    EpslabStatus::Ok
}

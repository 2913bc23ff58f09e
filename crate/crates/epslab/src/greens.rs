//! Green's-function machinery.
//!
//! Three realizations of the screened inverse `(-eps^2 Lap + q)^{-1}`:
//!
//! - [`kernel`]: the explicit radial Yukawa kernel for constant `q = a^2`
//!   on free space, with its mass identity `integral g = 1/a^2`,
//! - [`spectral`]: the exact Fourier multiplier `1/(eps^2 |k|^2 + a^2)`
//!   on a periodic grid (bounded-potential path),
//! - [`resolvent`]: a symmetric finite-difference resolvent on a
//!   Dirichlet box for potentials that grow at infinity, carrying the
//!   discrete maximum principle.

pub mod kernel;
pub mod resolvent;
pub mod spectral;

pub use kernel::{kernel_mass_quadrature, yukawa_eval, KernelParams, MassQuadrature};
pub use resolvent::{
    distributional_limit_check, green_comparison_check, mass_bound_check, DistributionalLimit,
    GreenComparison, MassBound, ResolventOperator,
};
pub use spectral::{delta_limit_check, green_apply_spectral, LimitErrorRow, SpectralGreen};

/// Absolute tolerance for ordering and positivity checks: above linear-solve
/// residuals, far below physical scales.
pub const ORDER_TOL: f64 = 1e-8;

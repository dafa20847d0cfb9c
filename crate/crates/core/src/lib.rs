//! Carleman-type kernel for the Laplace operator in a band `0 <= y2 <= h`,
//! `h = pi / rho`, and the boundary-integral machinery built on it.
//!
//! The kernel `Phi(y, x)` behaves like the logarithmic fundamental solution
//! `-(1/2pi) ln|y - x|` near `x`, is harmonic in `y` elsewhere, and decays
//! double-exponentially along the band. That decay lets boundary integrals
//! against Neumann data growing like `exp(c|y|)` converge, so a harmonic
//! function vanishing on the boundary can be rebuilt from its normal
//! derivative alone.
//!
//! Module map:
//!
//! * [`kernel`]: `K(omega)`, the `Phi` integrand in two algebraic forms,
//!   `Phi`, its `y`-gradient and the decay bound.
//! * [`quadrature`]: adaptive Gauss-Kronrod engines, the closed-form inner
//!   integral and the truncation radius.
//! * [`domain`]: band domains bounded by two graph curves.
//! * [`analytic`]: exact harmonic test functions.
//! * [`representation`]: reconstruction from Neumann data, the full Green
//!   identity, growth certificates and decay-ratio reports.
//! * [`verify`]: invariant suites shared by the CLI `verify` command.

pub mod analytic;
pub mod domain;
mod error;
pub mod interp;
pub mod kernel;
pub mod quadrature;
pub mod representation;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{KernelParams, Point2};
pub use quadrature::{CutoffPolicy, IntegralResult, QuadratureConfig};

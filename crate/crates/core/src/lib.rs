//! Potential theory of the rank-one Dunkl Laplacian on the unit ball.
//!
//! The crate evaluates the Newton kernel `N_k`, the Green function `G_k` of
//! the unit ball and the Poisson kernel `P_k` for the reflection group
//! `{id, σ}` acting on `R^d` by `σ(x_1, x_2, ..., x_d) = (-x_1, x_2, ..., x_d)`,
//! and ships the numerical machinery used to check the identities and
//! two-sided estimates these kernels satisfy:
//!
//! * [`params`]: the pair `(d, k)`, normalization constants and the geometry
//!   of the reflection.
//! * [`quadrature`]: Gauss–Jacobi rules, the adaptive Jacobi-weighted
//!   integrator, weighted sphere and ball rules.
//! * [`kernels`]: `N_k`, two independent `G_k` evaluators, `P_k`, the `k = 1,
//!   d = 2` closed forms, W-invariant and Dyson variants.
//! * [`operator`]: the Dunkl Laplacian by finite differences, the Kelvin
//!   transform and a catalog of harmonic test functions.
//! * [`estimates`]: envelope functions of the two-sided bounds and ratio scans.
//! * [`potential`]: Poisson integrals, Poisson–Jensen, the `F`/`F_ε`
//!   remainders and Hardy–Stein checks.
//! * [`report`]: CSV rendering of scan and residual reports.
//! * [`verify`]: named verification suites built on the modules above.

pub mod error;
pub mod estimates;
pub mod kernels;
pub mod operator;
pub mod params;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::KernelKind;
pub use params::{ExtendedValue, Params, Point};

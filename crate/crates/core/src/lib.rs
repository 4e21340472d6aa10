//! Numerical laboratory for the Hermitian random matrix model with an
//! equi-spaced external source.
//!
//! The eigenvalues of that model form a biorthogonal ensemble with
//! interactions `|x_j - x_i|` and `|e^{x_j} - e^{x_i}|` under the varying weight
//! `e^{-nV(x)}`. The crate is organised bottom-up:
//!
//! * [`mpnum`]: configurable-precision arithmetic, quadrature, root finding,
//!   dense factorizations and the Airy function;
//! * [`equilibrium`]: the constrained equilibrium measure `μ_t` of the
//!   two-interaction energy, its endpoints, density, edge constants,
//!   g-functions, conjugation function `F_t` and Lagrange constant;
//! * [`biortho`]: the monic biorthogonal families `p_j`, `q_j` built from the
//!   bimoment matrix, with norming constants and zeros;
//! * [`kernel`]: the correlation kernel, its bulk/edge rescalings compared
//!   against the sine and Airy kernels, and the truncated-exponential
//!   decomposition diagnostics.

pub mod biortho;
pub mod equilibrium;
pub mod kernel;
pub mod mpnum;

pub use mpnum::{MpError, PrecisionContext};

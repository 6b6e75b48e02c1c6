//! Numerical laboratory for the Müntz (co-Poisson) operator
//!
//! `Pf(x) = Σ_{n≥1} f(nx) − (1/x)∫₀^∞ f(t) dt`
//!
//! and the Hilbert-space approximation problem built on it: how close the
//! span of the integer dilations of `Pf` comes to `f` in `L²(0, ∞)`.
//!
//! The crate is `no_std` and only needs `alloc`. Modules:
//!
//! * [`numerics`]: adaptive Gauss–Kronrod quadrature, semi-infinite
//!   integrals with analytic tails, accelerated alternating series.
//! * [`kernels`]: compactly supported piecewise-polynomial kernels, the
//!   special functions `χ`, `ρ`, `ρ₁`, and kernel validation.
//! * [`muntz`]: the operator `P` by direct series and by convolution with
//!   `ρ₁`, the operator `T_F`, inequality checks and autocorrelations.
//! * [`mellin`]: closed-form and quadrature Mellin transforms, `ζ` on the
//!   critical strip, Müntz-formula residuals and Mellin zero scans.
//! * [`approx`]: Gram systems of dilation families and distances.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
mod error;
pub mod kernels;
pub mod linalg;
pub mod mellin;
pub mod muntz;
pub mod numerics;
pub mod poly;

pub use error::{Error, Result};
pub use kernels::{KernelLike, KernelValidationReport, PiecewiseKernel, SpecialFunction};
pub use mellin::ComplexPoint;
pub use numerics::{IntegrationResult, QuadratureConfig};
pub use num_complex::Complex64;

//! Numerical verification library for a concentrating-bubble energy
//! expansion on a curved half-space model domain.
//!
//! The library is organised bottom-up:
//!
//! * [`quad`], [`special`], [`fd`], [`fit`], [`roots`], [`mc`]: generic
//!   numerics (adaptive Gauss-Kronrod quadrature, Gamma function, finite
//!   differences, least-squares fits, bracketed root finding, seeded
//!   Monte Carlo).
//! * [`params`], [`constants`]: problem parameters, closed-form radial
//!   moments and bubble norms with independent quadrature cross-checks.
//! * [`bubble`]: the explicit half-space bubble, its derivatives, the
//!   kernel elements of the linearized problem, and pointwise residuals.
//! * [`domain`]: the curved model domain (quadratic boundary graph),
//!   smooth cutoff, and region membership.
//! * [`energy`]: the five-block energy of the truncated bubble on the
//!   model domain, its small-delta expansion, slab corrections, and the
//!   residual norms of the approximate solution.
//! * [`reduction`]: the aggregated first-order constant, its root and
//!   asymptotics, and the reduced finite-dimensional energy with its
//!   critical point solver.

// Embedded tables keep their full generated precision even where it exceeds
// the f64 round-trip length, and !(x > 0.0) style validation is deliberate:
// it rejects NaN along with the out-of-range values.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod constants;
pub mod domain;
pub mod energy;
pub mod error;
pub mod fd;
pub mod fit;
pub mod mc;
pub mod params;
pub mod quad;
pub mod reduction;
pub mod roots;
pub mod special;

pub use error::{Error, Result};

//! Numerical laboratory relating the sign of Ricci curvature to convexity of
//! orbit-volume functionals.
//!
//! Two settings are covered:
//!
//! * toric Kähler potentials `F` on the orbit space `R^n` of `(C*)^n / T^n`
//!   (log-holomorphic coordinates), where the torus orbit volume is
//!   `sqrt(det Hess F)` up to a constant and the Ricci form is
//!   `-Hess log det Hess F`;
//! * the PU(2) group compactification `CP^3 = P(gl(2, C))` with its
//!   Fubini–Study metric, where right SU(2)-orbits are totally real and the
//!   J-volume and Riemannian volume of each orbit are computed by Haar
//!   quadrature.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexity;
pub mod defaults;
pub mod error;
pub mod fd;
pub mod optimizer;
pub mod potential;
pub mod region;
pub mod su2;
pub mod toric;

pub mod cli;

pub use error::{Error, Result};
pub use potential::ToricPotential;
pub use region::GridRegion;

//! Bernstein-polynomial approximation of fractional derivatives and
//! integrals on [0, 1], and a Bernstein collocation solver for fractional
//! ordinary differential equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: log-gamma, Mittag-Leffler series, Gauss–Jacobi rules.
//! - [`poly`]: Bernstein polynomials, de Casteljau evaluation, derivatives
//!   and monomial expansions.
//! - [`frac_ops`]: left/right Riemann–Liouville and Caputo derivatives and
//!   Riemann–Liouville integrals of Bernstein polynomials, with a closed-form
//!   and a quadrature backend.
//! - [`oracles`]: analytic reference values.
//! - [`fode`]: the collocation solver.
//! - [`harness`]: grid errors, EOC and table/CSV generation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fode;
pub mod frac_ops;
pub mod harness;
pub mod oracles;
pub mod poly;
pub mod precision;
pub mod special;

pub use error::{Error, Result};
pub use fode::{AnsatzSolution, FodeProblem, NodeStrategy};
pub use frac_ops::{Backend, FracOrder, OperatorKind, OperatorSpec, Side};
pub use poly::{Basis, BernsteinPoly, MonomialExpansion};
pub use precision::{PrecisionMode, Tolerances, TOLERANCES};

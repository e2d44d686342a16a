//! Numerical laboratory for sublinear expectations with mean uncertainty.
//!
//! The crate is organised around four pieces:
//!
//! * [`scenario`]: sublinear expectations realised as the upper envelope of a
//!   finite family of discrete laws, nested (sequentially independent) evaluation by
//!   backward recursion, and a brute-force adapted-policy oracle.
//! * [`gfunction`]: the sublinear generator `G(p, a)` over a mean/variance
//!   uncertainty rectangle.
//! * [`gheat`]: a monotone explicit finite-difference solver for the
//!   G-heat equation `∂ₜv = G(∂ₓv, ∂²ₓₓv)`, plus a Gauss–Hermite oracle.
//! * [`clt`]: sequence builders, hypothesis checkers and the convergence
//!   runner comparing `Ê[φ(Sₙ/√n + Tₙ/n)]` with the PDE value.
//!
//! With the default `parallel` feature the inner loops (grid layers, policy
//! enumeration, property campaigns, schedule rows) run on rayon. Without it
//! they fall back to plain sequential iteration; results are bit-identical
//! either way because every node is computed independently with a fixed
//! summation order.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clt;
pub mod error;
pub mod gfunction;
pub mod gheat;
pub mod par;
pub mod scenario;
pub mod suites;

pub use error::{Error, Result};
pub use gfunction::GParams;
pub use scenario::{DiscreteDistribution, ScenarioSet, TestFunction};

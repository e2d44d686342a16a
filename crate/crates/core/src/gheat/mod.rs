//! Monotone explicit solver for the one-dimensional G-heat equation
//!
//! ```text
//! ∂ₜv = G(∂ₓv, ∂²ₓₓv),   v(0, ·) = φ,
//! ```
//!
//! whose solution is `v(t, x) = Ê[φ(x + √t·ξ + t·ζ)]`. The terminal-value
//! form `∂ₜV + G(∂ₓV, ∂²ₓₓV) = 0, V(T, ·) = φ` is the time reversal
//! `V(t, x) = v(T - t, x)` of the same evolution and is not coded separately.

mod config;
mod quadrature;
mod solver;

pub use config::{Boundary, SolverConfig};
pub use quadrature::classical_oracle;
pub use solver::{semigroup_check, solve, solve_from, value_at, ValueFunction};

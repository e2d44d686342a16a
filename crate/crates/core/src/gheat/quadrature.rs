use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};
use crate::scenario::TestFunction;

/// `E[φ(σ√t·Z + q·t)]` for standard normal `Z`, by Gauss–Hermite quadrature.
///
/// Independent of the finite-difference path; used to check point-interval
/// (classical) runs of the solver.
pub fn classical_oracle(
    sigma: f64,
    q: f64,
    t: f64,
    phi: &TestFunction,
    quad_nodes: usize,
) -> Result<f64> {
    if !(sigma > 0.0) || t < 0.0 || quad_nodes < 8 {
        return Err(Error::InvalidParams(format!(
            "need sigma > 0, t ≥ 0 and at least 8 nodes (sigma = {sigma}, t = {t}, nodes = {quad_nodes})"
        )));
    }
    let rule = GaussHermite::new(NonZeroUsize::new(quad_nodes).expect("checked above"));
    // ∫ e^{-u²} f(u) du with Z = √2·u.
    let scale = sigma * t.sqrt() * std::f64::consts::SQRT_2;
    let integral = rule.integrate(|u| phi.eval1(scale * u + q * t));
    Ok(integral / std::f64::consts::PI.sqrt())
}

use serde::Serialize;

use super::model::{even_grid, SequenceModel};
use crate::error::{Error, Result};
use crate::scenario::{expect_with, ScenarioSet};

/// Computational certificate of the central-limit hypotheses on a finite prefix.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub family_label: String,
    /// Per step: `(Ê[Xᵢ], -Ê[-Xᵢ])`.
    pub mean_residuals: Vec<(f64, f64)>,
    /// `M = maxᵢ max(Ê[|Xᵢ|³], Ê[|Yᵢ|³])`.
    pub third_moment_bound: f64,
    /// `dᵢ = Ê[|Xᵢ² - ξ̂ᵢ²|²]` against the coupled reference.
    pub x_proxy: Vec<f64>,
    /// `Ê[|Yᵢ - ζ̂ᵢ|²]` against the coupled reference.
    pub y_proxy: Vec<f64>,
    /// Running averages `(1/n) Σ_{i ≤ n} dᵢ`.
    pub cesaro_x: Vec<f64>,
    pub cesaro_y: Vec<f64>,
    pub beta: f64,
}

impl ConditionReport {
    /// Largest absolute mean residual over all steps.
    pub fn max_mean_residual(&self) -> f64 {
        self.mean_residuals
            .iter()
            .map(|(u, l)| u.abs().max(l.abs()))
            .fold(0.0, f64::max)
    }

    pub fn means_vanish(&self, tol: f64) -> bool {
        self.max_mean_residual() <= tol
    }

    /// Cesàro average of the X proxy after `n` steps.
    pub fn cesaro_x_at(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.cesaro_x.get(i).copied())
    }
}

fn running_mean(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

fn nearest(grid: &[f64], v: f64) -> f64 {
    grid.iter()
        .copied()
        .min_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()))
        .unwrap_or(v)
}

/// Coupled proxies of one step: `max_θ Σ w (x² - x̂²)²` and `max_θ Σ w (y - ŷ)²`,
/// pairing atoms by position within the same scenario.
fn coupled_proxies(
    step: &ScenarioSet,
    reference: impl Fn(usize, usize) -> (f64, f64),
) -> (f64, f64) {
    let mut dx = f64::NEG_INFINITY;
    let mut dy = f64::NEG_INFINITY;
    for (theta, d) in step.dists().iter().enumerate() {
        let (mut sx, mut sy) = (0.0, 0.0);
        for (k, (p, w)) in d.atoms().enumerate() {
            let (xr, yr) = reference(theta, k);
            sx += w * (p[0] * p[0] - xr * xr).powi(2);
            sy += w * (p[1] - yr).powi(2);
        }
        dx = dx.max(sx);
        dy = dy.max(sy);
    }
    (dx, dy)
}

/// Checks mean-zero and third-moment bounds, the coupled condition-(iii)
/// proxies and the ellipticity modulus.
///
/// The coupled reference `(ξ̂ᵢ, ζ̂ᵢ)` is the one recorded by the builders.
/// Models without one (e.g. loaded from JSON) are coupled comonotonically to
/// a quantisation of the limit: `|x|` snapped to `quant_levels` even points of
/// `[σ̲, σ̄]` with the sign kept, and `y` snapped to `quant_levels` points of
/// `[μ̲, μ̄]`.
pub fn check_conditions(model: &SequenceModel, quant_levels: usize) -> Result<ConditionReport> {
    if quant_levels < 2 {
        return Err(Error::InvalidParams(format!(
            "quant_levels must be at least 2, got {quant_levels}"
        )));
    }
    let gp = model.gp();
    let sigma_grid = even_grid(gp.sig2_lo().sqrt(), gp.sigma_hi(), quant_levels);
    let mean_grid = even_grid(gp.mu_lo(), gp.mu_hi(), quant_levels);

    let mut mean_residuals = Vec::with_capacity(model.len());
    let mut third_moment_bound: f64 = 0.0;
    let mut x_proxy = Vec::with_capacity(model.len());
    let mut y_proxy = Vec::with_capacity(model.len());
    for (i, step) in model.steps().iter().enumerate() {
        mean_residuals.push((expect_with(step, |p| p[0]), -expect_with(step, |p| -p[0])));
        third_moment_bound = third_moment_bound
            .max(expect_with(step, |p| p[0].abs().powi(3)))
            .max(expect_with(step, |p| p[1].abs().powi(3)));

        let (dx, dy) = match model.reference() {
            Some(refs) => {
                let r = &refs[i];
                coupled_proxies(step, |theta, k| {
                    let q = r.dists()[theta].point(k);
                    (q[0], q[1])
                })
            }
            None => coupled_proxies(step, |theta, k| {
                let p = step.dists()[theta].point(k);
                let mag = nearest(&sigma_grid, p[0].abs());
                (mag.copysign(p[0]), nearest(&mean_grid, p[1]))
            }),
        };
        x_proxy.push(dx);
        y_proxy.push(dy);
    }
    Ok(ConditionReport {
        family_label: model.family_label().to_string(),
        mean_residuals,
        third_moment_bound,
        cesaro_x: running_mean(&x_proxy),
        cesaro_y: running_mean(&y_proxy),
        x_proxy,
        y_proxy,
        beta: gp.beta(),
    })
}

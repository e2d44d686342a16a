use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunction::GParams;
use crate::scenario::{DiscreteDistribution, ScenarioSet};

/// Per-step scenario sets for `(Xᵢ, Yᵢ)` plus the limit pair `(ξ, ζ)`.
///
/// Coordinate 0 of every atom is `Xᵢ`, coordinate 1 is `Yᵢ`. Builders also
/// record a coupled reference per step (same scenario and atom layout, with
/// the unperturbed magnitudes) that the condition checker uses as `(ξ̂ᵢ, ζ̂ᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceModel {
    steps: Vec<ScenarioSet>,
    reference: Option<Vec<ScenarioSet>>,
    gp: GParams,
    family_label: String,
}

impl SequenceModel {
    pub fn new(
        steps: Vec<ScenarioSet>,
        gp: GParams,
        family_label: impl Into<String>,
    ) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidParams(
                "sequence model needs at least one step".into(),
            ));
        }
        if let Some((index, s)) = steps.iter().enumerate().find(|(_, s)| s.dim() != 2) {
            return Err(Error::DimensionMismatch {
                index,
                expected: 2,
                found: s.dim(),
            });
        }
        Ok(Self {
            steps,
            reference: None,
            gp,
            family_label: family_label.into(),
        })
    }

    /// Attaches a coupled reference; its layout must mirror the steps.
    pub fn with_reference(mut self, reference: Vec<ScenarioSet>) -> Result<Self> {
        if reference.len() != self.steps.len() {
            return Err(Error::InvalidParams(format!(
                "reference has {} steps, model has {}",
                reference.len(),
                self.steps.len()
            )));
        }
        for (i, (s, r)) in self.steps.iter().zip(&reference).enumerate() {
            let same = s.len() == r.len()
                && s.dists()
                    .iter()
                    .zip(r.dists())
                    .all(|(a, b)| a.len() == b.len());
            if !same {
                return Err(Error::InvalidParams(format!(
                    "reference step {i} does not mirror the scenario layout"
                )));
            }
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn steps(&self) -> &[ScenarioSet] {
        &self.steps
    }

    pub fn reference(&self) -> Option<&[ScenarioSet]> {
        self.reference.as_deref()
    }

    pub fn gp(&self) -> &GParams {
        &self.gp
    }

    pub fn family_label(&self) -> &str {
        &self.family_label
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The first `n` steps; `1 ≤ n ≤ len`.
    pub fn prefix(&self, n: usize) -> Result<&[ScenarioSet]> {
        if n == 0 || n > self.steps.len() {
            return Err(Error::InvalidParams(format!(
                "n = {n} outside 1..={} steps of `{}`",
                self.steps.len(),
                self.family_label
            )));
        }
        Ok(&self.steps[..n])
    }

    /// Same model with the steps replaced (reference dropped).
    pub fn with_steps(&self, steps: Vec<ScenarioSet>) -> Result<Self> {
        Self::new(steps, self.gp, self.family_label.clone())
    }

    /// Drops scenario `index` of step `step`, if that step has more than one.
    pub fn without_scenario(&self, step: usize, index: usize) -> Option<Self> {
        let mut steps = self.steps.clone();
        steps[step] = steps[step].without(index)?;
        Some(Self {
            steps,
            reference: None,
            gp: self.gp,
            family_label: format!("{}-minus-{step}.{index}", self.family_label),
        })
    }
}

/// `k` evenly spaced points on `[lo, hi]`; a single point sits at the midpoint.
pub fn even_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..k)
            .map(|i| {
                if i == k - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

/// i.i.d. baseline: every step is the product family of symmetric two-point
/// laws `±σ` (σ on an even grid of `[σ̲, σ̄]`) and point masses at an even
/// grid of `[μ̲, μ̄]`.
pub fn build_iid_family(
    gp: &GParams,
    sigma_levels: usize,
    mean_levels: usize,
    n_max: usize,
) -> Result<SequenceModel> {
    if sigma_levels == 0 || mean_levels == 0 || n_max == 0 {
        return Err(Error::InvalidParams(
            "sigma_levels, mean_levels and n_max must be at least 1".into(),
        ));
    }
    let mut sigmas = even_grid(gp.sig2_lo().sqrt(), gp.sigma_hi(), sigma_levels);
    let mut means = even_grid(gp.mu_lo(), gp.mu_hi(), mean_levels);
    sigmas.dedup();
    means.dedup();
    let dists = sigmas
        .iter()
        .flat_map(|&s| means.iter().map(move |&m| (s, m)))
        .map(|(s, m)| DiscreteDistribution::from_2d(&[(-s, m, 0.5), (s, m, 0.5)]))
        .collect::<Result<Vec<_>>>()?;
    let step = ScenarioSet::new(format!("iid σ×{} μ×{}", sigmas.len(), means.len()), dists)?;
    let steps = vec![step; n_max];
    SequenceModel::new(steps.clone(), *gp, "iid")?.with_reference(steps)
}

/// Non-identically distributed variant of `base`: step `i` (1-based) has its
/// X-atoms scaled by `1 + εᵢ` and its Y-atoms shifted by `(-1)^i·εᵢ`.
///
/// Requires `|εᵢ| ≤ ¼` and one `ε` per base step.
pub fn build_perturbed_family(base: &SequenceModel, eps: &[f64]) -> Result<SequenceModel> {
    if eps.len() != base.len() {
        return Err(Error::InvalidParams(format!(
            "got {} perturbations for {} steps",
            eps.len(),
            base.len()
        )));
    }
    if let Some((i, e)) = eps.iter().enumerate().find(|(_, e)| !(e.abs() <= 0.25)) {
        return Err(Error::InvalidParams(format!(
            "perturbation {} = {e} exceeds 1/4 in magnitude",
            i + 1
        )));
    }
    let steps = base
        .steps()
        .iter()
        .zip(eps)
        .enumerate()
        .map(|(i, (step, &e))| {
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let dists = step
                .dists()
                .iter()
                .map(|d| d.map_points(|p| vec![p[0] * (1.0 + e), p[1] + sign * e]))
                .collect::<Result<Vec<_>>>()?;
            ScenarioSet::new(format!("{} ε={e}", step.label()), dists)
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = base
        .reference()
        .map(<[ScenarioSet]>::to_vec)
        .unwrap_or_else(|| base.steps().to_vec());
    SequenceModel::new(
        steps,
        *base.gp(),
        format!("{}+perturbed", base.family_label()),
    )?
    .with_reference(reference)
}

/// Perturbation schedules `εᵢ`, `i = 1, 2, …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsRule {
    Zero,
    /// `εᵢ = sᵢ / (i + offset)` with `sᵢ = (-1)^i` if `alternating`, else 1.
    Harmonic {
        offset: f64,
        #[serde(default)]
        alternating: bool,
    },
}

impl EpsRule {
    pub fn eps(&self, i: usize) -> f64 {
        match *self {
            EpsRule::Zero => 0.0,
            EpsRule::Harmonic {
                offset,
                alternating,
            } => {
                let sign = if alternating && i % 2 == 1 { -1.0 } else { 1.0 };
                sign / (i as f64 + offset)
            }
        }
    }

    pub fn sequence(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.eps(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{expect_with, lower_expect, TestFunction};

    fn ambiguous() -> GParams {
        GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap()
    }

    #[test]
    fn grid_points() {
        assert_eq!(even_grid(1.0, 2.0, 2), vec![1.0, 2.0]);
        assert_eq!(even_grid(-0.5, 0.5, 1), vec![0.0]);
        assert_eq!(even_grid(0.0, 1.0, 5)[2], 0.5);
    }

    #[test]
    fn classical_rademacher() {
        let gp = GParams::degenerate(0.0, 1.0).unwrap();
        let m = build_iid_family(&gp, 1, 1, 3).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.steps()[0].len(), 1);
        let d = &m.steps()[0].dists()[0];
        assert_eq!(d.point(0), &[-1.0, 0.0]);
        assert_eq!(d.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn iid_second_and_third_moments() {
        let m = build_iid_family(&ambiguous(), 2, 2, 1).unwrap();
        let x2 = TestFunction::square().on_coordinate(0, 2);
        assert_eq!(expect_with(&m.steps()[0], |p| x2.eval(p)), 4.0);
        assert_eq!(lower_expect(&x2, &m.steps()[0]).unwrap(), 1.0);
        assert_eq!(expect_with(&m.steps()[0], |p| p[0].abs().powi(3)), 8.0);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let base = build_iid_family(&ambiguous(), 2, 2, 5).unwrap();
        let p = build_perturbed_family(&base, &[0.0; 5]).unwrap();
        for (a, b) in p.steps().iter().zip(base.steps()) {
            assert_eq!(a.dists(), b.dists());
        }
    }

    #[test]
    fn perturbation_differs_per_step() {
        let base = build_iid_family(&ambiguous(), 2, 2, 4).unwrap();
        let rule = EpsRule::Harmonic {
            offset: 4.0,
            alternating: true,
        };
        let eps = rule.sequence(4);
        assert_eq!(eps[0], -0.2);
        assert_eq!(eps[1], 1.0 / 6.0);
        let p = build_perturbed_family(&base, &eps).unwrap();
        assert_ne!(p.steps()[0].dists(), base.steps()[0].dists());
        assert_ne!(p.steps()[0].dists(), p.steps()[1].dists());
        // Step 1: X scaled by 0.8, Y shifted by (-1)·(-0.2).
        assert_eq!(
            p.steps()[0].dists()[0].point(1),
            &[1.0 * (1.0 - 0.2), -0.5 + 0.2]
        );
    }

    #[test]
    fn perturbation_bound_enforced() {
        let base = build_iid_family(&ambiguous(), 2, 2, 2).unwrap();
        assert!(build_perturbed_family(&base, &[0.3, 0.0]).is_err());
        assert!(build_perturbed_family(&base, &[0.1]).is_err());
    }

    #[test]
    fn prefix_bounds() {
        let m = build_iid_family(&ambiguous(), 1, 1, 2).unwrap();
        assert!(m.prefix(0).is_err());
        assert!(m.prefix(3).is_err());
        assert_eq!(m.prefix(2).unwrap().len(), 2);
    }
}

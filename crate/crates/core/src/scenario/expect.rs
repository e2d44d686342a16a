use serde::Serialize;

use super::{ScenarioSet, TestFunction};
use crate::error::{Error, Result};

/// `max_{P ∈ S} Σ w φ(p)` for an arbitrary closure.
pub fn expect_with(s: &ScenarioSet, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    s.dists()
        .iter()
        .map(|d| d.mean_of(&mut f))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_dim(phi: &TestFunction, s: &ScenarioSet) -> Result<()> {
    if phi.dim() != s.dim() {
        return Err(Error::FunctionDimension {
            function: phi.dim(),
            set: s.dim(),
        });
    }
    Ok(())
}

/// Upper expectation `Ê[φ]`.
pub fn expect(phi: &TestFunction, s: &ScenarioSet) -> Result<f64> {
    check_dim(phi, s)?;
    Ok(expect_with(s, |p| phi.eval(p)))
}

/// Lower expectation `-Ê[-φ]`.
pub fn lower_expect(phi: &TestFunction, s: &ScenarioSet) -> Result<f64> {
    check_dim(phi, s)?;
    Ok(-expect_with(s, |p| -phi.eval(p)))
}

/// Outcome of one axiom family: how many instances were checked and a
/// human-readable witness for each violation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AxiomOutcome {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(witness());
        }
    }

    pub fn merge(&mut self, other: AxiomOutcome) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AxiomReport {
    pub monotonicity: AxiomOutcome,
    pub constant_preserving: AxiomOutcome,
    pub sub_additivity: AxiomOutcome,
    pub positive_homogeneity: AxiomOutcome,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.outcomes().iter().all(|(_, o)| o.passed())
    }

    pub fn outcomes(&self) -> [(&'static str, &AxiomOutcome); 4] {
        [
            ("monotonicity", &self.monotonicity),
            ("constant_preserving", &self.constant_preserving),
            ("sub_additivity", &self.sub_additivity),
            ("positive_homogeneity", &self.positive_homogeneity),
        ]
    }

    pub fn violation_count(&self) -> usize {
        self.outcomes()
            .iter()
            .map(|(_, o)| o.violations.len())
            .sum()
    }

    pub fn merge(&mut self, other: AxiomReport) {
        self.monotonicity.merge(other.monotonicity);
        self.constant_preserving.merge(other.constant_preserving);
        self.sub_additivity.merge(other.sub_additivity);
        self.positive_homogeneity.merge(other.positive_homogeneity);
    }
}

const HOMOGENEITY_LAMBDAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const PROBE_CONSTANTS: [f64; 4] = [-2.5, 0.0, 1.0, 3.0];

/// Checks the four sublinear-expectation axioms on `s` over the supplied functions.
///
/// Monotonicity is tested on every ordered pair `(f, g)` with `f ≥ g` on the
/// union of atoms, plus `(f, f - 1)`. Constant preservation is tested on a
/// few fixed constants and on any supplied function that is constant on the
/// support.
pub fn verify_axioms(s: &ScenarioSet, fns: &[TestFunction], tol: f64) -> Result<AxiomReport> {
    if fns.is_empty() {
        return Err(Error::InvalidParams(
            "verify_axioms needs at least one test function".into(),
        ));
    }
    for f in fns {
        check_dim(f, s)?;
    }
    let support: Vec<&[f64]> = s.support().collect();
    let values: Vec<Vec<f64>> = fns
        .iter()
        .map(|f| support.iter().map(|p| f.eval(p)).collect())
        .collect();
    let e: Vec<f64> = fns.iter().map(|f| expect_with(s, |p| f.eval(p))).collect();
    let mut report = AxiomReport::default();

    for (i, f) in fns.iter().enumerate() {
        let shifted = expect_with(s, |p| f.eval(p) - 1.0);
        report.monotonicity.record(e[i] >= shifted - tol, || {
            format!(
                "Ê[{}] = {} < Ê[{} - 1] = {shifted}",
                f.label(),
                e[i],
                f.label()
            )
        });
        for (j, g) in fns.iter().enumerate() {
            if i == j {
                continue;
            }
            let dominates = values[i].iter().zip(&values[j]).all(|(a, b)| a >= b);
            if dominates {
                report.monotonicity.record(e[i] >= e[j] - tol, || {
                    format!(
                        "{} ≥ {} pointwise but Ê = {} < {}",
                        f.label(),
                        g.label(),
                        e[i],
                        e[j]
                    )
                });
            }
        }
    }

    for c in PROBE_CONSTANTS {
        let got = expect_with(s, |_| c);
        report
            .constant_preserving
            .record((got - c).abs() <= tol, || format!("Ê[{c}] = {got}"));
    }
    for (i, f) in fns.iter().enumerate() {
        let first = values[i][0];
        if values[i].iter().all(|v| *v == first) {
            report
                .constant_preserving
                .record((e[i] - first).abs() <= tol, || {
                    format!("{} ≡ {first} on the support but Ê = {}", f.label(), e[i])
                });
        }
    }

    for (i, f) in fns.iter().enumerate() {
        for (j, g) in fns.iter().enumerate() {
            let sum = expect_with(s, |p| f.eval(p) + g.eval(p));
            report.sub_additivity.record(sum <= e[i] + e[j] + tol, || {
                format!(
                    "Ê[{}+{}] = {sum} > {} + {}",
                    f.label(),
                    g.label(),
                    e[i],
                    e[j]
                )
            });
        }
    }

    for (i, f) in fns.iter().enumerate() {
        for lambda in HOMOGENEITY_LAMBDAS {
            let scaled = expect_with(s, |p| lambda * f.eval(p));
            report
                .positive_homogeneity
                .record((scaled - lambda * e[i]).abs() <= tol, || {
                    format!("Ê[{lambda}·{}] = {scaled} ≠ {lambda}·{}", f.label(), e[i])
                });
        }
    }
    Ok(report)
}

/// Certificate of identical distribution over the supplied family only.
pub fn identically_distributed(
    s1: &ScenarioSet,
    s2: &ScenarioSet,
    fns: &[TestFunction],
    tol: f64,
) -> Result<bool> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    for f in fns {
        if (expect(f, s1)? - expect(f, s2)?).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Ê[φ(X, Y)]` with `Y` independent of `X`: `Ê[Ê[φ(x, Y)]_{x = X}]`.
///
/// `phi` acts on the concatenated point `(x, y)`. The first argument is the
/// outer variable; swapping the roles is a different computation in general.
pub fn independent_pair_expect(
    phi: &TestFunction,
    outer: &ScenarioSet,
    inner: &ScenarioSet,
) -> Result<f64> {
    let dim = outer.dim() + inner.dim();
    if phi.dim() != dim {
        return Err(Error::FunctionDimension {
            function: phi.dim(),
            set: dim,
        });
    }
    let split = outer.dim();
    Ok(expect_with(outer, |x| {
        let mut point = vec![0.0; dim];
        point[..split].copy_from_slice(x);
        expect_with(inner, |y| {
            point[split..].copy_from_slice(y);
            phi.eval(&point)
        })
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub p: f64,
    pub q: f64,
    /// `Ê[|XY|]`
    pub product_moment: f64,
    /// `Ê[|X|^p]^{1/p} · Ê[|Y|^q]^{1/q}`
    pub holder_bound: f64,
    /// `(p', Ê[|X|^p]^{1/p}, Ê[|X|^{p'}]^{1/p'})` for `p' ∈ {p, p+1}`.
    pub lyapunov: Vec<(f64, f64, f64)>,
    pub holds: bool,
}

/// Hölder and Lyapunov inequalities on a two-dimensional scenario set whose
/// coordinates play the roles of `X` and `Y`.
pub fn holder_report(s: &ScenarioSet, p: f64, q: f64, tol: f64) -> Result<HolderReport> {
    if !(p > 1.0 && q > 1.0 && (1.0 / p + 1.0 / q - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidExponents { p, q });
    }
    if s.dim() != 2 {
        return Err(Error::FunctionDimension {
            function: 2,
            set: s.dim(),
        });
    }
    let norm = |coord: usize, r: f64| expect_with(s, |pt| pt[coord].abs().powf(r)).powf(1.0 / r);
    let product_moment = expect_with(s, |pt| (pt[0] * pt[1]).abs());
    let holder_bound = norm(0, p) * norm(1, q);
    let mut holds = product_moment <= holder_bound + tol;
    let lyapunov: Vec<_> = [p, p + 1.0]
        .into_iter()
        .map(|pp| (pp, norm(0, p), norm(0, pp)))
        .collect();
    holds &= lyapunov.iter().all(|(_, lo, hi)| *lo <= hi + tol);
    Ok(HolderReport {
        p,
        q,
        product_moment,
        holder_bound,
        lyapunov,
        holds,
    })
}

pub fn holder_check(s: &ScenarioSet, p: f64, q: f64, tol: f64) -> Result<bool> {
    Ok(holder_report(s, p, q, tol)?.holds)
}

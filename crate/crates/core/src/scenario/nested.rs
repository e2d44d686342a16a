//! Nested (sequentially independent) evaluation of `Ê[φ(Σᵢ a·Xᵢ + b·Yᵢ)]`.
//!
//! Step `i + 1` is independent of steps `1..=i`, so the value is the
//! backward recursion
//!
//! ```text
//! W_n(s) = φ(s)
//! W_i(s) = max_{θ ∈ S_{i+1}} Σ_atoms w · W_{i+1}(s + a·x + b·y)
//! ```
//!
//! evaluated at `W_0(0)`. The brute-force oracle instead enumerates every
//! history-adapted scenario policy, computes the classical expectation each
//! one induces and takes the maximum only at the end.

use serde::{Deserialize, Serialize};

use super::{ScenarioSet, TestFunction};
use crate::clt::SequenceModel;
use crate::error::{Error, Result};
use crate::par;

/// Default ceiling on the number of policies the brute-force oracle may enumerate.
pub const DEFAULT_POLICY_CAP: u64 = 1_000_000;

/// Tolerance (in lattice units) for an increment to count as a lattice multiple.
const LATTICE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Every reachable partial sum is a grid node; the recursion is exact.
    ExactLattice,
    /// Values between nodes come from piecewise-linear interpolation.
    GridInterp,
}

#[derive(Debug, Clone, Deserialize)]
struct RawNestedConfig {
    mode: GridMode,
    x_range: [f64; 2],
    num_points: usize,
}

/// State grid for the backward recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNestedConfig", into = "RawNestedConfigOut")]
pub struct NestedEvalConfig {
    lo: f64,
    hi: f64,
    num_points: usize,
    mode: GridMode,
}

#[derive(Serialize)]
struct RawNestedConfigOut {
    mode: GridMode,
    x_range: [f64; 2],
    num_points: usize,
}

impl From<NestedEvalConfig> for RawNestedConfigOut {
    fn from(c: NestedEvalConfig) -> Self {
        Self {
            mode: c.mode,
            x_range: [c.lo, c.hi],
            num_points: c.num_points,
        }
    }
}

impl TryFrom<RawNestedConfig> for NestedEvalConfig {
    type Error = Error;

    fn try_from(raw: RawNestedConfig) -> Result<Self> {
        Self::new(raw.x_range[0], raw.x_range[1], raw.num_points, raw.mode)
    }
}

impl NestedEvalConfig {
    pub fn new(lo: f64, hi: f64, num_points: usize, mode: GridMode) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParams(format!(
                "state grid needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if num_points < 2 {
            return Err(Error::InvalidParams(format!(
                "state grid needs at least 2 points, got {num_points}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            num_points,
            mode,
        })
    }

    /// Grid on `[-half_width, half_width]` with node spacing at most `spacing`
    /// and a node at the origin.
    pub fn symmetric(half_width: f64, spacing: f64, mode: GridMode) -> Result<Self> {
        if !(spacing > 0.0 && half_width > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need positive half width and spacing, got {half_width}, {spacing}"
            )));
        }
        let cells = (half_width / spacing - 1e-9).ceil().max(1.0) as usize;
        let width = cells as f64 * spacing;
        Self::new(-width, width, 2 * cells + 1, mode)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.num_points - 1) as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.spacing()
    }

    pub fn with_mode(mut self, mode: GridMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Coefficients of the per-step increment `x·X + y·Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub x: f64,
    pub y: f64,
}

impl StepWeights {
    /// The normalisation `Sₙ/√n + Tₙ/n`, i.e. `√δ` and `δ` with `δ = 1/n`.
    pub fn clt(n: usize) -> Self {
        let delta = 1.0 / n as f64;
        Self {
            x: delta.sqrt(),
            y: delta,
        }
    }

    pub fn unit() -> Self {
        Self { x: 1.0, y: 1.0 }
    }
}

/// Per step, per scenario: `(increment, weight)` for every atom.
type Increments = Vec<Vec<Vec<(f64, f64)>>>;

fn increments(steps: &[ScenarioSet], weights: StepWeights) -> Increments {
    steps
        .iter()
        .map(|s| {
            s.dists()
                .iter()
                .map(|d| {
                    d.atoms()
                        .map(|(p, w)| {
                            let y = p.get(1).copied().unwrap_or(0.0);
                            (weights.x * p[0] + weights.y * y, w)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn step_range(step: &[Vec<(f64, f64)>]) -> (f64, f64) {
    step.iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        })
}

fn check_phi(phi: &TestFunction) -> Result<()> {
    if phi.dim() != 1 {
        return Err(Error::FunctionDimension {
            function: phi.dim(),
            set: 1,
        });
    }
    Ok(())
}

fn check_steps(steps: &[ScenarioSet]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::InvalidParams("need at least one step".into()));
    }
    if let Some((index, s)) = steps.iter().enumerate().find(|(_, s)| s.dim() > 2) {
        return Err(Error::DimensionMismatch {
            index,
            expected: 2,
            found: s.dim(),
        });
    }
    Ok(())
}

/// `Ê[φ(Sₙ/√n + Tₙ/n)]` over the first `n` steps of `model`.
pub fn nested_expect(
    phi: &TestFunction,
    model: &SequenceModel,
    n: usize,
    cfg: &NestedEvalConfig,
) -> Result<f64> {
    let steps = model.prefix(n)?;
    nested_expect_weighted(phi, steps, StepWeights::clt(n), cfg)
}

/// Backward recursion with arbitrary increment weights.
pub fn nested_expect_weighted(
    phi: &TestFunction,
    steps: &[ScenarioSet],
    weights: StepWeights,
    cfg: &NestedEvalConfig,
) -> Result<f64> {
    check_phi(phi)?;
    check_steps(steps)?;
    let incs = increments(steps, weights);
    match cfg.mode {
        GridMode::ExactLattice => lattice_recursion(phi, &incs, cfg),
        GridMode::GridInterp => interp_recursion(phi, &incs, cfg),
    }
}

fn lattice_recursion(phi: &TestFunction, incs: &Increments, cfg: &NestedEvalConfig) -> Result<f64> {
    let h = cfg.spacing();
    let to_lattice = |v: f64, what: &str| -> Result<i64> {
        let t = v / h;
        let k = t.round();
        if (t - k).abs() > LATTICE_TOL {
            return Err(Error::Lattice(format!(
                "{what} {v} is not a multiple of the spacing {h}"
            )));
        }
        Ok(k as i64)
    };
    let origin = to_lattice(-cfg.lo, "origin offset")?;
    let offsets: Vec<Vec<Vec<(i64, f64)>>> = incs
        .iter()
        .map(|step| {
            step.iter()
                .map(|scen| {
                    scen.iter()
                        .map(|&(x, w)| Ok((to_lattice(x, "increment")?, w)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // Reachable index interval after each step.
    let n = offsets.len();
    let mut reach = vec![(origin, origin); n + 1];
    for i in 0..n {
        let (lo, hi) = offsets[i]
            .iter()
            .flatten()
            .fold((i64::MAX, i64::MIN), |(a, b), &(k, _)| (a.min(k), b.max(k)));
        reach[i + 1] = (reach[i].0 + lo, reach[i].1 + hi);
    }
    let last = cfg.num_points as i64 - 1;
    if let Some(&(a, b)) = reach.iter().find(|&&(a, b)| a < 0 || b > last) {
        return Err(Error::GridCoverage {
            lo: cfg.lo,
            hi: cfg.hi,
            need_lo: cfg.lo + a as f64 * h,
            need_hi: cfg.lo + b as f64 * h,
        });
    }

    let (a, b) = reach[n];
    let mut next: Vec<f64> = (a..=b).map(|j| phi.eval1(cfg.node(j as usize))).collect();
    let mut next_base = a;
    for i in (0..n).rev() {
        let (a, b) = reach[i];
        let step = &offsets[i];
        let prev = &next;
        let cur = par::map_range((b - a + 1) as usize, |idx| {
            let j = a + idx as i64;
            step.iter()
                .map(|scen| {
                    scen.iter()
                        .map(|&(k, w)| w * prev[(j + k - next_base) as usize])
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        });
        next = cur;
        next_base = a;
    }
    Ok(next[(origin - next_base) as usize])
}

#[inline]
fn interpolate(values: &[f64], lo: f64, inv_h: f64, x: f64) -> f64 {
    let t = ((x - lo) * inv_h).max(0.0);
    let j = (t.floor() as usize).min(values.len() - 2);
    let frac = t - j as f64;
    (1.0 - frac) * values[j] + frac * values[j + 1]
}

fn interp_recursion(phi: &TestFunction, incs: &Increments, cfg: &NestedEvalConfig) -> Result<f64> {
    let h = cfg.spacing();
    let inv_h = 1.0 / h;
    let last = cfg.num_points - 1;
    let n = incs.len();

    // Active node ranges, propagated forward: layer i+1 must bracket every
    // point x_j + inc with j active at layer i.
    let bracket = |lo: f64, hi: f64| -> Result<(usize, usize)> {
        let a = ((lo - cfg.lo) * inv_h - 1e-9).floor();
        let b = ((hi - cfg.lo) * inv_h + 1e-9).ceil();
        if a < 0.0 || b > last as f64 {
            return Err(Error::GridCoverage {
                lo: cfg.lo,
                hi: cfg.hi,
                need_lo: lo,
                need_hi: hi,
            });
        }
        Ok((a as usize, (b as usize).max(a as usize + 1).min(last)))
    };
    let mut active = Vec::with_capacity(n + 1);
    active.push(bracket(0.0, 0.0)?);
    for step in incs {
        let (a, b) = *active.last().expect("non-empty");
        let (dlo, dhi) = step_range(step);
        active.push(bracket(cfg.node(a) + dlo, cfg.node(b) + dhi)?);
    }

    let mut next = vec![0.0; cfg.num_points];
    let mut cur = vec![0.0; cfg.num_points];
    let (a, b) = active[n];
    par::fill_indexed(&mut next[a..=b], |k| phi.eval1(cfg.node(a + k)));
    for i in (0..n).rev() {
        let (a, b) = active[i];
        let step = &incs[i];
        let prev = &next;
        par::fill_indexed(&mut cur[a..=b], |k| {
            let x = cfg.node(a + k);
            step.iter()
                .map(|scen| {
                    scen.iter()
                        .map(|&(inc, w)| w * interpolate(prev, cfg.lo, inv_h, x + inc))
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        });
        std::mem::swap(&mut next, &mut cur);
    }
    let value = interpolate(&next, cfg.lo, inv_h, 0.0);
    if !value.is_finite() {
        return Err(Error::NonFinite { step: 0, node: 0 });
    }
    Ok(value)
}

/// Number of history-adapted policies over `steps`: at a node before step
/// `i`, choose a scenario, then a policy for every atom's subtree.
pub fn policy_count(steps: &[ScenarioSet]) -> f64 {
    steps.iter().rev().fold(1.0_f64, |below, s| {
        s.dists()
            .iter()
            .map(|d| below.powi(d.len() as i32))
            .sum::<f64>()
    })
}

/// Brute-force oracle for [`nested_expect`]: max over adapted policies of the
/// classical expectation of `φ(Sₙ/√n + Tₙ/n)`.
pub fn bruteforce_nested(phi: &TestFunction, model: &SequenceModel, n: usize) -> Result<f64> {
    let steps = model.prefix(n)?;
    bruteforce_nested_weighted(phi, steps, StepWeights::clt(n), DEFAULT_POLICY_CAP)
}

pub fn bruteforce_nested_weighted(
    phi: &TestFunction,
    steps: &[ScenarioSet],
    weights: StepWeights,
    cap: u64,
) -> Result<f64> {
    check_phi(phi)?;
    check_steps(steps)?;
    let count = policy_count(steps);
    if !(count <= cap as f64) {
        return Err(Error::PolicyCap { count, cap });
    }
    let incs = increments(steps, weights);
    let root = &incs[0];
    // Partition the policy space by the root scenario; the reduction is a max.
    let per_root = par::map_coarse(root.len(), |theta| {
        policy_values_for(phi, &incs, 0, 0.0, &root[theta])
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(per_root.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Expected values of every policy rooted at a node at `depth` with partial sum `s`.
fn policy_values(phi: &TestFunction, incs: &Increments, depth: usize, s: f64) -> Vec<f64> {
    if depth == incs.len() {
        return vec![phi.eval1(s)];
    }
    incs[depth]
        .iter()
        .flat_map(|scen| policy_values_for(phi, incs, depth, s, scen))
        .collect()
}

/// Values of every policy that picks scenario `scen` at this node: one
/// entry per combination of subtree policies.
fn policy_values_for(
    phi: &TestFunction,
    incs: &Increments,
    depth: usize,
    s: f64,
    scen: &[(f64, f64)],
) -> Vec<f64> {
    let mut combos = vec![0.0];
    for &(inc, w) in scen {
        let child = policy_values(phi, incs, depth + 1, s + inc);
        combos = combos
            .iter()
            .flat_map(|acc| child.iter().map(move |v| acc + w * v))
            .collect();
    }
    combos
}

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::SequenceModel;
use crate::error::{Error, Result};
use crate::gheat::{solve, value_at, SolverConfig};
use crate::par;
use crate::scenario::io::RawDist;
use crate::scenario::{
    nested_expect, GridMode, NestedEvalConfig, ScenarioSet, StepWeights, TestFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub lhs: f64,
    pub pde: f64,
    pub e_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub phi_label: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.e_n)
    }

    pub fn row(&self, n: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Number of schedule steps where `eₙ` grew, and the largest relative growth.
    pub fn non_monotone_steps(&self) -> (usize, f64) {
        self.rows.windows(2).fold((0, 0.0), |(count, worst), w| {
            if w[1].e_n > w[0].e_n {
                let rel = if w[0].e_n > 0.0 {
                    (w[1].e_n - w[0].e_n) / w[0].e_n
                } else {
                    f64::INFINITY
                };
                (count + 1, f64::max(worst, rel))
            } else {
                (count, worst)
            }
        })
    }

    /// Writes `n,lhs,pde,e_n` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reachable interval of `Sₙ/√n + Tₙ/n` under the CLT weights.
fn reach(model: &SequenceModel, n: usize) -> Result<(f64, f64)> {
    let w = StepWeights::clt(n);
    Ok(model.prefix(n)?.iter().fold((0.0, 0.0), |(lo, hi), s| {
        let (a, b) = s
            .support()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                let inc = w.x * p[0] + w.y * p[1];
                (a.min(inc), b.max(inc))
            });
        (lo + a, hi + b)
    }))
}

/// Symmetric interpolation grid with the given spacing, covering the PDE
/// window `±(6σ̄ + |μ|)` and every reachable partial sum for each `n` in the
/// schedule (plus one cell of slack per step for bracketing).
pub fn covering_grid(
    model: &SequenceModel,
    schedule: &[usize],
    spacing: f64,
) -> Result<NestedEvalConfig> {
    let mut half = SolverConfig::required_half_width(model.gp(), 1.0);
    for &n in schedule {
        let (lo, hi) = reach(model, n)?;
        half = half.max(lo.abs().max(hi.abs()) + (n + 1) as f64 * spacing);
    }
    NestedEvalConfig::symmetric(half, spacing, GridMode::GridInterp)
}

/// Runs the convergence measurement: for every `n` in `schedule`,
/// `lhs = Ê[φ(Sₙ/√n + Tₙ/n)]` by nested evaluation and `pde = v(1, 0)`.
pub fn run_clt(
    model: &SequenceModel,
    phi: &TestFunction,
    schedule: &[usize],
    cfg_dp: &NestedEvalConfig,
    cfg_pde: &SolverConfig,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(format!(
            "n schedule must be non-empty and strictly increasing, got {schedule:?}"
        )));
    }
    let gp = model.gp();
    let cfg_pde = cfg_pde.clone().resolve_dt(gp)?;
    if (cfg_pde.t_final - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "the limit value needs t_final = 1, got {}",
            cfg_pde.t_final
        )));
    }
    let need = SolverConfig::required_half_width(gp, 1.0);
    if cfg_pde.x_hi < need * (1.0 - 1e-9) || cfg_pde.x_lo > -need * (1.0 - 1e-9) {
        return Err(Error::InvalidParams(format!(
            "PDE domain [{}, {}] must cover ±{need} (6σ̄ + |μ|)",
            cfg_pde.x_lo, cfg_pde.x_hi
        )));
    }
    let pde = value_at(&solve(gp, phi, &cfg_pde)?, 0.0)?;
    let lhs = par::map_coarse(schedule.len(), |k| {
        nested_expect(phi, model, schedule[k], cfg_dp)
    });
    let rows = schedule
        .iter()
        .zip(lhs)
        .map(|(&n, lhs)| {
            let lhs = lhs?;
            Ok(ConvergenceRow {
                n,
                lhs,
                pde,
                e_n: (lhs - pde).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        phi_label: phi.label().to_string(),
        rows,
    })
}

/// Re-encodes one step without changing its law: scenarios are listed in a
/// random order and one atom is written as two half-weight copies, which the
/// loader's normalisation merges back.
pub fn reencode_step(step: &ScenarioSet, rng: &mut impl Rng) -> Result<ScenarioSet> {
    let mut order: Vec<usize> = (0..step.len()).collect();
    order.shuffle(rng);
    let permuted = step.permuted(&order);
    let target = rng.gen_range(0..permuted.len());
    let dists = permuted
        .dists()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut raw = RawDist::from_dist(d);
            if i == target {
                let k = rng.gen_range(0..raw.atoms.len());
                let mut atom = raw.atoms[k].clone();
                let last = atom.len() - 1;
                atom[last] *= 0.5;
                raw.atoms[k] = atom.clone();
                let at = rng.gen_range(0..=raw.atoms.len());
                raw.atoms.insert(at, atom);
            }
            raw.build(i)
        })
        .collect::<Result<Vec<_>>>()?;
    ScenarioSet::new(format!("{} (re-encoded)", step.label()), dists)
}

/// Nested value on a second, distribution-identical encoding of the model.
///
/// Returns `|Ê[φ(...)] - Ẽ[φ(...)]|` where `Ẽ` uses re-encoded steps.
pub fn cross_space_check(
    model: &SequenceModel,
    phi: &TestFunction,
    n: usize,
    cfg: &NestedEvalConfig,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = model.prefix(n)?;
    let other = steps
        .iter()
        .map(|s| reencode_step(s, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let twin = model.with_steps(other)?;
    let v1 = nested_expect(phi, model, n, cfg)?;
    let v2 = nested_expect(phi, &twin, n, cfg)?;
    Ok((v1 - v2).abs())
}

//! Seeded verification campaigns behind `gclt verify`.
//!
//! Every campaign draws its inputs from a ChaCha8 stream seeded by the
//! caller, so a failing line can be replayed from the seed in the report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfunction::{find_ellipticity_witness, verify_g_properties, GParams};
use crate::gheat::{semigroup_check, Boundary, SolverConfig};
use crate::scenario::{
    bruteforce_nested_weighted, holder_report, nested_expect_weighted, policy_count, verify_axioms,
    DiscreteDistribution, GridMode, NestedEvalConfig, ScenarioSet, StepWeights, TestFunction,
    DEFAULT_POLICY_CAP,
};

pub const SUITE_NAMES: [&str; 6] = [
    "axioms",
    "holder",
    "gfunction",
    "semigroup",
    "oracle",
    "all",
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.checks.iter().map(move |c| {
            format!(
                "[{}] {}/{}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                self.suite,
                c.name,
                c.detail
            )
        })
    }
}

fn line(name: &str, passed: bool, detail: String) -> CheckLine {
    CheckLine {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "axioms" => axioms(seed, 1000)?,
        "holder" => holder(seed, 200)?,
        "gfunction" => gfunction(seed, 1000)?,
        "semigroup" => semigroup()?,
        "oracle" => oracle(seed, 100)?,
        "all" => {
            let mut all = Vec::new();
            for suite in &SUITE_NAMES[..SUITE_NAMES.len() - 1] {
                let report = run_suite(suite, seed)?;
                all.extend(report.checks.into_iter().map(|mut c| {
                    c.name = format!("{suite}/{}", c.name);
                    c
                }));
            }
            all
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown suite `{other}` (known: {})",
                SUITE_NAMES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        checks,
    })
}

/// Distribution with `atoms` distinct points drawn by `coord` and random
/// positive weights.
pub fn random_dist(
    rng: &mut impl Rng,
    dim: usize,
    atoms: usize,
    mut coord: impl FnMut(&mut dyn rand::RngCore) -> f64,
) -> Result<DiscreteDistribution> {
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(atoms);
    let mut guard = 0;
    while points.len() < atoms {
        let p: Vec<f64> = (0..dim).map(|_| coord(rng)).collect();
        if !points.contains(&p) {
            points.push(p);
        }
        guard += 1;
        if guard > 1000 {
            break;
        }
    }
    let raw: Vec<f64> = points.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::normalized(
        dim,
        points.into_iter().zip(raw.into_iter().map(|w| w / total)),
        1e-9,
    )
}

/// Scenario set with up to `max_scenarios` distributions of up to `max_atoms` atoms.
pub fn random_scenario_set(
    rng: &mut impl Rng,
    dim: usize,
    max_scenarios: usize,
    max_atoms: usize,
) -> Result<ScenarioSet> {
    let k = rng.gen_range(1..=max_scenarios);
    let dists = (0..k)
        .map(|_| {
            let atoms = rng.gen_range(1..=max_atoms);
            random_dist(rng, dim, atoms, |r| r.gen_range(-3.0..3.0))
        })
        .collect::<Result<Vec<_>>>()?;
    ScenarioSet::new("random", dists)
}

/// A smooth or piecewise-linear test function of `dim` variables.
pub fn random_function(rng: &mut impl Rng, dim: usize) -> TestFunction {
    let a: f64 = rng.gen_range(-2.0..2.0);
    let b: f64 = rng.gen_range(-2.0..2.0);
    let c: f64 = rng.gen_range(-1.0..1.0);
    let y = move |p: &[f64]| if p.len() > 1 { p[1] } else { 0.0 };
    match rng.gen_range(0..4) {
        0 => TestFunction::new("affine", dim, a.abs() + b.abs(), f64::INFINITY, move |p| {
            a * p[0] + b * y(p) + c
        }),
        1 => TestFunction::new("cos", dim, a.abs() + b.abs(), 1.0, move |p| {
            (a * p[0] + b * y(p) + c).cos()
        }),
        2 => TestFunction::new("hinge", dim, a.abs() + b.abs(), f64::INFINITY, move |p| {
            (a * p[0] + b * y(p) - c).max(0.0)
        }),
        _ => TestFunction::new("quadratic", dim, f64::INFINITY, f64::INFINITY, move |p| {
            a * p[0] * p[0] + b * p[0] * y(p) + c
        }),
    }
}

fn axioms(seed: u64, draws: usize) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = None;
    for _ in 0..draws {
        let dim = rng.gen_range(1..=2);
        let s = random_scenario_set(&mut rng, dim, 4, 5)?;
        let fns: Vec<_> = (0..3).map(|_| random_function(&mut rng, dim)).collect();
        let report = verify_axioms(&s, &fns, 1e-10)?;
        match total.as_mut() {
            None => total = Some(report),
            Some(t) => t.merge(report),
        }
    }
    let total = total.ok_or_else(|| Error::InvalidParams("no draws".into()))?;
    Ok(total
        .outcomes()
        .iter()
        .map(|(name, o)| {
            let detail = match o.violations.first() {
                None => format!("{} checks over {draws} draws, 0 violations", o.checked),
                Some(w) => format!("{} violations, first: {w}", o.violations.len()),
            };
            line(name, o.passed(), detail)
        })
        .collect())
}

fn holder(seed: u64, draws: usize) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holder_bad = Vec::new();
    let mut lyapunov_bad = Vec::new();
    for k in 0..draws {
        let s = random_scenario_set(&mut rng, 2, 4, 5)?;
        let r = holder_report(&s, 2.0, 2.0, 1e-10)?;
        if r.product_moment > r.holder_bound + 1e-10 {
            holder_bad.push(format!(
                "draw {k}: Ê|XY| = {} > {}",
                r.product_moment, r.holder_bound
            ));
        }
        if let Some((pp, lo, hi)) = r.lyapunov.iter().find(|(_, lo, hi)| lo > &(hi + 1e-10)) {
            lyapunov_bad.push(format!("draw {k}: p' = {pp}: {lo} > {hi}"));
        }
    }
    let summarise = |bad: &[String]| match bad.first() {
        None => format!("{draws} draws, 0 violations"),
        Some(w) => format!("{} violations, first {w}", bad.len()),
    };
    Ok(vec![
        line(
            "holder_p2_q2",
            holder_bad.is_empty(),
            summarise(&holder_bad),
        ),
        line(
            "lyapunov_p_to_p_plus_1",
            lyapunov_bad.is_empty(),
            summarise(&lyapunov_bad),
        ),
    ])
}

fn random_gparams(rng: &mut impl Rng) -> Result<GParams> {
    let (m1, m2): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let (s1, s2): (f64, f64) = (rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0));
    GParams::new(m1.min(m2), m1.max(m2), s1.min(s2), s1.max(s2))
}

fn gfunction(seed: u64, samples: usize) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut violations = 0;
    let mut first = None;
    let mut witness_ok = true;
    let params = 10;
    for k in 0..params {
        let gp = random_gparams(&mut rng)?;
        let report =
            verify_g_properties(&gp, samples / params, 1e-10, seed.wrapping_add(k as u64))?;
        violations += report.violation_count();
        if first.is_none() {
            first = report
                .outcomes()
                .iter()
                .find_map(|(name, o)| o.violations.first().map(|w| format!("{name}: {w}")));
        }
        let sharp = find_ellipticity_witness(&gp, gp.beta(), 500, seed ^ k as u64).is_none();
        let loose = find_ellipticity_witness(&gp, gp.beta() * 1.01, 500, seed ^ k as u64).is_some();
        witness_ok &= sharp && loose;
    }
    checks.push(line(
        "properties",
        violations == 0,
        match first {
            None => format!("{samples} samples over {params} parameter boxes, 0 violations"),
            Some(w) => format!("{violations} violations, first {w}"),
        },
    ));
    checks.push(line(
        "ellipticity_modulus",
        witness_ok,
        "β = σ̲² holds and 1.01·β is refuted on every box".to_string(),
    ));
    checks.push(line(
        "zero_variance_floor_rejected",
        GParams::new(0.0, 0.0, 0.0, 1.0).is_err(),
        "σ̲² = 0 is refused".to_string(),
    ));
    Ok(checks)
}

fn semigroup() -> Result<Vec<CheckLine>> {
    let a = 0.5_f64.sqrt();
    let phi = TestFunction::cos();
    let cases = [
        ("degenerate", GParams::degenerate(0.0, 1.0)?),
        ("ambiguous", GParams::new(-0.5, 0.5, 1.0, 4.0)?),
    ];
    cases
        .iter()
        .map(|(name, gp)| {
            let cfg = SolverConfig::symmetric_for(gp, 0.02, 1.0, Boundary::ClampPhi)?;
            let coarse = semigroup_check(gp, &phi, a, a, &cfg)?;
            let fine = semigroup_check(gp, &phi, a, a, &cfg.refined(gp)?)?;
            let ok = coarse <= 1e-2 && fine <= coarse.max(1e-12);
            Ok(line(
                name,
                ok,
                format!("discrepancy {coarse:.3e} at dx = 0.02, {fine:.3e} at dx = 0.01"),
            ))
        })
        .collect()
}

/// Random lattice model: `n` two-dimensional steps with half-integer atoms,
/// redrawn until the brute-force policy count fits under the cap.
pub fn random_lattice_steps(
    rng: &mut impl Rng,
    n: usize,
    max_scenarios: usize,
    max_atoms: usize,
) -> Result<Vec<ScenarioSet>> {
    loop {
        let steps = (0..n)
            .map(|_| {
                let k = rng.gen_range(1..=max_scenarios);
                let dists = (0..k)
                    .map(|_| {
                        let atoms = rng.gen_range(1..=max_atoms);
                        random_dist(rng, 2, atoms, |r| r.gen_range(-6..=6) as f64 * 0.5)
                    })
                    .collect::<Result<Vec<_>>>()?;
                ScenarioSet::new("lattice", dists)
            })
            .collect::<Result<Vec<_>>>()?;
        if policy_count(&steps) <= DEFAULT_POLICY_CAP as f64 {
            return Ok(steps);
        }
    }
}

fn oracle(seed: u64, models: usize) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = NestedEvalConfig::new(-30.0, 30.0, 121, GridMode::ExactLattice)?;
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let n = rng.gen_range(1..=4);
        let steps = random_lattice_steps(&mut rng, n, 3, 3)?;
        let phi = random_function(&mut rng, 1);
        let dp = nested_expect_weighted(&phi, &steps, StepWeights::unit(), &cfg)?;
        let brute =
            bruteforce_nested_weighted(&phi, &steps, StepWeights::unit(), DEFAULT_POLICY_CAP)?;
        worst = worst.max((dp - brute).abs() / brute.abs().max(1.0));
    }
    Ok(vec![line(
        "lattice_dp_vs_bruteforce",
        worst <= 1e-12,
        format!("{models} models, worst relative gap {worst:.3e}"),
    )])
}

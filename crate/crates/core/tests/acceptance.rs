//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use gclt::clt::preset::ExperimentPreset;
use gclt::clt::{build_iid_family, check_conditions, SequenceModel};
use gclt::gfunction::verify_g_properties;
use gclt::gheat::{semigroup_check, solve, value_at, Boundary, SolverConfig};
use gclt::scenario::{
    bruteforce_nested, holder_report, nested_expect, policy_count, verify_axioms,
    DiscreteDistribution, GridMode, NestedEvalConfig, ScenarioSet, DEFAULT_POLICY_CAP,
};
use gclt::suites::{random_function, random_scenario_set};
use gclt::{GParams, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

struct Verdict {
    id: u8,
    title: &'static str,
    checks: Vec<(bool, String)>,
    elapsed: Duration,
    budget: Duration,
}

impl Verdict {
    fn passed(&self) -> bool {
        self.elapsed <= self.budget && self.checks.iter().all(|(ok, _)| *ok)
    }

    fn print(&self) {
        println!(
            "{} [{}] {} ({:.2} s, budget {} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        for (ok, detail) in &self.checks {
            println!("       {} {detail}", if *ok { "ok  " } else { "MISS" });
        }
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget_s: u64,
    body: impl FnOnce() -> Vec<(bool, String)>,
) -> Verdict {
    let start = Instant::now();
    let checks = body();
    Verdict {
        id,
        title,
        checks,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_s),
    }
}

/// Random model on the lattice `ℤ/n` under the CLT weights: X atoms are
/// `a/√n`, Y atoms are integers.
fn random_clt_lattice_model(rng: &mut ChaCha8Rng) -> (SequenceModel, usize) {
    let gp = GParams::new(-1.0, 1.0, 1.0, 4.0).unwrap();
    loop {
        let n = rng.gen_range(1..=4);
        let root = (n as f64).sqrt();
        let steps: Vec<ScenarioSet> = (0..n)
            .map(|_| {
                let dists = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let mut atoms: Vec<(f64, f64, f64)> = Vec::new();
                        for _ in 0..rng.gen_range(1..=3) {
                            let p = (
                                rng.gen_range(-3..=3) as f64 / root,
                                rng.gen_range(-2..=2) as f64,
                            );
                            if atoms.iter().all(|a| (a.0, a.1) != p) {
                                atoms.push((p.0, p.1, rng.gen_range(0.1..1.0)));
                            }
                        }
                        let total: f64 = atoms.iter().map(|a| a.2).sum();
                        let atoms: Vec<_> =
                            atoms.iter().map(|&(x, y, w)| (x, y, w / total)).collect();
                        DiscreteDistribution::normalized(
                            2,
                            atoms.iter().map(|&(x, y, w)| (vec![x, y], w)),
                            1e-9,
                        )
                        .unwrap()
                    })
                    .collect();
                ScenarioSet::new("lattice", dists).unwrap()
            })
            .collect();
        if policy_count(&steps) <= DEFAULT_POLICY_CAP as f64 {
            return (SequenceModel::new(steps, gp, "random-lattice").unwrap(), n);
        }
    }
}

fn criterion_1() -> Verdict {
    timed(
        1,
        "nested lattice DP equals brute-force policy enumeration",
        10,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(101);
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let (model, n) = random_clt_lattice_model(&mut rng);
                let phi = random_function(&mut rng, 1);
                let h = 1.0 / n as f64;
                let cfg = NestedEvalConfig::new(
                    -20.0,
                    20.0,
                    (40.0 / h).round() as usize + 1,
                    GridMode::ExactLattice,
                )
                .unwrap();
                let dp = nested_expect(&phi, &model, n, &cfg).unwrap();
                let brute = bruteforce_nested(&phi, &model, n).unwrap();
                worst = worst.max((dp - brute).abs());
            }
            vec![(
                worst <= 1e-12,
                format!("100 models, max |dp - brute| = {worst:.3e} (tol 1e-12)"),
            )]
        },
    )
}

fn criterion_2() -> Verdict {
    timed(
        2,
        "sublinear expectation axioms and G properties",
        5,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(202);
            let mut axiom_violations = 0;
            let mut axiom_checks = 0;
            for _ in 0..1000 {
                let dim = rng.gen_range(1..=2);
                let s = random_scenario_set(&mut rng, dim, 4, 5).unwrap();
                let fns: Vec<_> = (0..3).map(|_| random_function(&mut rng, dim)).collect();
                let r = verify_axioms(&s, &fns, 1e-10).unwrap();
                axiom_violations += r.violation_count();
                axiom_checks += r.outcomes().iter().map(|(_, o)| o.checked).sum::<usize>();
            }
            let mut g_violations = 0;
            for k in 0..10 {
                let (m1, m2): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let (s1, s2): (f64, f64) = (rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0));
                let gp = GParams::new(m1.min(m2), m1.max(m2), s1.min(s2), s1.max(s2)).unwrap();
                g_violations += verify_g_properties(&gp, 100, 1e-10, 202 + k)
                    .unwrap()
                    .violation_count();
            }
            vec![
                (
                    axiom_violations == 0,
                    format!(
                        "1000 scenario sets, {axiom_checks} checks, {axiom_violations} violations"
                    ),
                ),
                (
                    g_violations == 0,
                    format!("1000 G samples, {g_violations} violations"),
                ),
            ]
        },
    )
}

fn criterion_3() -> Verdict {
    timed(3, "Hölder and Lyapunov inequalities", 5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let mut holder_bad = 0;
        let mut lyapunov_bad = 0;
        for _ in 0..200 {
            let s = random_scenario_set(&mut rng, 2, 4, 5).unwrap();
            let r = holder_report(&s, 2.0, 2.0, 1e-10).unwrap();
            holder_bad += usize::from(r.product_moment > r.holder_bound + 1e-10);
            lyapunov_bad += r
                .lyapunov
                .iter()
                .filter(|(_, lo, hi)| *lo > hi + 1e-10)
                .count();
        }
        vec![
            (
                holder_bad == 0,
                format!("200 sets, p = q = 2: {holder_bad} violations"),
            ),
            (
                lyapunov_bad == 0,
                format!("200 sets, p' = p + 1: {lyapunov_bad} violations"),
            ),
        ]
    })
}

fn bachelier(mu: f64, sigma: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).unwrap();
    mu * z.cdf(mu / sigma) + sigma * z.pdf(mu / sigma)
}

fn criterion_4() -> Verdict {
    timed(4, "G-heat solver against closed forms", 60, || {
        let classical = GParams::degenerate(0.0, 1.0).unwrap();
        let cos_cfg =
            SolverConfig::symmetric_for(&classical, 0.02, 1.0, Boundary::ClampPhi).unwrap();
        let cos_err = |cfg: &SolverConfig| {
            let v = value_at(&solve(&classical, &TestFunction::cos(), cfg).unwrap(), 0.0).unwrap();
            (v - (-0.5f64).exp()).abs()
        };
        let e_cos = cos_err(&cos_cfg);
        let e_cos_fine = cos_err(&cos_cfg.refined(&classical).unwrap());

        let amb = GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap();
        let ramp = TestFunction::scalar("max(x,0)", 1.0, f64::INFINITY, |x| x.max(0.0));
        let exact = bachelier(0.5, 2.0);
        let b_cfg =
            SolverConfig::symmetric_for(&amb, 0.02, 1.0, Boundary::LinearExtrapolate).unwrap();
        let b_err = |cfg: &SolverConfig| {
            (value_at(&solve(&amb, &ramp, cfg).unwrap(), 0.0).unwrap() - exact).abs()
        };
        let e_b = b_err(&b_cfg);
        let e_b_fine = b_err(&b_cfg.refined(&amb).unwrap());
        vec![
            (
                e_cos <= 5e-3,
                format!(
                    "cos, degenerate: |v(1,0) - e^(-1/2)| = {e_cos:.3e} at dx = 0.02 (tol 5e-3)"
                ),
            ),
            (
                e_b <= 5e-3,
                format!(
                    "ramp, ambiguous: |v(1,0) - {exact:.6}| = {e_b:.3e} at dx = 0.02 (tol 5e-3)"
                ),
            ),
            (
                e_cos >= 3.0 * e_cos_fine,
                format!(
                    "cos refinement: {e_cos:.3e} -> {e_cos_fine:.3e}, ratio {:.2} (need >= 3)",
                    e_cos / e_cos_fine
                ),
            ),
            (
                e_b >= 3.0 * e_b_fine,
                format!(
                    "ramp refinement: {e_b:.3e} -> {e_b_fine:.3e}, ratio {:.2} (need >= 3)",
                    e_b / e_b_fine
                ),
            ),
        ]
    })
}

fn criterion_5() -> Verdict {
    timed(5, "two-stage versus single-stage solves", 60, || {
        let a = 0.5f64.sqrt();
        let phi = TestFunction::cos();
        [
            ("degenerate", GParams::degenerate(0.0, 1.0).unwrap()),
            ("ambiguous", GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap()),
        ]
        .into_iter()
        .flat_map(|(name, gp)| {
            let cfg = SolverConfig::symmetric_for(&gp, 0.02, 1.0, Boundary::ClampPhi).unwrap();
            let coarse = semigroup_check(&gp, &phi, a, a, &cfg).unwrap();
            let fine = semigroup_check(&gp, &phi, a, a, &cfg.refined(&gp).unwrap()).unwrap();
            [
                (
                    coarse <= 1e-2,
                    format!("{name}: discrepancy {coarse:.3e} at dx = 0.02 (tol 1e-2)"),
                ),
                (
                    fine <= coarse.max(1e-12),
                    format!("{name}: refined discrepancy {fine:.3e} does not exceed {coarse:.3e}"),
                ),
            ]
        })
        .collect()
    })
}

fn criterion_6() -> Verdict {
    timed(6, "central-limit convergence presets", 600, || {
        let mut checks = Vec::new();
        let classical = ExperimentPreset::builtin("classical-cos")
            .unwrap()
            .run()
            .unwrap();
        let e256 = classical.report.row(256).map_or(f64::NAN, |r| r.e_n);
        checks.push((
            e256 <= 0.02,
            format!("classical-cos: e_256 = {e256:.3e} (tol 0.02)"),
        ));

        let amb = ExperimentPreset::builtin("g-ambiguous")
            .unwrap()
            .run()
            .unwrap();
        let rows = &amb.report.rows;
        let schedule: Vec<usize> = rows.iter().map(|r| r.n).collect();
        let (bumps, worst) = amb.report.non_monotone_steps();
        let final_e = amb.final_error();
        checks.push((
            schedule == [8, 16, 32, 64, 128],
            format!("g-ambiguous schedule {schedule:?}"),
        ));
        checks.push((
            bumps <= 1 && worst <= 0.2,
            format!(
                "g-ambiguous e_n = [{}]: {bumps} non-monotone step(s), worst growth {:.1}% (allow 1 step <= 20%)",
                rows.iter().map(|r| format!("{:.2e}", r.e_n)).collect::<Vec<_>>().join(", "),
                100.0 * worst
            ),
        ));
        checks.push((
            final_e <= 0.03,
            format!("g-ambiguous: final e = {final_e:.3e} (tol 0.03)"),
        ));

        let pert = ExperimentPreset::builtin("g-perturbed")
            .unwrap()
            .run()
            .unwrap();
        let p128 = pert.report.row(128).map(|r| r.lhs).unwrap_or(f64::NAN);
        let a128 = amb.report.row(128).map(|r| r.lhs).unwrap_or(f64::NAN);
        let pde = amb.report.rows[0].pde;
        let gap = (p128 - pde).abs();
        checks.push((
            gap <= 0.01,
            format!(
                "g-perturbed: |lhs_128 - limit| = {gap:.3e} (tol 0.01); lhs_128 = {p128:.6}, g-ambiguous lhs_128 = {a128:.6}, limit = {pde:.6}"
            ),
        ));
        checks
    })
}

fn criterion_7() -> Verdict {
    timed(
        7,
        "central-limit hypotheses on the shipped families",
        30,
        || {
            let pert = ExperimentPreset::builtin("g-perturbed").unwrap();
            let model = pert.model().unwrap();
            let report = check_conditions(&model, pert.quant_levels).unwrap();
            let max_eps = pert
                .eps_rule
                .sequence(model.len())
                .into_iter()
                .fold(0.0_f64, |m, e| m.max(e.abs()));
            let expected_m = (pert.gp.sigma_hi() * (1.0 + max_eps)).powi(3);
            let m_rel = (report.third_moment_bound - expected_m).abs() / expected_m;

            let iid = build_iid_family(&pert.gp, 2, 2, 16).unwrap();
            let iid_report = check_conditions(&iid, 2).unwrap();

            let c8 = report.cesaro_x_at(8).unwrap_or(f64::NAN);
            let c256 = report.cesaro_x_at(256).unwrap_or(f64::NAN);

            let mut zero_floor = serde_json::to_value(&pert).unwrap();
            zero_floor["gp"]["sigma2"][0] = serde_json::json!(0.0);
            let rejected = ExperimentPreset::from_json(&zero_floor.to_string()).is_err();
            vec![
                (
                    report.max_mean_residual() == 0.0 && iid_report.max_mean_residual() == 0.0,
                    format!(
                        "mean residuals: perturbed max {:e}, iid max {:e} (must be exactly 0)",
                        report.max_mean_residual(),
                        iid_report.max_mean_residual()
                    ),
                ),
                (
                    m_rel <= 1e-12 && iid_report.third_moment_bound == 8.0,
                    format!(
                        "M = {} vs sigma_hi^3 (1 + max eps)^3 = {expected_m}; iid M = {}",
                        report.third_moment_bound, iid_report.third_moment_bound
                    ),
                ),
                (
                    report.beta == pert.gp.sig2_lo(),
                    format!("beta = {} (sig2_lo = {})", report.beta, pert.gp.sig2_lo()),
                ),
                (
                    c256 <= c8 / 10.0,
                    format!(
                        "Cesàro X proxy: {c8:.3e} at n = 8, {c256:.3e} at n = 256 (need <= 1/10)"
                    ),
                ),
                (
                    rejected,
                    "preset with sig2_lo = 0 is rejected at load".to_string(),
                ),
            ]
        },
    )
}

fn main() {
    let verdicts = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
    ];
    println!("\nacceptance criteria");
    for v in &verdicts {
        v.print();
    }
    let failed = verdicts.iter().filter(|v| !v.passed()).count();
    println!(
        "{} of {} criteria passed\n",
        verdicts.len() - failed,
        verdicts.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

use gclt::clt::preset::{ExperimentPreset, Family};
use gclt::clt::{build_iid_family, build_perturbed_family, check_conditions, run_clt, EpsRule};
use gclt::gheat::{Boundary, SolverConfig};
use gclt::scenario::{bruteforce_nested, GridMode, NestedEvalConfig};
use gclt::suites::random_function;
use gclt::GParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lattice_runs_match_bruteforce_at_four() {
    let gp = GParams::new(-1.0, 1.0, 1.0, 4.0).unwrap();
    let model = build_iid_family(&gp, 2, 1, 4).unwrap();
    let pde = SolverConfig::symmetric_for(&gp, 0.1, 1.0, Boundary::ClampPhi).unwrap();
    let lattice = NestedEvalConfig::new(-8.0, 8.0, 129, GridMode::ExactLattice).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let phi = random_function(&mut rng, 1);
        let report = run_clt(&model, &phi, &[4], &lattice, &pde).unwrap();
        let brute = bruteforce_nested(&phi, &model, 4).unwrap();
        assert!((report.rows[0].lhs - brute).abs() <= 1e-12);
        assert_eq!(
            report.rows[0].e_n,
            (report.rows[0].lhs - report.rows[0].pde).abs()
        );
    }
}

#[test]
fn zero_perturbation_reproduces_the_base_family() {
    let gp = GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap();
    let base = build_iid_family(&gp, 2, 2, 32).unwrap();
    let same = build_perturbed_family(&base, &EpsRule::Zero.sequence(32)).unwrap();
    let r = check_conditions(&same, 3).unwrap();
    assert!(r.x_proxy.iter().chain(&r.y_proxy).all(|&d| d == 0.0));
    assert_eq!(r.third_moment_bound, 8.0);
}

#[test]
fn alternating_perturbation_is_cesaro_small() {
    let gp = GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap();
    let base = build_iid_family(&gp, 2, 2, 256).unwrap();
    let rule = EpsRule::Harmonic {
        offset: 4.0,
        alternating: true,
    };
    let pert = build_perturbed_family(&base, &rule.sequence(256)).unwrap();
    let r = check_conditions(&pert, 2).unwrap();
    assert_eq!(r.max_mean_residual(), 0.0);
    assert!(r.cesaro_x_at(256).unwrap() <= r.cesaro_x_at(8).unwrap() / 10.0);
    assert!(r.cesaro_y_at_end() < r.cesaro_y[7]);
}

trait CesaroY {
    fn cesaro_y_at_end(&self) -> f64;
}

impl CesaroY for gclt::clt::ConditionReport {
    fn cesaro_y_at_end(&self) -> f64 {
        *self.cesaro_y.last().unwrap()
    }
}

#[test]
fn preset_output_is_byte_identical_across_runs() {
    let mut preset = ExperimentPreset::builtin("g-perturbed").unwrap();
    assert_eq!(preset.family, Family::Perturbed);
    preset.n_schedule = vec![8, 16, 32];
    preset.dp.spacing = 0.02;
    let dir = std::env::temp_dir().join(format!("gclt-determinism-{}", std::process::id()));
    let read = |sub: &str| {
        let out = preset.run().unwrap();
        let (csv, json) = out.write(&dir.join(sub)).unwrap();
        (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap())
    };
    assert_eq!(read("a"), read("b"));
    std::fs::remove_dir_all(&dir).ok();
}

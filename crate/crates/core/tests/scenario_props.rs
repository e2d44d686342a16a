use gclt::clt::{build_iid_family, covering_grid, cross_space_check, SequenceModel};
use gclt::scenario::io::{parse_steps, to_json};
use gclt::scenario::{
    expect, lower_expect, nested_expect, nested_expect_weighted, DiscreteDistribution, GridMode,
    NestedEvalConfig, ScenarioSet, StepWeights,
};
use gclt::suites::{random_function, random_lattice_steps, random_scenario_set};
use gclt::{GParams, TestFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_dist() -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::btree_map(-40i32..40, 1u32..20, 1..5).prop_map(|atoms| {
        let total: u32 = atoms.values().sum();
        DiscreteDistribution::normalized(
            1,
            atoms
                .into_iter()
                .map(|(x, w)| (vec![x as f64 / 8.0], w as f64 / total as f64)),
            1e-9,
        )
        .unwrap()
    })
}

fn arb_set() -> impl Strategy<Value = ScenarioSet> {
    prop::collection::vec(arb_dist(), 1..4).prop_map(|d| ScenarioSet::new("arb", d).unwrap())
}

proptest! {
    #[test]
    fn lower_never_exceeds_upper(s in arb_set(), a in -2.0f64..2.0, b in -1.0f64..1.0) {
        let phi = TestFunction::scalar("f", 1.0, f64::INFINITY, move |x| (a * x + b).sin() + b * x);
        prop_assert!(lower_expect(&phi, &s).unwrap() <= expect(&phi, &s).unwrap() + 1e-12);
    }

    #[test]
    fn constants_translate(s in arb_set(), c in -5.0f64..5.0) {
        let phi = TestFunction::square();
        let shifted = phi.plus(&TestFunction::constant(c, 1));
        let lhs = expect(&shifted, &s).unwrap();
        let rhs = expect(&phi, &s).unwrap() + c;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn upper_is_max_of_scenario_means(s in arb_set()) {
        let phi = TestFunction::cos();
        let direct = s.dists().iter().map(|d| d.mean_of(|p| p[0].cos())).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(expect(&phi, &s).unwrap(), direct);
    }

    #[test]
    fn json_round_trip_preserves_expectations(sets in prop::collection::vec(arb_set(), 1..4)) {
        let (_, back) = parse_steps(&to_json("rt", &sets).unwrap()).unwrap();
        let phi = TestFunction::scalar("ramp", 1.0, f64::INFINITY, |x| x.max(0.0));
        for (a, b) in sets.iter().zip(&back) {
            prop_assert!((expect(&phi, a).unwrap() - expect(&phi, b).unwrap()).abs() <= 1e-15);
        }
    }

    #[test]
    fn removing_a_scenario_never_increases_the_nested_value(seed in 0u64..10_000, n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = random_lattice_steps(&mut rng, n, 3, 3).unwrap();
        let phi = random_function(&mut rng, 1);
        let cfg = NestedEvalConfig::new(-30.0, 30.0, 121, GridMode::ExactLattice).unwrap();
        let full = nested_expect_weighted(&phi, &steps, StepWeights::unit(), &cfg).unwrap();
        for i in 0..steps.len() {
            for k in 0..steps[i].len() {
                if let Some(smaller) = steps[i].without(k) {
                    let mut reduced = steps.clone();
                    reduced[i] = smaller;
                    let v = nested_expect_weighted(&phi, &reduced, StepWeights::unit(), &cfg).unwrap();
                    prop_assert!(v <= full + 1e-12, "step {i} scenario {k}: {v} > {full}");
                }
            }
        }
    }
}

fn ambiguous_model(n: usize) -> SequenceModel {
    build_iid_family(&GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap(), 2, 2, n).unwrap()
}

#[test]
fn cross_space_reencodings_agree() {
    let model = ambiguous_model(12);
    let cfg = covering_grid(&model, &[12], 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let worst = (0..50u64)
        .map(|trial| {
            let phi = random_function(&mut rng, 1);
            cross_space_check(&model, &phi, 12, &cfg, trial).unwrap()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn grid_halving_shrinks_interpolation_error() {
    let model = ambiguous_model(32);
    let phi = TestFunction::cos();
    let values: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&h| {
            nested_expect(&phi, &model, 32, &covering_grid(&model, &[32], h).unwrap()).unwrap()
        })
        .collect();
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    for g in gaps.windows(2) {
        assert!(g[1] <= 0.5 * g[0], "{gaps:?}");
    }
}

#[test]
fn interp_mode_matches_lattice_mode_on_lattice_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let steps = random_lattice_steps(&mut rng, 3, 3, 3).unwrap();
        let phi = random_function(&mut rng, 1);
        let lattice = NestedEvalConfig::new(-30.0, 30.0, 121, GridMode::ExactLattice).unwrap();
        let a = nested_expect_weighted(&phi, &steps, StepWeights::unit(), &lattice).unwrap();
        let b = nested_expect_weighted(
            &phi,
            &steps,
            StepWeights::unit(),
            &lattice.clone().with_mode(GridMode::GridInterp),
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn random_sets_have_consistent_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in 1..=2 {
        let s = random_scenario_set(&mut rng, dim, 3, 3).unwrap();
        assert_eq!(s.dim(), dim);
        assert!(s.support().all(|p| p.len() == dim));
    }
}

#[cfg(feature = "parallel")]
#[test]
fn nested_value_is_thread_count_invariant() {
    let model = ambiguous_model(64);
    let phi = TestFunction::relu_clip(12.5);
    let cfg = covering_grid(&model, &[64], 0.005).unwrap();
    let parallel = nested_expect(&phi, &model, 64, &cfg).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| nested_expect(&phi, &model, 64, &cfg).unwrap());
    assert_eq!(parallel.to_bits(), single.to_bits());
}

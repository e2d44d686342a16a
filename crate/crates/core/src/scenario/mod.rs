//! Sublinear expectations over finite scenario sets.
//!
//! `Ê[φ] = max_{P ∈ S} E_P[φ]` for a finite family `S` of discrete laws. This
//! construction satisfies monotonicity, constant preservation,
//! sub-additivity and positive homogeneity exactly, so every quantity here is
//! computable without sampling.

mod distribution;
mod expect;
mod function;
pub mod io;
mod nested;

pub use distribution::{DiscreteDistribution, ScenarioSet, WEIGHT_SUM_TOL};
pub use expect::{
    expect, expect_with, holder_check, holder_report, identically_distributed,
    independent_pair_expect, lower_expect, verify_axioms, AxiomOutcome, AxiomReport, HolderReport,
};
pub use function::TestFunction;
pub use nested::{
    bruteforce_nested, bruteforce_nested_weighted, nested_expect, nested_expect_weighted,
    policy_count, GridMode, NestedEvalConfig, StepWeights, DEFAULT_POLICY_CAP,
};

//! Central-limit harness: builds sequences `{(Xᵢ, Yᵢ)}`, checks the
//! central-limit hypotheses on them and measures
//! `eₙ = |Ê[φ(Sₙ/√n + Tₙ/n)] - Ê[φ(ξ + ζ)]|` along a schedule of `n`.

mod conditions;
mod model;
pub mod preset;
mod runner;

pub use conditions::{check_conditions, ConditionReport};
pub use model::{build_iid_family, build_perturbed_family, even_grid, EpsRule, SequenceModel};
pub use runner::{
    covering_grid, cross_space_check, reencode_step, run_clt, ConvergenceReport, ConvergenceRow,
};

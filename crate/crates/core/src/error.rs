use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error(
        "distribution {index}: dimension {found} does not match expected dimension {expected}"
    )]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("test function has dimension {function} but the scenario set has dimension {set}")]
    FunctionDimension { function: usize, set: usize },

    #[error("scenario set `{0}` has no distributions")]
    EmptyScenarioSet(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid exponents p = {p}, q = {q}: need p, q > 1 and 1/p + 1/q = 1")]
    InvalidExponents { p: f64, q: f64 },

    #[error("state grid [{lo}, {hi}] does not cover the reachable sums [{need_lo}, {need_hi}]")]
    GridCoverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("lattice validation failed: {0}")]
    Lattice(String),

    #[error("policy enumeration would visit {count:.3e} policies, above the cap of {cap}")]
    PolicyCap { count: f64, cap: u64 },

    #[error("CFL violated: dt = {dt} exceeds the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("non-finite value at time step {step}, node {node}")]
    NonFinite { step: usize, node: usize },

    #[error("x = {x} lies outside the grid [{lo}, {hi}]")]
    OutOfGrid { x: f64, lo: f64, hi: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

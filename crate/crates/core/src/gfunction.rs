//! The sublinear generator `G(p, a) = Ê[p·ζ + ½·a·ξ²]` for a mean interval
//! on `ζ` and a variance interval on `ξ`.
//!
//! Over the rectangle `[μ̲, μ̄] × [σ̲², σ̄²]` the map is affine in the
//! corner, so `G(p, a) = max(p·μ̲, p·μ̄) + ½·max(a·σ̲², a·σ̄²)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::AxiomOutcome;

#[derive(Debug, Clone, Copy, Deserialize)]
struct RawGParams {
    mu: [f64; 2],
    sigma2: [f64; 2],
}

/// Mean interval for `ζ` and variance interval for `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGParams", into = "RawGParamsOut")]
pub struct GParams {
    mu_lo: f64,
    mu_hi: f64,
    sig2_lo: f64,
    sig2_hi: f64,
}

#[derive(Serialize)]
struct RawGParamsOut {
    mu: [f64; 2],
    sigma2: [f64; 2],
}

impl From<GParams> for RawGParamsOut {
    fn from(g: GParams) -> Self {
        Self {
            mu: [g.mu_lo, g.mu_hi],
            sigma2: [g.sig2_lo, g.sig2_hi],
        }
    }
}

impl TryFrom<RawGParams> for GParams {
    type Error = Error;

    fn try_from(raw: RawGParams) -> Result<Self> {
        Self::new(raw.mu[0], raw.mu[1], raw.sigma2[0], raw.sigma2[1])
    }
}

impl GParams {
    /// Requires `mu_lo ≤ mu_hi` and `0 < sig2_lo ≤ sig2_hi`; a zero variance
    /// floor would break uniform ellipticity.
    pub fn new(mu_lo: f64, mu_hi: f64, sig2_lo: f64, sig2_hi: f64) -> Result<Self> {
        let finite = [mu_lo, mu_hi, sig2_lo, sig2_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite || mu_lo > mu_hi {
            return Err(Error::InvalidParams(format!(
                "mean interval [{mu_lo}, {mu_hi}] is not a valid interval"
            )));
        }
        if !(sig2_lo > 0.0) {
            return Err(Error::InvalidParams(format!(
                "variance floor sigma2_lo = {sig2_lo} must be strictly positive (ellipticity)"
            )));
        }
        if sig2_lo > sig2_hi {
            return Err(Error::InvalidParams(format!(
                "variance interval [{sig2_lo}, {sig2_hi}] is not a valid interval"
            )));
        }
        Ok(Self {
            mu_lo,
            mu_hi,
            sig2_lo,
            sig2_hi,
        })
    }

    /// Point intervals: the classical normal `N(mu, sig2)` case.
    pub fn degenerate(mu: f64, sig2: f64) -> Result<Self> {
        Self::new(mu, mu, sig2, sig2)
    }

    pub fn mu_lo(&self) -> f64 {
        self.mu_lo
    }

    pub fn mu_hi(&self) -> f64 {
        self.mu_hi
    }

    pub fn sig2_lo(&self) -> f64 {
        self.sig2_lo
    }

    pub fn sig2_hi(&self) -> f64 {
        self.sig2_hi
    }

    /// `max(|μ̲|, |μ̄|)`
    pub fn mu_abs_max(&self) -> f64 {
        self.mu_lo.abs().max(self.mu_hi.abs())
    }

    /// `σ̄ = √σ̄²`
    pub fn sigma_hi(&self) -> f64 {
        self.sig2_hi.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.mu_lo == self.mu_hi && self.sig2_lo == self.sig2_hi
    }

    /// The four `(q, σ²)` corners of the uncertainty rectangle.
    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.mu_lo, self.sig2_lo),
            (self.mu_lo, self.sig2_hi),
            (self.mu_hi, self.sig2_lo),
            (self.mu_hi, self.sig2_hi),
        ]
    }

    /// `G(p, a)`.
    #[inline]
    pub fn g_eval(&self, p: f64, a: f64) -> f64 {
        (p * self.mu_lo).max(p * self.mu_hi) + 0.5 * (a * self.sig2_lo).max(a * self.sig2_hi)
    }

    /// Ellipticity modulus: `G(0, 2a) - G(0, 2ā) ≥ β (a - ā)` for `a ≥ ā`,
    /// tight at `β = σ̲²`.
    pub fn beta(&self) -> f64 {
        self.sig2_lo
    }
}

/// Free-function form of [`GParams::g_eval`].
pub fn g_eval(gp: &GParams, p: f64, a: f64) -> f64 {
    gp.g_eval(p, a)
}

pub fn beta(gp: &GParams) -> f64 {
    gp.beta()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GPropertyReport {
    pub seed: u64,
    pub sub_additivity: AxiomOutcome,
    pub positive_homogeneity: AxiomOutcome,
    pub monotonicity: AxiomOutcome,
    pub continuity: AxiomOutcome,
}

impl GPropertyReport {
    pub fn outcomes(&self) -> [(&'static str, &AxiomOutcome); 4] {
        [
            ("sub_additivity", &self.sub_additivity),
            ("positive_homogeneity", &self.positive_homogeneity),
            ("monotonicity", &self.monotonicity),
            ("continuity", &self.continuity),
        ]
    }

    pub fn passed(&self) -> bool {
        self.outcomes().iter().all(|(_, o)| o.passed())
    }

    pub fn violation_count(&self) -> usize {
        self.outcomes()
            .iter()
            .map(|(_, o)| o.violations.len())
            .sum()
    }
}

const G_LAMBDAS: [f64; 4] = [0.0, 0.5, 1.0, 3.0];

fn record(outcome: &mut AxiomOutcome, ok: bool, witness: impl FnOnce() -> String) {
    outcome.checked += 1;
    if !ok {
        outcome.violations.push(witness());
    }
}

/// Randomised check of sub-additivity, positive homogeneity, monotonicity in
/// `a` and the linear-growth bound that gives continuity at the origin.
pub fn verify_g_properties(
    gp: &GParams,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<GPropertyReport> {
    if samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GPropertyReport {
        seed,
        ..Default::default()
    };
    for _ in 0..samples {
        let (p, a): (f64, f64) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let (pb, ab): (f64, f64) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let g = gp.g_eval(p, a);

        let lhs = gp.g_eval(p + pb, a + ab);
        let rhs = g + gp.g_eval(pb, ab);
        record(&mut report.sub_additivity, lhs <= rhs + tol, || {
            format!("G({}, {}) = {lhs} > {rhs}", p + pb, a + ab)
        });

        for lambda in G_LAMBDAS {
            let scaled = gp.g_eval(lambda * p, lambda * a);
            record(
                &mut report.positive_homogeneity,
                (scaled - lambda * g).abs() <= tol,
                || format!("G({lambda}·({p}, {a})) = {scaled} ≠ {}", lambda * g),
            );
        }

        let (hi, lo) = if a >= ab { (a, ab) } else { (ab, a) };
        let (g_hi, g_lo) = (gp.g_eval(p, hi), gp.g_eval(p, lo));
        record(&mut report.monotonicity, g_hi >= g_lo - tol, || {
            format!("G({p}, {hi}) = {g_hi} < G({p}, {lo}) = {g_lo}")
        });

        let bound = gp.mu_abs_max() * p.abs() + 0.5 * gp.sig2_hi * a.abs();
        record(&mut report.continuity, g.abs() <= bound + tol, || {
            format!("|G({p}, {a})| = {} exceeds growth bound {bound}", g.abs())
        });
    }
    Ok(report)
}

/// Searches for `a ≥ ā` with `G(0, 2a) - G(0, 2ā) < candidate·(a - ā)`.
///
/// Returns the first witness, or `None` if `candidate` survives every sample.
pub fn find_ellipticity_witness(
    gp: &GParams,
    candidate: f64,
    samples: usize,
    seed: u64,
) -> Option<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).find_map(|_| {
        let (x, y): (f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (a, ab) = if x >= y { (x, y) } else { (y, x) };
        let gap = gp.g_eval(0.0, 2.0 * a) - gp.g_eval(0.0, 2.0 * ab);
        (gap < candidate * (a - ab) - 1e-12 * (1.0 + gap.abs())).then_some((a, ab))
    })
}

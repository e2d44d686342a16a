//! JSON encoding of scenario sets and step sequences.
//!
//! ```json
//! { "label": "rademacher",
//!   "steps": [ { "dists": [ { "atoms": [[-1, 0, 0.5], [1, 0, 0.5]] } ] } ] }
//! ```
//!
//! An atom is `[x, w]` (one-dimensional) or `[x, y, w]` (two-dimensional).
//! Duplicate points are merged and weights whose total is within
//! [`RENORM_TOL`] of one are rescaled; anything else is rejected.

use serde::{Deserialize, Serialize};

use super::{DiscreteDistribution, ScenarioSet};
use crate::error::{Error, Result};

pub const RENORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDist {
    pub atoms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawStep {
    pub dists: Vec<RawDist>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSteps {
    #[serde(default)]
    pub label: String,
    pub steps: Vec<RawStep>,
}

impl RawDist {
    pub fn from_dist(d: &DiscreteDistribution) -> Self {
        Self {
            atoms: d
                .atoms()
                .map(|(p, w)| p.iter().copied().chain([w]).collect())
                .collect(),
        }
    }

    /// `index` is only used in error messages.
    pub fn build(&self, index: usize) -> Result<DiscreteDistribution> {
        let Some(first) = self.atoms.first() else {
            return Err(Error::InvalidDistribution(format!(
                "distribution {index} has no atoms"
            )));
        };
        let dim = first.len().saturating_sub(1);
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidDistribution(format!(
                "distribution {index}: atoms must be [x, w] or [x, y, w], got {} entries",
                first.len()
            )));
        }
        if let Some(bad) = self.atoms.iter().find(|a| a.len() != dim + 1) {
            return Err(Error::DimensionMismatch {
                index,
                expected: dim,
                found: bad.len().saturating_sub(1),
            });
        }
        DiscreteDistribution::normalized(
            dim,
            self.atoms.iter().map(|a| (a[..dim].to_vec(), a[dim])),
            RENORM_TOL,
        )
        .map_err(|e| match e {
            Error::InvalidDistribution(msg) => {
                Error::InvalidDistribution(format!("distribution {index}: {msg}"))
            }
            other => other,
        })
    }
}

impl RawStep {
    pub fn from_set(s: &ScenarioSet) -> Self {
        Self {
            dists: s.dists().iter().map(RawDist::from_dist).collect(),
        }
    }

    pub fn build(&self, label: &str) -> Result<ScenarioSet> {
        let dists = self
            .dists
            .iter()
            .enumerate()
            .map(|(i, d)| d.build(i))
            .collect::<Result<Vec<_>>>()?;
        ScenarioSet::new(label, dists)
    }
}

impl RawSteps {
    pub fn from_sets(label: impl Into<String>, steps: &[ScenarioSet]) -> Self {
        Self {
            label: label.into(),
            steps: steps.iter().map(RawStep::from_set).collect(),
        }
    }

    pub fn build(&self) -> Result<Vec<ScenarioSet>> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| s.build(&format!("{}#{i}", self.label)))
            .collect()
    }
}

/// Parses a step document. JSON syntax errors carry line and column.
pub fn parse_steps(json: &str) -> Result<(String, Vec<ScenarioSet>)> {
    let raw: RawSteps = serde_json::from_str(json)?;
    let steps = raw.build()?;
    if steps.is_empty() {
        return Err(Error::InvalidParams("document has no steps".into()));
    }
    Ok((raw.label, steps))
}

pub fn to_json(label: &str, steps: &[ScenarioSet]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&RawSteps::from_sets(
        label, steps,
    ))?)
}

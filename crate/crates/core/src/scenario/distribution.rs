use crate::error::{Error, Result};

/// Weights of a validated distribution sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported probability law on `R^k`, `k ∈ {1, 2}`.
///
/// Points are stored flat (`dim` coordinates per atom) and are pairwise
/// distinct; weights are non-negative and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Builds a distribution from `(point, weight)` pairs, validating every invariant.
    pub fn new(dim: usize, atoms: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidDistribution(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, (p, w)) in atoms.into_iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            points.extend_from_slice(&p);
            weights.push(w);
        }
        let d = Self {
            dim,
            points,
            weights,
        };
        d.validate()?;
        Ok(d)
    }

    /// One-dimensional convenience constructor from `(x, weight)` pairs.
    pub fn from_1d(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(1, atoms.iter().map(|&(x, w)| (vec![x], w)))
    }

    /// Two-dimensional convenience constructor from `(x, y, weight)` triples.
    pub fn from_2d(atoms: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(2, atoms.iter().map(|&(x, y, w)| (vec![x, y], w)))
    }

    /// A point mass.
    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        let dim = point.len();
        Self::new(dim, [(point, 1.0)])
    }

    /// Loader-style normalisation: atoms at identical points are merged by
    /// summing their weights, and a weight total within `renorm_tol` of one
    /// is rescaled to exactly one. Anything further off is rejected.
    pub fn normalized(
        dim: usize,
        raw: impl IntoIterator<Item = (Vec<f64>, f64)>,
        renorm_tol: f64,
    ) -> Result<Self> {
        let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
        for (i, (p, w)) in raw.into_iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} has invalid weight {w}"
                )));
            }
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some((_, acc)) => *acc += w,
                None => merged.push((p, w)),
            }
        }
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > renorm_tol {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, outside 1 ± {renorm_tol}"
            )));
        }
        if total != 1.0 {
            for (_, w) in &mut merged {
                *w /= total;
            }
        }
        Self::new(dim, merged)
    }

    fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if let Some(x) = self.points.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "non-finite coordinate {x}"
            )));
        }
        if let Some((i, w)) = self
            .weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "atom {i} has invalid weight {w}"
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.point(i) == self.point(j) {
                    return Err(Error::InvalidDistribution(format!(
                        "atoms {i} and {j} share the point {:?}",
                        self.point(i)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Classical expectation `Σ wᵢ f(pᵢ)`, summed in atom order.
    pub fn mean_of(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.atoms().map(|(p, w)| w * f(p)).sum()
    }

    /// Applies `f` to every point, keeping weights and order.
    ///
    /// Fails if the mapped points collide.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut dim = None;
        let atoms: Vec<_> = self
            .atoms()
            .map(|(p, w)| {
                let q = f(p);
                dim.get_or_insert(q.len());
                (q, w)
            })
            .collect();
        Self::new(dim.unwrap_or(self.dim), atoms)
    }
}

/// A finite non-empty family of discrete laws of a common dimension.
///
/// Its upper envelope is the sublinear expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    dists: Vec<DiscreteDistribution>,
    label: String,
}

impl ScenarioSet {
    pub fn new(label: impl Into<String>, dists: Vec<DiscreteDistribution>) -> Result<Self> {
        let label = label.into();
        let Some(first) = dists.first() else {
            return Err(Error::EmptyScenarioSet(label));
        };
        let expected = first.dim();
        if let Some((index, d)) = dists.iter().enumerate().find(|(_, d)| d.dim() != expected) {
            return Err(Error::DimensionMismatch {
                index,
                expected,
                found: d.dim(),
            });
        }
        Ok(Self { dists, label })
    }

    /// A set with a single law: the classical (non-ambiguous) case.
    pub fn single(label: impl Into<String>, dist: DiscreteDistribution) -> Self {
        Self {
            dists: vec![dist],
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dists[0].dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dists(&self) -> &[DiscreteDistribution] {
        &self.dists
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    /// All atom points across every scenario (with repetition).
    pub fn support(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.dists.iter().flat_map(|d| d.atoms().map(|(p, _)| p))
    }

    /// Marginal scenario set of one coordinate.
    pub fn marginal(&self, coord: usize) -> Result<Self> {
        let dists = self
            .dists
            .iter()
            .map(|d| {
                DiscreteDistribution::normalized(
                    1,
                    d.atoms().map(|(p, w)| (vec![p[coord]], w)),
                    1e-9,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("{}[{coord}]", self.label), dists)
    }

    /// Same family with the scenarios listed in a different order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            dists: order.iter().map(|&i| self.dists[i].clone()).collect(),
            label: self.label.clone(),
        }
    }

    /// Drops scenario `index`; `None` if it is the only one.
    pub fn without(&self, index: usize) -> Option<Self> {
        (self.dists.len() > 1).then(|| {
            let mut dists = self.dists.clone();
            dists.remove(index);
            Self {
                dists,
                label: self.label.clone(),
            }
        })
    }
}

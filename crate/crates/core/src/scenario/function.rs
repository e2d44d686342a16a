use std::fmt;
use std::sync::Arc;

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A test function `φ: R^k → R` with declared Lipschitz and sup bounds.
///
/// The bounds are declarations used for error control and spot checks; they
/// are not proven. Unbounded functions declare `f64::INFINITY`.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    dim: usize,
    lipschitz_bound: f64,
    sup_bound: f64,
    eval: Evaluator,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        lipschitz_bound: f64,
        sup_bound: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            lipschitz_bound,
            sup_bound,
            eval: Arc::new(f),
        }
    }

    /// One-dimensional function of a scalar argument.
    pub fn scalar(
        label: impl Into<String>,
        lipschitz_bound: f64,
        sup_bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, 1, lipschitz_bound, sup_bound, move |p| f(p[0]))
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        Self::new(format!("const({c})"), dim, 0.0, c.abs(), move |_| c)
    }

    pub fn identity() -> Self {
        Self::scalar("x", 1.0, f64::INFINITY, |x| x)
    }

    pub fn square() -> Self {
        Self::scalar("x^2", f64::INFINITY, f64::INFINITY, |x| x * x)
    }

    pub fn cos() -> Self {
        Self::scalar("cos", 1.0, 1.0, f64::cos)
    }

    /// `min(max(x, 0), cap)`: the ramp clipped at `cap`, bounded and 1-Lipschitz.
    pub fn relu_clip(cap: f64) -> Self {
        Self::scalar(format!("relu_clip({cap})"), 1.0, cap.abs(), move |x| {
            x.max(0.0).min(cap)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    #[inline]
    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        (self.eval)(&[x])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `λ·φ` for `λ ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let f = self.eval.clone();
        Self::new(
            format!("{lambda}*{}", self.label),
            self.dim,
            lambda.abs() * self.lipschitz_bound,
            lambda.abs() * self.sup_bound,
            move |p| lambda * f(p),
        )
    }

    /// `-φ`.
    pub fn negated(&self) -> Self {
        let f = self.eval.clone();
        Self::new(
            format!("-{}", self.label),
            self.dim,
            self.lipschitz_bound,
            self.sup_bound,
            move |p| -f(p),
        )
    }

    /// `φ + ψ`; both must share a dimension.
    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(
            format!("{}+{}", self.label, other.label),
            self.dim,
            self.lipschitz_bound + other.lipschitz_bound,
            self.sup_bound + other.sup_bound,
            move |p| f(p) + g(p),
        )
    }

    /// Lifts a scalar function to act on coordinate `coord` of a `dim`-vector.
    pub fn on_coordinate(&self, coord: usize, dim: usize) -> Self {
        debug_assert_eq!(self.dim, 1);
        let f = self.eval.clone();
        Self::new(
            format!("{}(p[{coord}])", self.label),
            dim,
            self.lipschitz_bound,
            self.sup_bound,
            move |p| f(&[p[coord]]),
        )
    }

    /// Spot-checks the declared sup bound at the given points.
    pub fn respects_sup_bound<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> bool {
        points
            .into_iter()
            .all(|p| self.eval(p).abs() <= self.sup_bound * (1.0 + 1e-12))
    }
}

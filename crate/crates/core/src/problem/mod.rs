//! Objective functions: the evaluation surface the solvers consume, the
//! built-in analytic suite, finite-sum problems and the mini-batch oracle.

mod finite_sum;
mod oracle;
mod suite;

pub use finite_sum::{
    ComponentModel, Dataset, FiniteSum, FiniteSumObjective, FiniteSumProblem, LinearLeastSquares,
    QuadraticFiniteSum, TwoLayerNetwork,
};
pub use oracle::{Batch, Estimates, Stream, StochasticOracle};
pub use suite::{
    build, registry, starting_points, Beale, Himmelblau, MonkeySaddle, QuarticSaddle,
    RandomQuadratic, RegistryEntry, Rosenbrock, Sphere, StyblinskiTang, TrigSum, REGISTRY_SEED,
};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::linalg::{all_finite, SymMatrix};
use crate::{Error, Result};

/// Lipschitz constants valid on a documented region, for fixed-stepsize
/// experiments. They are not claimed to hold globally.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalConstants {
    /// Gradient Lipschitz constant `L`.
    pub gradient: f64,
    /// Hessian Lipschitz constant `sigma`; zero for quadratics.
    pub hessian: f64,
}

/// A twice continuously differentiable function on `R^n`.
///
/// Implementations return exact (analytic) derivatives and must produce an
/// exactly symmetric Hessian.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> SymMatrix;

    /// Known `f_inf` with `f(x) >= f_inf` everywhere.
    fn lower_bound(&self) -> Option<f64> {
        None
    }

    /// For test assertions only.
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn local_constants(&self) -> Option<LocalConstants> {
        None
    }

    fn default_start(&self) -> Vec<f64>;
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> SymMatrix {
        (**self).hessian(x)
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
    fn known_minimizers(&self) -> Vec<Vec<f64>> {
        (**self).known_minimizers()
    }
    fn local_constants(&self) -> Option<LocalConstants> {
        (**self).local_constants()
    }
    fn default_start(&self) -> Vec<f64> {
        (**self).default_start()
    }
}

/// Counting, validating wrapper around an [`Objective`].
///
/// Every call checks the point's dimension and finiteness and the result's
/// finiteness. Function, gradient and Hessian evaluations are counted here
/// so solvers never have to.
pub struct Problem {
    inner: Box<dyn Objective>,
    fevals: AtomicUsize,
    gevals: AtomicUsize,
    hevals: AtomicUsize,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.inner.name())
            .field("dimension", &self.inner.dimension())
            .field("fevals", &self.fevals())
            .finish()
    }
}

impl Problem {
    pub fn new(objective: impl Objective + 'static) -> Self {
        Self::from_boxed(Box::new(objective))
    }

    pub fn from_boxed(inner: Box<dyn Objective>) -> Self {
        Problem {
            inner,
            fevals: AtomicUsize::new(0),
            gevals: AtomicUsize::new(0),
            hevals: AtomicUsize::new(0),
        }
    }

    /// Looks up a built-in problem by registry name.
    pub fn by_name(name: &str) -> Option<Self> {
        build(name).map(Self::from_boxed)
    }

    pub fn objective(&self) -> &dyn Objective {
        &*self.inner
    }

    pub fn name(&self) -> String {
        String::from(self.inner.name())
    }

    pub fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.inner.lower_bound()
    }

    pub fn local_constants(&self) -> Option<LocalConstants> {
        self.inner.local_constants()
    }

    pub fn default_start(&self) -> Vec<f64> {
        self.inner.default_start()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: x.len() });
        }
        if !all_finite(x) {
            return Err(Error::EvaluationFailure { quantity: "point", x: x.to_vec() });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.fevals.fetch_add(1, Ordering::Relaxed);
        let f = self.inner.value(x);
        if !f.is_finite() {
            return Err(Error::EvaluationFailure { quantity: "function value", x: x.to_vec() });
        }
        Ok(f)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.gevals.fetch_add(1, Ordering::Relaxed);
        let g = self.inner.gradient(x);
        if !all_finite(&g) {
            return Err(Error::EvaluationFailure { quantity: "gradient", x: x.to_vec() });
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<SymMatrix> {
        self.check_point(x)?;
        self.hevals.fetch_add(1, Ordering::Relaxed);
        let h = self.inner.hessian(x);
        if !h.is_finite() {
            return Err(Error::EvaluationFailure { quantity: "hessian", x: x.to_vec() });
        }
        Ok(h)
    }

    pub fn fevals(&self) -> usize {
        self.fevals.load(Ordering::Relaxed)
    }

    pub fn gevals(&self) -> usize {
        self.gevals.load(Ordering::Relaxed)
    }

    pub fn hevals(&self) -> usize {
        self.hevals.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.fevals.store(0, Ordering::Relaxed);
        self.gevals.store(0, Ordering::Relaxed);
        self.hevals.store(0, Ordering::Relaxed);
    }
}

//! Objective-function contract and test problems.
//!
//! A [`Problem`] is a box-constrained objective with an analytic gradient.
//! Problems are immutable and cheap to clone; evaluation is pure and may be
//! called from several threads at once.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use thiserror::Error;

mod analytic;
mod fd;
mod generator;

pub use analytic::{analytic_suite, Quadratic, TrigSum};
pub use fd::fd_check;
pub use generator::{
    basin_function, generate, BasinFunction, ClassManifest, Difficulty, GenerateError, GeneratorParams,
    ManifestEntry, ProblemClass,
};

/// Something that can be minimized: a scalar function and its gradient.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("objective returned a non-finite value {value} at {x:?}")]
    NonFiniteValue { x: Vec<f64>, value: f64 },
    #[error("gradient has a non-finite component at {x:?}")]
    NonFiniteGradient { x: Vec<f64> },
    #[error("gradient has length {got}, expected {expected}")]
    GradientLength { got: usize, expected: usize },
}

/// Global minimizer and minimum value, when known.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownOptimum {
    pub x: Vec<f64>,
    pub f: f64,
}

/// Call counters attached by [`Problem::audited`].
#[derive(Debug, Default)]
pub struct EvalAudit {
    values: AtomicUsize,
    gradients: AtomicUsize,
}

impl EvalAudit {
    pub fn value_calls(&self) -> usize {
        self.values.load(Ordering::Relaxed)
    }

    pub fn gradient_calls(&self) -> usize {
        self.gradients.load(Ordering::Relaxed)
    }
}

struct Audited {
    inner: Arc<dyn Objective>,
    audit: Arc<EvalAudit>,
}

impl Objective for Audited {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.audit.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.audit.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }
}

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Arc<dyn Objective>,
    pub known_opt: Option<KnownOptimum>,
    /// Lipschitz constant of the gradient over the domain, when known.
    pub known_k: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("known_opt", &self.known_opt)
            .field("known_k", &self.known_k)
            .finish()
    }
}

impl Problem {
    /// Panics if the bounds are inconsistent with each other or with the
    /// objective's dimension.
    pub fn new(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: Arc<dyn Objective>,
    ) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound vectors differ in length");
        assert_eq!(lower.len(), objective.dim(), "bounds do not match objective dimension");
        assert!(!lower.is_empty(), "dimension must be positive");
        for (lo, hi) in lower.iter().zip(&upper) {
            assert!(lo < hi, "empty domain side [{lo}, {hi}]");
        }
        Problem {
            name: name.into(),
            lower,
            upper,
            objective,
            known_opt: None,
            known_k: None,
        }
    }

    pub fn with_optimum(mut self, x: Vec<f64>, f: f64) -> Self {
        self.known_opt = Some(KnownOptimum { x, f });
        self
    }

    pub fn with_gradient_lipschitz(mut self, k: f64) -> Self {
        self.known_k = Some(k);
        self
    }

    /// Clone of this problem whose evaluations are counted.
    pub fn audited(&self) -> (Problem, Arc<EvalAudit>) {
        let audit = Arc::new(EvalAudit::default());
        let mut p = self.clone();
        p.objective = Arc::new(Audited {
            inner: self.objective.clone(),
            audit: audit.clone(),
        });
        (p, audit)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Objective value only; never touches the gradient.
    pub fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        let value = self.objective.value(x);
        if !value.is_finite() {
            return Err(EvalError::NonFiniteValue { x: x.to_vec(), value });
        }
        Ok(value)
    }

    /// One trial: the objective value together with its gradient.
    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        let value = self.value(x)?;
        let grad = self.objective.gradient(x);
        if grad.len() != self.dim() {
            return Err(EvalError::GradientLength { got: grad.len(), expected: self.dim() });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(EvalError::NonFiniteGradient { x: x.to_vec() });
        }
        Ok((value, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Nan;

    impl Objective for Nan {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, _: &[f64]) -> f64 {
            f64::NAN
        }
        fn gradient(&self, _: &[f64]) -> Vec<f64> {
            vec![0.0]
        }
    }

    #[test]
    fn non_finite_values_are_errors() {
        let p = Problem::new("nan", vec![0.0], vec![1.0], Arc::new(Nan));
        assert!(matches!(p.value(&[0.5]), Err(EvalError::NonFiniteValue { .. })));
    }

    #[test]
    fn audit_counts_value_and_gradient_separately() {
        let p = Quadratic::sphere(vec![0.3, 0.7]).into_problem("q", vec![0.0; 2], vec![1.0; 2]);
        let (p, audit) = p.audited();
        p.value(&[0.1, 0.1]).unwrap();
        p.value_and_gradient(&[0.1, 0.1]).unwrap();
        assert_eq!(audit.value_calls(), 2);
        assert_eq!(audit.gradient_calls(), 1);
    }

    #[test]
    #[should_panic(expected = "empty domain side")]
    fn empty_side_panics() {
        Quadratic::sphere(vec![0.0]).into_problem("q", vec![1.0], vec![1.0]);
    }
}

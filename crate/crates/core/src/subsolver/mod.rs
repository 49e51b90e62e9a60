//! First-order subproblem solvers, selectable by name.
//!
//! A subsolver minimizes a [`SmoothObjective`] from a given start point until
//! the gradient norm passes a [`StopRule`]. Two strategies ship by default:
//! `nag` (accelerated gradient with backtracking and function-value restart)
//! and `bb` (Barzilai-Borwein gradient steps with a decrease-enforcing line
//! search).

mod bb;
mod nag;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use bb::{bb_minimize, Bb, BbConfig, BbStep};
pub use nag::{default_max_iters, nag_minimize, restart_check, Nag, NagConfig};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::EvalCounters;

/// A differentiable objective whose evaluation returns value and gradient
/// together.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn evaluate(&self, z: &[f64], counters: &mut EvalCounters) -> (f64, Vec<f64>);
}

/// Closure-backed objective, mostly for tests and custom problems.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> SmoothObjective for FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, z: &[f64], _counters: &mut EvalCounters) -> (f64, Vec<f64>) {
        (self.f)(z)
    }
}

/// Gradient-norm stopping test `||grad|| <= max(zeta ||z||^2, grad_tol)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub grad_tol: f64,
    /// Optional relative term; `None` gives the plain `||grad|| <= grad_tol`.
    pub zeta: Option<f64>,
}

impl StopRule {
    pub fn absolute(grad_tol: f64) -> Self {
        Self { grad_tol, zeta: None }
    }

    pub fn threshold(&self, z: &[f64]) -> f64 {
        match self.zeta {
            Some(zeta) => {
                let zn = linalg::norm(z);
                (zeta * zn * zn).max(self.grad_tol)
            }
            None => self.grad_tol,
        }
    }

    pub fn satisfied(&self, z: &[f64], grad_norm: f64) -> bool {
        grad_norm <= self.threshold(z)
    }
}

/// Rounding level of an objective value `h`.
pub(crate) fn roundoff_slack(h: f64) -> f64 {
    8.0 * f64::EPSILON * h.abs()
}

/// Sufficient decrease `h(z - t g) <= h(z) - c t ||g||^2` for a gradient step.
///
/// Once the required decrease drops below the rounding level of `h`, value
/// comparisons are noise, so the test switches to the gradient condition
/// `<g_t, g> >= (2c - 1) ||g||^2`, which is equivalent on quadratics.
pub(crate) fn sufficient_decrease(h: f64, g: &[f64], g_sq: f64, h_t: f64, g_t: &[f64], c: f64, t: f64) -> bool {
    if !h_t.is_finite() || !linalg::is_finite(g_t) {
        return false;
    }
    let required = c * t * g_sq;
    if required > roundoff_slack(h) {
        h_t <= h - required
    } else {
        linalg::dot(g_t, g) >= (2.0 * c - 1.0) * g_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsolverStatus {
    Converged,
    MaxIters,
    /// The line search could not produce a decrease.
    Stagnation,
    /// A non-finite value or gradient was met; `z` holds the offending point.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SubproblemResult {
    pub z: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub status: SubsolverStatus,
    pub backtracks: usize,
    pub restarts: usize,
    /// Objective evaluations performed (each costs one Hessian action for a
    /// cubic model).
    pub evaluations: usize,
    /// `(h(z_l), accepted step)` per iteration when tracing is enabled.
    pub trace: Vec<(f64, f64)>,
}

/// Per-call parameters a solver hands to its subsolver.
#[derive(Debug, Clone, Copy)]
pub struct SubproblemParams {
    pub stop: StopRule,
    /// Strong-convexity modulus of the objective (NAG uses it; BB ignores it).
    pub strong_convexity: f64,
    pub max_iters: usize,
}

pub trait SubproblemSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        z0: &[f64],
        params: &SubproblemParams,
        counters: &mut EvalCounters,
    ) -> Result<SubproblemResult>;
}

type SubsolverFactory = Arc<dyn Fn() -> Box<dyn SubproblemSolver> + Send + Sync>;

/// Name-keyed registry of subproblem solvers.
#[derive(Clone)]
pub struct SubsolverRegistry {
    factories: BTreeMap<String, SubsolverFactory>,
}

impl Default for SubsolverRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("nag", || Box::new(Nag::default()));
        r.register("bb", || Box::new(Bb::default()));
        r
    }
}

impl SubsolverRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Box<dyn SubproblemSolver> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn SubproblemSolver>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "subsolver",
                name: name.to_string(),
                supported: self.names(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_default_strategies() {
        let r = SubsolverRegistry::default();
        assert_eq!(r.names(), vec!["bb".to_string(), "nag".to_string()]);
        assert_eq!(r.create("nag").unwrap().name(), "nag");
        assert_eq!(r.create("bb").unwrap().name(), "bb");
        let err = r.create("cg").err().unwrap().to_string();
        assert!(err.contains("bb, nag"), "{err}");
    }

    #[test]
    fn stop_rule_relative_term() {
        let rule = StopRule {
            grad_tol: 1e-3,
            zeta: Some(0.5),
        };
        assert_eq!(rule.threshold(&[0.0, 0.0]), 1e-3);
        assert_eq!(rule.threshold(&[2.0, 0.0]), 2.0);
        assert!(rule.satisfied(&[2.0, 0.0], 1.5));
        assert!(!StopRule::absolute(1e-3).satisfied(&[2.0, 0.0], 1.5));
    }
}

//! Outer solvers, selectable by name.
//!
//! * `cr`: cubic regularization with a fixed weight `L/2` from a known Hessian
//!   Lipschitz constant `L`, with a negative-curvature fallback step.
//! * `arc`: the same iteration with an adaptive weight `sigma_k` driven by an
//!   actual-to-predicted decrease ratio.
//! * `arc-practical`: adaptive cubics with a Cauchy-point safeguard, which
//!   only switches to the convex reformulation when the gradient is small and
//!   an eigenvalue estimate shows negative curvature.
//!
//! Every solver returns a [`SolveReport`] with the final point, its
//! stationarity certificate, evaluation counters and one [`IterationRow`] per
//! outer iteration.

mod arc;
mod cr;
mod practical;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

pub use arc::{arc_solve_theoretical, Arc as ArcSolver, ArcTheoreticalConfig};
pub use cr::{cr_solve, rho, Cr, CrConfig};
pub use practical::{arc_solve_practical, ArcPractical, ArcPracticalConfig};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{EvalCounters, SymmetricOperator};
use crate::problems::Problem;
use crate::subsolver::{SubproblemSolver, SubsolverRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gradient and curvature certificates both hold at `x_final`.
    Stationary,
    /// The outer iteration budget ran out; `x_final` is the best iterate.
    MaxOuter,
    SubsolverFailure,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Stationary => "stationary",
            SolveStatus::MaxOuter => "max_outer",
            SolveStatus::SubsolverFailure => "subsolver_failure",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the step of an outer iteration was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Certificate held; no step.
    Terminate,
    /// Curvature estimate above `-eps_E`: convexified cubic model.
    Easy,
    /// Reformulated model solution used as the step.
    ReformStep,
    /// Scaled eigenvector step.
    NegCurv,
    /// Plain cubic model solved directly.
    Plain,
    /// Subproblem solution rejected in favour of the Cauchy point.
    Cauchy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    /// Eigenvalue estimate at `x_k`, when one was computed.
    pub alpha: Option<f64>,
    pub branch: Branch,
    pub step_norm: f64,
    /// `-m(d_k)` for the plain cubic model with weight `sigma`.
    pub model_decrease: f64,
    pub sigma: f64,
    /// Whether the step was accepted.
    pub success: bool,
    /// Whether the reformulation trigger fired (practical ARC only).
    pub trigger: bool,
    pub rho: Option<f64>,
    pub f_trial: Option<f64>,
    pub sub_iters: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solver: String,
    pub status: SolveStatus,
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    /// Eigenvalue estimate at `x_final` (NaN when none was computed there).
    pub alpha_final: f64,
    pub counters: EvalCounters,
    pub iteration_log: Vec<IterationRow>,
}

impl SolveReport {
    /// Number of outer iterations that attempted a step.
    pub fn outer_iterations(&self) -> usize {
        self.iteration_log.iter().filter(|r| r.branch != Branch::Terminate).count()
    }
}

/// Settings shared by all solvers when built through the registry.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub eps_g: f64,
    /// Hessian Lipschitz constant (required by `cr` and `arc`).
    pub lipschitz: Option<f64>,
    pub subsolver: String,
    pub seed: u64,
    pub max_outer: Option<usize>,
    /// Optional relative subproblem stopping term.
    pub zeta: Option<f64>,
    pub sigma0: Option<f64>,
    /// Lower bound guess for `f` used to size the default iteration budget.
    pub f_lower: Option<f64>,
    pub delta: Option<f64>,
}

impl SolverSettings {
    pub fn new(eps_g: f64) -> Self {
        Self {
            eps_g,
            lipschitz: None,
            subsolver: "nag".into(),
            seed: 0,
            max_outer: None,
            zeta: None,
            sigma0: None,
            f_lower: None,
            delta: None,
        }
    }

    fn require_lipschitz(&self) -> Result<f64> {
        match self.lipschitz {
            Some(l) if l > 0.0 && l.is_finite() => Ok(l),
            Some(l) => Err(Error::Config(format!("Lipschitz constant must be positive, got {l}"))),
            None => Err(Error::MissingFlag("lipschitz")),
        }
    }
}

pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &dyn Problem, x0: &[f64]) -> Result<SolveReport>;
}

type SolverFactory = Arc<dyn Fn(&SolverSettings, &SubsolverRegistry) -> Result<Box<dyn Solver>> + Send + Sync>;

/// Name-keyed registry of outer solvers.
#[derive(Clone)]
pub struct SolverRegistry {
    factories: BTreeMap<String, SolverFactory>,
    subsolvers: SubsolverRegistry,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self::empty(SubsolverRegistry::default());
        r.register("cr", |s, subs| {
            let l = s.require_lipschitz()?;
            let mut cfg = CrConfig::new(s.eps_g, l);
            cfg.seed = s.seed;
            cfg.max_outer = s.max_outer;
            cfg.zeta = s.zeta;
            cfg.delta = s.delta;
            cfg.f_lower = s.f_lower.unwrap_or(cfg.f_lower);
            Ok(Box::new(Cr::new(cfg, subs.create(&s.subsolver)?)))
        });
        r.register("arc", |s, subs| {
            let l = s.require_lipschitz()?;
            let mut cfg = ArcTheoreticalConfig::new(s.eps_g, l);
            cfg.seed = s.seed;
            cfg.max_outer = s.max_outer;
            cfg.zeta = s.zeta;
            cfg.delta = s.delta;
            cfg.sigma0 = s.sigma0.unwrap_or(cfg.sigma0);
            cfg.f_lower = s.f_lower.unwrap_or(cfg.f_lower);
            Ok(Box::new(ArcSolver::new(cfg, subs.create(&s.subsolver)?)))
        });
        r.register("arc-practical", |s, subs| {
            let mut cfg = ArcPracticalConfig::new(s.eps_g);
            cfg.seed = s.seed;
            if let Some(m) = s.max_outer {
                cfg.max_outer = m;
            }
            cfg.sigma0 = s.sigma0.unwrap_or(cfg.sigma0);
            if let Some(l) = s.lipschitz {
                cfg.eps_h = (l * s.eps_g).sqrt();
            }
            if let Some(d) = s.delta {
                cfg.delta = d;
            }
            Ok(Box::new(ArcPractical::new(cfg, subs.create(&s.subsolver)?, subs.create("bb")?)))
        });
        r
    }
}

impl SolverRegistry {
    pub fn empty(subsolvers: SubsolverRegistry) -> Self {
        Self {
            factories: BTreeMap::new(),
            subsolvers,
        }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&SolverSettings, &SubsolverRegistry) -> Result<Box<dyn Solver>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }

    pub fn subsolvers(&self) -> &SubsolverRegistry {
        &self.subsolvers
    }

    pub fn create(&self, name: &str, settings: &SolverSettings) -> Result<Box<dyn Solver>> {
        let f = self.factories.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: "solver",
            name: name.to_string(),
            supported: self.names(),
        })?;
        f(settings, &self.subsolvers)
    }
}

/// Counted access to a problem during one solve.
pub(crate) struct Oracle<'p> {
    problem: &'p dyn Problem,
    pub counters: EvalCounters,
    start: Instant,
}

impl<'p> Oracle<'p> {
    pub(crate) fn new(problem: &'p dyn Problem, x0: &[f64]) -> Result<Self> {
        if x0.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: x0.len(),
            });
        }
        Ok(Self {
            problem,
            counters: EvalCounters::new(),
            start: Instant::now(),
        })
    }

    pub(crate) fn value(&mut self, x: &[f64]) -> f64 {
        self.counters.n_f += 1;
        self.problem.value(x)
    }

    pub(crate) fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        self.counters.n_g += 1;
        self.problem.gradient(x)
    }

    pub(crate) fn hessian(&self, x: &[f64]) -> SymmetricOperator {
        self.problem.hessian(x)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn finish(
        mut self,
        solver: &str,
        status: SolveStatus,
        x: Vec<f64>,
        f: f64,
        grad_norm: f64,
        alpha: f64,
        log: Vec<IterationRow>,
    ) -> SolveReport {
        self.counters.time_total = self.start.elapsed().as_secs_f64().max(self.counters.time_eig);
        log::debug!(
            "{solver}: {status} after {} rows, f = {f:.6e}, |g| = {grad_norm:.3e}",
            log.len()
        );
        SolveReport {
            solver: solver.to_string(),
            status,
            x_final: x,
            f_final: f,
            grad_norm_final: grad_norm,
            alpha_final: alpha,
            counters: self.counters,
            iteration_log: log,
        }
    }
}

/// Best iterate seen so far (by objective value).
#[derive(Debug, Clone)]
pub(crate) struct BestPoint {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub alpha: f64,
}

impl BestPoint {
    pub(crate) fn offer(&mut self, x: &[f64], f: f64, grad_norm: f64, alpha: f64) {
        if f < self.f {
            self.x = x.to_vec();
            self.f = f;
            self.grad_norm = grad_norm;
            self.alpha = alpha;
        }
    }
}

/// `10 * ceil(3 L^2 (f(x0) - f_lower) / eps_E^3)`, capped at one million.
pub fn default_max_outer(lipschitz: f64, eps_e: f64, f0: f64, f_lower: f64) -> usize {
    let gap = (f0 - f_lower).max(0.0);
    let t = 10.0 * (3.0 * lipschitz * lipschitz * gap / eps_e.powi(3)).ceil();
    if t.is_finite() && t < 1e6 {
        (t as usize).max(1)
    } else {
        1_000_000
    }
}

/// Unit eigenvector direction scaled to `|alpha|` and oriented so that
/// `w'g <= 0`.
pub(crate) fn negative_curvature_direction(v: &[f64], alpha: f64, g: &[f64]) -> Vec<f64> {
    let sign = if linalg::dot(v, g) > 0.0 { -1.0 } else { 1.0 };
    linalg::scaled(sign * alpha.abs(), v)
}

/// Plain-model value of `d = w / (2 sigma)` with `w = +-|alpha| v`, using
/// `v'Hv = alpha` so no Hessian action is needed.
pub(crate) fn neg_curv_model_value(g: &[f64], w: &[f64], alpha: f64, sigma: f64) -> f64 {
    let t = 1.0 / (2.0 * sigma);
    let a2 = alpha * alpha;
    t * linalg::dot(g, w) + 0.5 * t * t * a2 * alpha + sigma / 3.0 * (t * alpha.abs()).powi(3)
}

pub(crate) fn subsolver_ok(
    status: crate::subsolver::SubsolverStatus,
    solver: &dyn SubproblemSolver,
    k: usize,
) -> Option<SolveStatus> {
    use crate::subsolver::SubsolverStatus as S;
    match status {
        S::Converged => None,
        S::MaxIters => {
            log::warn!("{} hit its iteration cap at outer iteration {k}", solver.name());
            None
        }
        S::Stagnation | S::NumericalFailure => Some(SolveStatus::SubsolverFailure),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_requires_lipschitz_for_cr_and_arc() {
        let r = SolverRegistry::default();
        assert_eq!(r.names(), vec!["arc", "arc-practical", "cr"]);
        let s = SolverSettings::new(1e-5);
        let e = r.create("cr", &s).err().unwrap().to_string();
        assert!(e.contains("--lipschitz"), "{e}");
        assert!(r.create("arc", &s).is_err());
        assert_eq!(r.create("arc-practical", &s).unwrap().name(), "arc-practical");
        let mut s2 = s.clone();
        s2.lipschitz = Some(2.0);
        assert_eq!(r.create("cr", &s2).unwrap().name(), "cr");
        s2.subsolver = "cg".into();
        assert!(r.create("cr", &s2).is_err());
        assert!(r.create("newton", &s).is_err());
    }

    #[test]
    fn neg_curv_value_matches_direct_evaluation() {
        let g = [0.3, -0.2];
        let v = [0.6, 0.8];
        let h = crate::linalg::DenseMatrix::from_row_major(2, vec![-1.0, 0.0, 0.0, 2.0]);
        // v'Hv for this v
        let alpha = crate::linalg::dot(&v, &h.matvec(&v));
        let w = negative_curvature_direction(&v, alpha, &g);
        assert!(crate::linalg::dot(&w, &g) <= 0.0);
        let sigma = 0.7;
        let d = crate::linalg::scaled(1.0 / (2.0 * sigma), &w);
        let direct = crate::oracle::crs_value(&g, &h, sigma, &d);
        assert!((neg_curv_model_value(&g, &w, alpha, sigma) - direct).abs() <= 1e-14);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(default_max_outer(1.0, 1.0, 1.0, 0.0), 30);
        assert_eq!(default_max_outer(1.0, 1e-3, 1.0, -1e12), 1_000_000);
    }
}

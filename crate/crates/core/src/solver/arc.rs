use super::cr::{second_order_loop, validate_common, LoopSpec, SigmaRule};
use super::{SolveReport, Solver};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::subsolver::SubproblemSolver;

/// Adaptive-weight method with tolerances derived from a known `L`.
///
/// An iteration is successful when the ratio of actual to predicted decrease
/// reaches `eta`, or when the curvature estimate is below `-eps_E` (those
/// iterations are accepted regardless of the ratio).
#[derive(Debug, Clone, PartialEq)]
pub struct ArcTheoreticalConfig {
    pub eps_g: f64,
    pub lipschitz: f64,
    /// In `(1, 2)`.
    pub gamma: f64,
    /// In `(0, 1)`.
    pub eta: f64,
    pub sigma0: f64,
    pub max_outer: Option<usize>,
    pub zeta: Option<f64>,
    pub delta: Option<f64>,
    pub f_lower: f64,
    pub seed: u64,
}

impl ArcTheoreticalConfig {
    pub fn new(eps_g: f64, lipschitz: f64) -> Self {
        Self {
            eps_g,
            lipschitz,
            gamma: 1.5,
            eta: 0.1,
            sigma0: 1.0,
            max_outer: None,
            zeta: None,
            delta: None,
            f_lower: -1e12,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_common(self.eps_g, self.lipschitz, self.zeta)?;
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return Err(Error::Config(format!("gamma must lie in (1, 2), got {}", self.gamma)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        Ok(())
    }
}

pub fn arc_solve_theoretical(
    problem: &dyn Problem,
    x0: &[f64],
    cfg: &ArcTheoreticalConfig,
    subsolver: &dyn SubproblemSolver,
) -> Result<SolveReport> {
    cfg.validate()?;
    let setup = LoopSpec {
        name: "arc",
        eps_g: cfg.eps_g,
        lipschitz: cfg.lipschitz,
        max_outer: cfg.max_outer,
        zeta: cfg.zeta,
        delta: cfg.delta,
        f_lower: cfg.f_lower,
        seed: cfg.seed,
        rule: SigmaRule::Adaptive {
            sigma0: cfg.sigma0,
            gamma: cfg.gamma,
            eta: cfg.eta,
        },
        subsolver,
    };
    second_order_loop(problem, x0, &setup)
}

/// The `arc` solver strategy.
pub struct Arc {
    config: ArcTheoreticalConfig,
    subsolver: Box<dyn SubproblemSolver>,
}

impl Arc {
    pub fn new(config: ArcTheoreticalConfig, subsolver: Box<dyn SubproblemSolver>) -> Self {
        Self { config, subsolver }
    }
}

impl Solver for Arc {
    fn name(&self) -> &'static str {
        "arc"
    }

    fn solve(&self, problem: &dyn Problem, x0: &[f64]) -> Result<SolveReport> {
        arc_solve_theoretical(problem, x0, &self.config, self.subsolver.as_ref())
    }
}

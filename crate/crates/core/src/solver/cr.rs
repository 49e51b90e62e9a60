use super::{
    default_max_outer, neg_curv_model_value, negative_curvature_direction, subsolver_ok, BestPoint, Branch,
    IterationRow, Oracle, SolveReport, SolveStatus, Solver,
};
use crate::error::{Error, Result};
use crate::lanczos::{min_eig_estimate, LanczosOptions};
use crate::linalg;
use crate::model::RegularizedModel;
use crate::operators::{EvalCounters, SymmetricOperator};
use crate::problems::Problem;
use crate::subsolver::{default_max_iters, StopRule, SubproblemParams, SubproblemSolver};

/// Configuration of the fixed-weight cubic-regularization method.
#[derive(Debug, Clone, PartialEq)]
pub struct CrConfig {
    pub eps_g: f64,
    pub lipschitz: f64,
    /// Outer iteration budget; derived from `f(x0) - f_lower` when unset.
    pub max_outer: Option<usize>,
    /// Relative subproblem stopping weight (off when `None`).
    pub zeta: Option<f64>,
    /// Eigen-estimate failure probability per call; `1e-6 / max_outer` when
    /// unset.
    pub delta: Option<f64>,
    pub f_lower: f64,
    pub seed: u64,
}

impl CrConfig {
    pub fn new(eps_g: f64, lipschitz: f64) -> Self {
        Self {
            eps_g,
            lipschitz,
            max_outer: None,
            zeta: None,
            delta: None,
            f_lower: -1e12,
            seed: 0,
        }
    }

    /// `sqrt(L eps_g) / 3`
    pub fn eps_e(&self) -> f64 {
        (self.lipschitz * self.eps_g).sqrt() / 3.0
    }

    /// `eps_g / 9`, equal to `eps_E^2 / L`.
    pub fn eps_s(&self) -> f64 {
        self.eps_g / 9.0
    }

    pub(crate) fn validate(&self) -> Result<()> {
        validate_common(self.eps_g, self.lipschitz, self.zeta)
    }
}

pub(crate) fn validate_common(eps_g: f64, lipschitz: f64, zeta: Option<f64>) -> Result<()> {
    if !(eps_g > 0.0 && eps_g.is_finite()) {
        return Err(Error::Config(format!("eps_g must be positive, got {eps_g}")));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::Config(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    if let Some(z) = zeta {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::Config(format!("zeta must lie in (0, 1), got {z}")));
        }
    }
    Ok(())
}

/// The step of one outer iteration of the fixed- or adaptive-weight method.
pub(crate) struct RegularizedStep {
    pub d: Vec<f64>,
    pub branch: Branch,
    /// `-m(d)` with the plain model at weight `sigma`.
    pub model_decrease: f64,
    pub sub_iters: usize,
    pub failure: Option<SolveStatus>,
}

/// Builds and solves the regularized subproblem at weight `sigma`:
/// the convexified model when `alpha >= -eps_e`, otherwise the reformulated
/// model, falling back to `w / (2 sigma)` when its solution lies inside the
/// ball `sigma ||s|| < -alpha`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn regularized_step(
    g: &[f64],
    h: &SymmetricOperator,
    alpha: f64,
    v: &[f64],
    sigma: f64,
    eps_e: f64,
    stop: StopRule,
    subsolver: &dyn SubproblemSolver,
    counters: &mut EvalCounters,
    k: usize,
) -> Result<RegularizedStep> {
    let n = g.len();
    let params = SubproblemParams {
        stop,
        strong_convexity: eps_e,
        max_iters: default_max_iters(eps_e),
    };
    let z0 = vec![0.0; n];
    if alpha >= -eps_e {
        let model = RegularizedModel::convex_reg(g, h, sigma, eps_e)?;
        let r = subsolver.minimize(&model, &z0, &params, counters)?;
        let failure = subsolver_ok(r.status, subsolver, k);
        let ns = linalg::norm(&r.z);
        let m = r.value - 1.5 * eps_e * ns * ns;
        return Ok(RegularizedStep {
            d: r.z,
            branch: Branch::Easy,
            model_decrease: -m,
            sub_iters: r.iters,
            failure,
        });
    }
    let model = RegularizedModel::reform_reg(g, h, sigma, alpha, eps_e)?;
    let r = subsolver.minimize(&model, &z0, &params, counters)?;
    let failure = subsolver_ok(r.status, subsolver, k);
    let ns = linalg::norm(&r.z);
    if sigma * ns + alpha >= 0.0 {
        // The reformulated and plain models agree here apart from eps_e ||s||^2.
        let m = r.value - eps_e * ns * ns;
        Ok(RegularizedStep {
            d: r.z,
            branch: Branch::ReformStep,
            model_decrease: -m,
            sub_iters: r.iters,
            failure,
        })
    } else {
        let w = negative_curvature_direction(v, alpha, g);
        let m = neg_curv_model_value(g, &w, alpha, sigma);
        Ok(RegularizedStep {
            d: linalg::scaled(1.0 / (2.0 * sigma), &w),
            branch: Branch::NegCurv,
            model_decrease: -m,
            sub_iters: r.iters,
            failure,
        })
    }
}

/// How the regularization weight evolves.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SigmaRule {
    /// `sigma = L / 2`, every step accepted.
    Fixed,
    /// Ratio test with threshold `eta`; success divides `sigma` by `gamma`,
    /// failure multiplies it.
    Adaptive { sigma0: f64, gamma: f64, eta: f64 },
}

pub(crate) struct LoopSpec<'a> {
    pub name: &'static str,
    pub eps_g: f64,
    pub lipschitz: f64,
    pub max_outer: Option<usize>,
    pub zeta: Option<f64>,
    pub delta: Option<f64>,
    pub f_lower: f64,
    pub seed: u64,
    pub rule: SigmaRule,
    pub subsolver: &'a dyn SubproblemSolver,
}

pub(crate) fn second_order_loop(problem: &dyn Problem, x0: &[f64], setup: &LoopSpec) -> Result<SolveReport> {
    validate_common(setup.eps_g, setup.lipschitz, setup.zeta)?;
    let mut oracle = Oracle::new(problem, x0)?;
    let l = setup.lipschitz;
    let eps_e = (l * setup.eps_g).sqrt() / 3.0;
    let stop = StopRule {
        grad_tol: setup.eps_g / 9.0,
        zeta: setup.zeta,
    };

    let mut x = x0.to_vec();
    let mut f = oracle.value(&x);
    let mut g = oracle.gradient(&x);
    let mut log = Vec::new();
    if !f.is_finite() || !linalg::is_finite(&g) {
        let gn = linalg::norm(&g);
        return Ok(oracle.finish(setup.name, SolveStatus::NumericalFailure, x, f, gn, f64::NAN, log));
    }
    let max_outer = setup
        .max_outer
        .unwrap_or_else(|| default_max_outer(l, eps_e, f, setup.f_lower));
    let delta = setup.delta.unwrap_or(1e-6 / max_outer as f64);
    let mut sigma = match setup.rule {
        SigmaRule::Fixed => l / 2.0,
        SigmaRule::Adaptive { sigma0, .. } => sigma0,
    };
    let mut best = BestPoint {
        x: x.clone(),
        f,
        grad_norm: linalg::norm(&g),
        alpha: f64::NAN,
    };

    for k in 0..max_outer {
        let gn = linalg::norm(&g);
        let h = oracle.hessian(&x);
        let opts = LanczosOptions::new(eps_e, delta, linalg::derive_seed(setup.seed, k as u64));
        let est = min_eig_estimate(&h, &opts, &mut oracle.counters)?;
        let alpha = est.alpha;
        if f <= best.f {
            best = BestPoint {
                x: x.clone(),
                f,
                grad_norm: gn,
                alpha,
            };
        }
        let mut row = IterationRow {
            k,
            f,
            grad_norm: gn,
            alpha: Some(alpha),
            branch: Branch::Terminate,
            step_norm: 0.0,
            model_decrease: 0.0,
            sigma,
            success: false,
            trigger: false,
            rho: None,
            f_trial: None,
            sub_iters: 0,
        };
        if gn <= setup.eps_g && alpha >= -2.0 * eps_e {
            log.push(row);
            return Ok(oracle.finish(setup.name, SolveStatus::Stationary, x, f, gn, alpha, log));
        }

        let step = regularized_step(
            &g,
            &h,
            alpha,
            &est.v,
            sigma,
            eps_e,
            stop,
            setup.subsolver,
            &mut oracle.counters,
            k,
        )?;
        row.branch = step.branch;
        row.step_norm = linalg::norm(&step.d);
        row.model_decrease = step.model_decrease;
        row.sub_iters = step.sub_iters;
        if let Some(status) = step.failure {
            log.push(row);
            return Ok(oracle.finish(setup.name, status, x, f, gn, alpha, log));
        }

        let x_trial = linalg::add_scaled(&x, 1.0, &step.d);
        let f_trial = oracle.value(&x_trial);
        row.f_trial = Some(f_trial);
        if !f_trial.is_finite() {
            log.push(row);
            return Ok(oracle.finish(setup.name, SolveStatus::NumericalFailure, x_trial, f_trial, f64::NAN, f64::NAN, log));
        }
        let accept = match setup.rule {
            SigmaRule::Fixed => true,
            SigmaRule::Adaptive { gamma, eta, .. } => {
                let success = match rho(f, f_trial, step.model_decrease) {
                    Ok(r) => {
                        row.rho = Some(r);
                        r >= eta || alpha < -eps_e
                    }
                    Err(_) => false,
                };
                sigma = if success { sigma / gamma } else { sigma * gamma };
                success
            }
        };
        row.success = accept;
        log.push(row);
        if accept {
            let g_trial = oracle.gradient(&x_trial);
            if !linalg::is_finite(&g_trial) {
                return Ok(oracle.finish(setup.name, SolveStatus::NumericalFailure, x_trial, f_trial, f64::NAN, f64::NAN, log));
            }
            x = x_trial;
            f = f_trial;
            g = g_trial;
        }
    }
    best.offer(&x, f, linalg::norm(&g), f64::NAN);
    Ok(oracle.finish(setup.name, SolveStatus::MaxOuter, best.x, best.f, best.grad_norm, best.alpha, log))
}

/// `(f_k - f_next) / model_decrease`; a nonpositive predicted decrease is a
/// degenerate model.
pub fn rho(f_k: f64, f_next: f64, model_decrease: f64) -> Result<f64> {
    if !(model_decrease > 0.0) {
        return Err(Error::DegenerateModel(model_decrease));
    }
    Ok((f_k - f_next) / model_decrease)
}

pub fn cr_solve(
    problem: &dyn Problem,
    x0: &[f64],
    cfg: &CrConfig,
    subsolver: &dyn SubproblemSolver,
) -> Result<SolveReport> {
    cfg.validate()?;
    let setup = LoopSpec {
        name: "cr",
        eps_g: cfg.eps_g,
        lipschitz: cfg.lipschitz,
        max_outer: cfg.max_outer,
        zeta: cfg.zeta,
        delta: cfg.delta,
        f_lower: cfg.f_lower,
        seed: cfg.seed,
        rule: SigmaRule::Fixed,
        subsolver,
    };
    second_order_loop(problem, x0, &setup)
}

/// The `cr` solver strategy.
pub struct Cr {
    config: CrConfig,
    subsolver: Box<dyn SubproblemSolver>,
}

impl Cr {
    pub fn new(config: CrConfig, subsolver: Box<dyn SubproblemSolver>) -> Self {
        Self { config, subsolver }
    }
}

impl Solver for Cr {
    fn name(&self) -> &'static str {
        "cr"
    }

    fn solve(&self, problem: &dyn Problem, x0: &[f64]) -> Result<SolveReport> {
        cr_solve(problem, x0, &self.config, self.subsolver.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_min_eigenvalue;
    use crate::problems::make_problem;
    use crate::subsolver::{Bb, Nag};

    #[test]
    fn derived_tolerances() {
        let c = CrConfig::new(1e-6, 6.0);
        let e = c.eps_e();
        assert!((c.eps_s() - e * e / 6.0).abs() <= 1e-14);
    }

    #[test]
    fn sphere_converges_to_origin() {
        let p = make_problem("SPHERE", 10).unwrap();
        let r = cr_solve(p.as_ref(), &[5.0; 10], &CrConfig::new(1e-6, 1.0), &Nag::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        assert!(linalg::norm(&r.x_final) <= 1e-6);
        assert!(r.outer_iterations() <= 20, "{}", r.outer_iterations());
    }

    #[test]
    fn saddle_is_escaped() {
        let p = make_problem("SADDLE", 2).unwrap();
        for sub in [&Nag::default() as &dyn SubproblemSolver, &Bb::default()] {
            let r = cr_solve(p.as_ref(), &[1.0, 1e-3], &CrConfig::new(1e-6, 6.0), sub).unwrap();
            assert_eq!(r.status, SolveStatus::Stationary);
            assert!((r.f_final + 0.25).abs() <= 1e-9, "{}", r.f_final);
            assert!((r.x_final[1].abs() - 1.0).abs() <= 1e-5);
            let lam = dense_min_eigenvalue(&p.hessian(&r.x_final).to_dense());
            assert!(lam >= -(6.0f64 * 1e-6).sqrt() - 1e-8);
            let mut prev = f64::INFINITY;
            for row in &r.iteration_log {
                assert!(row.f <= prev + 1e-12);
                prev = row.f;
            }
        }
    }

    #[test]
    fn immediate_certificate() {
        let p = make_problem("QUADRATIC", 3).unwrap();
        let r = cr_solve(p.as_ref(), &[0.0; 3], &CrConfig::new(1e-6, 1.0), &Nag::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        assert_eq!(r.iteration_log.len(), 1);
        assert_eq!(r.iteration_log[0].branch, Branch::Terminate);
        assert_eq!(r.outer_iterations(), 0);
    }

    #[test]
    fn budget_exhaustion_reports_best_point() {
        let p = make_problem("GENROSE", 10).unwrap();
        let mut c = CrConfig::new(1e-8, 100.0);
        c.max_outer = Some(3);
        let x0 = p.x0();
        let r = cr_solve(p.as_ref(), &x0, &c, &Nag::default()).unwrap();
        assert_eq!(r.status, SolveStatus::MaxOuter);
        assert!(r.f_final <= p.value(&x0));
        assert!((p.value(&r.x_final) - r.f_final).abs() == 0.0);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1.0, 0.5, 0.5).unwrap(), 1.0);
        assert_eq!(rho(1.0, 1.0, 0.5).unwrap(), 0.0);
        assert_eq!(rho(2.0, 0.5, 1.0).unwrap(), 1.5);
        assert!(rho(1.0, 0.5, 0.0).is_err());
    }
}

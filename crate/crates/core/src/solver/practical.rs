use super::{BestPoint, Branch, IterationRow, Oracle, SolveReport, SolveStatus, Solver};
use crate::error::{Error, Result};
use crate::lanczos::{min_eig_estimate, EigenEstimate, LanczosOptions};
use crate::linalg;
use crate::model::{cauchy_step_length, cubic_value, RegularizedModel};
use crate::operators::{apply_hessian, EvalCounters, SymmetricOperator};
use crate::problems::Problem;
use crate::subsolver::{StopRule, SubproblemParams, SubproblemSolver};

/// Adaptive cubics with a Cauchy-point safeguard and an occasional switch to
/// the convex reformulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPracticalConfig {
    /// Gradient tolerance of the outer stopping test.
    pub eps_g: f64,
    /// Curvature tolerance of the final certificate `lambda_min >= -eps_h`.
    pub eps_h: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub sigma0: f64,
    pub sigma_min: f64,
    /// Relative gradient threshold of the reformulation trigger.
    pub eps1: f64,
    /// Curvature threshold of the reformulation trigger.
    pub eps2: f64,
    /// Subproblem tolerance factor: stop at `kappa min(1, ||g||) ||g||`.
    pub sub_kappa: f64,
    pub sub_max_iters: usize,
    pub max_outer: usize,
    pub delta: f64,
    pub seed: u64,
}

impl ArcPracticalConfig {
    pub fn new(eps_g: f64) -> Self {
        Self {
            eps_g,
            eps_h: eps_g.sqrt(),
            gamma1: 2.0,
            gamma2: 5.0,
            eta1: 0.1,
            eta2: 0.9,
            sigma0: 1.0,
            sigma_min: 1e-16,
            eps1: 1e-2,
            eps2: 1e-4,
            sub_kappa: 0.1,
            sub_max_iters: 1000,
            max_outer: 10_000,
            delta: 1e-10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps_g", self.eps_g),
            ("eps_h", self.eps_h),
            ("sigma0", self.sigma0),
            ("sigma_min", self.sigma_min),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("sub_kappa", self.sub_kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma2 >= self.gamma1 && self.gamma1 > 1.0) {
            return Err(Error::Config(format!(
                "need gamma2 >= gamma1 > 1, got gamma1 = {}, gamma2 = {}",
                self.gamma1, self.gamma2
            )));
        }
        if !(self.eta1 > 0.0 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < eta1 <= eta2 < 1, got eta1 = {}, eta2 = {}",
                self.eta1, self.eta2
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) || self.max_outer == 0 || self.sub_max_iters == 0 {
            return Err(Error::Config("delta must lie in (0, 1) and iteration caps be positive".into()));
        }
        Ok(())
    }

    /// Accuracy requested from every eigenvalue estimate: fine enough for both
    /// the trigger and the final certificate.
    fn eig_eps(&self) -> f64 {
        self.eps2.min(self.eps_h / 3.0)
    }

    /// Certificate threshold on the estimate, leaving room for its accuracy.
    fn certificate_floor(&self) -> f64 {
        -2.0 * self.eps_h / 3.0
    }
}

/// Outcome of the subproblem phase of one iteration.
struct TrialStep {
    s: Vec<f64>,
    m: f64,
    branch: Branch,
    sub_iters: usize,
}

/// Plain-model value along `s + tau v` from `Hs` and `Hv`.
fn model_along(g: &[f64], s: &[f64], hs: &[f64], v: &[f64], hv: &[f64], tau: f64, sigma: f64) -> f64 {
    let d = linalg::add_scaled(s, tau, v);
    let hd = linalg::add_scaled(hs, tau, hv);
    cubic_value(g, &d, &hd, sigma)
}

/// Solves the reformulated model from the Cauchy point. When the solution
/// lies strictly inside the ball `sigma ||s|| < -alpha`, where the
/// reformulation and the cubic model differ, the step is also extended along
/// the eigenvector estimate to that ball's boundary and the better of the
/// candidates (by cubic model value) is kept.
#[allow(clippy::too_many_arguments)]
fn reformulated_trial(
    g: &[f64],
    h: &SymmetricOperator,
    sigma: f64,
    est: &EigenEstimate,
    s_c: &[f64],
    params: &SubproblemParams,
    subsolver: &dyn SubproblemSolver,
    counters: &mut EvalCounters,
) -> Result<TrialStep> {
    let alpha = est.alpha;
    let model = RegularizedModel::reform_reg(g, h, sigma, alpha, 0.0)?;
    let r = subsolver.minimize(&model, s_c, params, counters)?;
    let ns = linalg::norm(&r.z);
    if sigma * ns + alpha >= 0.0 || !linalg::is_finite(&r.z) {
        return Ok(TrialStep {
            s: r.z,
            m: r.value,
            branch: Branch::ReformStep,
            sub_iters: r.iters,
        });
    }
    let hs = apply_hessian(h, &r.z, counters)?;
    let hv = apply_hessian(h, &est.v, counters)?;
    let mut best = TrialStep {
        m: cubic_value(g, &r.z, &hs, sigma),
        s: r.z,
        branch: Branch::ReformStep,
        sub_iters: r.iters,
    };
    let radius = -alpha / sigma;
    let b = linalg::dot(&best.s, &est.v);
    let disc = (b * b - (ns * ns - radius * radius)).sqrt();
    let mut extended: Option<(f64, f64)> = None;
    for tau in [-b + disc, -b - disc] {
        let m = model_along(g, &best.s, &hs, &est.v, &hv, tau, sigma);
        if extended.is_none_or(|(_, mb)| m < mb) {
            extended = Some((tau, m));
        }
    }
    if let Some((tau, m)) = extended {
        if m < best.m {
            best.s = linalg::add_scaled(&best.s, tau, &est.v);
            best.m = m;
            best.branch = Branch::NegCurv;
        }
    }
    Ok(best)
}

pub fn arc_solve_practical(
    problem: &dyn Problem,
    x0: &[f64],
    cfg: &ArcPracticalConfig,
    reform_subsolver: &dyn SubproblemSolver,
    plain_subsolver: &dyn SubproblemSolver,
) -> Result<SolveReport> {
    cfg.validate()?;
    const NAME: &str = "arc-practical";
    let mut oracle = Oracle::new(problem, x0)?;
    let mut x = x0.to_vec();
    let mut f = oracle.value(&x);
    let mut g = oracle.gradient(&x);
    let mut log = Vec::new();
    if !f.is_finite() || !linalg::is_finite(&g) {
        let gn = linalg::norm(&g);
        return Ok(oracle.finish(NAME, SolveStatus::NumericalFailure, x, f, gn, f64::NAN, log));
    }
    let mut sigma = cfg.sigma0;
    let mut best = BestPoint {
        x: x.clone(),
        f,
        grad_norm: linalg::norm(&g),
        alpha: f64::NAN,
    };
    // Eigen estimate at the current iterate, reused until the iterate moves.
    let mut eig_here: Option<EigenEstimate> = None;
    let mut h = oracle.hessian(&x);

    for k in 0..cfg.max_outer {
        let gn = linalg::norm(&g);
        let mut row = IterationRow {
            k,
            f,
            grad_norm: gn,
            alpha: None,
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
        let estimate = |h: &SymmetricOperator, counters: &mut EvalCounters| -> Result<EigenEstimate> {
            let opts = LanczosOptions::new(cfg.eig_eps(), cfg.delta, linalg::derive_seed(cfg.seed, k as u64));
            min_eig_estimate(h, &opts, counters)
        };

        if gn <= cfg.eps_g {
            if eig_here.is_none() {
                eig_here = Some(estimate(&h, &mut oracle.counters)?);
            }
            let alpha = eig_here.as_ref().map(|e| e.alpha).unwrap_or(f64::NAN);
            row.alpha = Some(alpha);
            if alpha >= cfg.certificate_floor() {
                log.push(row);
                return Ok(oracle.finish(NAME, SolveStatus::Stationary, x, f, gn, alpha, log));
            }
        }

        // Cauchy point from one Hessian action on g.
        let (s_c, m_c) = if gn == 0.0 {
            (vec![0.0; g.len()], 0.0)
        } else {
            let hg = apply_hessian(&h, &g, &mut oracle.counters)?;
            let c = linalg::dot(&g, &hg);
            let a = cauchy_step_length(gn, c, sigma);
            let m = -a * gn * gn + 0.5 * a * a * c + sigma / 3.0 * (a * gn).powi(3);
            (linalg::scaled(-a, &g), m)
        };

        if gn <= f.max(1.0) * cfg.eps1 {
            if eig_here.is_none() {
                eig_here = Some(estimate(&h, &mut oracle.counters)?);
            }
            let alpha = eig_here.as_ref().map(|e| e.alpha).unwrap_or(f64::NAN);
            row.alpha = Some(alpha);
            row.trigger = alpha < -cfg.eps2;
        }

        let params = SubproblemParams {
            stop: StopRule::absolute((cfg.sub_kappa * gn.min(1.0) * gn).max(f64::MIN_POSITIVE)),
            strong_convexity: cfg.eps2,
            max_iters: cfg.sub_max_iters,
        };
        let trial = if row.trigger {
            let est = eig_here.as_ref().expect("trigger implies an estimate");
            reformulated_trial(&g, &h, sigma, est, &s_c, &params, reform_subsolver, &mut oracle.counters)?
        } else {
            let model = RegularizedModel::plain(&g, &h, sigma)?;
            let r = plain_subsolver.minimize(&model, &s_c, &params, &mut oracle.counters)?;
            TrialStep {
                s: r.z,
                m: r.value,
                branch: Branch::Plain,
                sub_iters: r.iters,
            }
        };
        row.sub_iters = trial.sub_iters;
        let (s, m_s) = if trial.m <= m_c && linalg::is_finite(&trial.s) {
            row.branch = trial.branch;
            (trial.s, trial.m)
        } else {
            row.branch = Branch::Cauchy;
            (s_c, m_c)
        };
        row.step_norm = linalg::norm(&s);
        row.model_decrease = -m_s;

        let x_trial = linalg::add_scaled(&x, 1.0, &s);
        let f_trial = oracle.value(&x_trial);
        row.f_trial = Some(f_trial);
        let ratio = if f_trial.is_finite() {
            super::rho(f, f_trial, -m_s).ok()
        } else {
            None
        };
        row.rho = ratio;
        let r = ratio.unwrap_or(f64::NEG_INFINITY);
        let success = r >= cfg.eta1;
        row.success = success;
        sigma = if r > cfg.eta2 {
            (sigma / 2.0).max(cfg.sigma_min)
        } else if r >= cfg.eta1 {
            sigma
        } else {
            cfg.gamma1 * sigma
        };
        log.push(row);
        if success {
            let g_trial = oracle.gradient(&x_trial);
            if !linalg::is_finite(&g_trial) {
                return Ok(oracle.finish(NAME, SolveStatus::NumericalFailure, x_trial, f_trial, f64::NAN, f64::NAN, log));
            }
            x = x_trial;
            f = f_trial;
            g = g_trial;
            h = oracle.hessian(&x);
            eig_here = None;
            best.offer(&x, f, linalg::norm(&g), f64::NAN);
        }
    }
    Ok(oracle.finish(NAME, SolveStatus::MaxOuter, best.x, best.f, best.grad_norm, best.alpha, log))
}

/// The `arc-practical` solver strategy.
pub struct ArcPractical {
    config: ArcPracticalConfig,
    reform_subsolver: Box<dyn SubproblemSolver>,
    plain_subsolver: Box<dyn SubproblemSolver>,
}

impl ArcPractical {
    pub fn new(
        config: ArcPracticalConfig,
        reform_subsolver: Box<dyn SubproblemSolver>,
        plain_subsolver: Box<dyn SubproblemSolver>,
    ) -> Self {
        Self {
            config,
            reform_subsolver,
            plain_subsolver,
        }
    }
}

impl Solver for ArcPractical {
    fn name(&self) -> &'static str {
        "arc-practical"
    }

    fn solve(&self, problem: &dyn Problem, x0: &[f64]) -> Result<SolveReport> {
        arc_solve_practical(
            problem,
            x0,
            &self.config,
            self.reform_subsolver.as_ref(),
            self.plain_subsolver.as_ref(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_min_eigenvalue;
    use crate::problems::make_problem;
    use crate::subsolver::{Bb, Nag, SmoothObjective, SubproblemResult, SubsolverStatus};

    /// Returns the mirror image of its start point: a deliberately bad step.
    struct Mirror;

    impl SubproblemSolver for Mirror {
        fn name(&self) -> &'static str {
            "mirror"
        }

        fn minimize(
            &self,
            objective: &dyn SmoothObjective,
            z0: &[f64],
            _params: &SubproblemParams,
            counters: &mut EvalCounters,
        ) -> Result<SubproblemResult> {
            let z = linalg::scaled(-1.0, z0);
            let (value, grad) = objective.evaluate(&z, counters);
            Ok(SubproblemResult {
                grad_norm: linalg::norm(&grad),
                z,
                value,
                iters: 1,
                status: SubsolverStatus::Converged,
                backtracks: 0,
                restarts: 0,
                evaluations: 1,
                trace: Vec::new(),
            })
        }
    }

    #[test]
    fn genrose_converges() {
        let p = make_problem("GENROSE", 100).unwrap();
        let x0 = p.x0();
        let r = arc_solve_practical(p.as_ref(), &x0, &ArcPracticalConfig::new(1e-5), &Bb::default(), &Bb::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        assert!(r.grad_norm_final <= 1e-5);
        assert!(r.f_final <= p.value(&x0));
    }

    #[test]
    fn log_invariants() {
        let p = make_problem("WOODS", 8).unwrap();
        let x0 = p.x0();
        let r = arc_solve_practical(p.as_ref(), &x0, &ArcPracticalConfig::new(1e-6), &Nag::default(), &Bb::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        for row in &r.iteration_log {
            if row.branch == Branch::Terminate {
                continue;
            }
            assert!(row.model_decrease >= 0.0);
            if row.success {
                assert!(row.f_trial.unwrap() <= row.f);
            }
        }
        for w in r.iteration_log.windows(2) {
            if !w[0].success && w[0].branch != Branch::Terminate {
                assert_eq!(w[0].f, w[1].f);
            }
        }
    }

    #[test]
    fn no_trigger_on_convex_quadratic() {
        let p = make_problem("QUADRATIC", 20).unwrap();
        let x0: Vec<f64> = (0..20).map(|i| 3.0 + i as f64).collect();
        let r = arc_solve_practical(p.as_ref(), &x0, &ArcPracticalConfig::new(1e-8), &Bb::default(), &Bb::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        assert!(r.iteration_log.iter().all(|row| !row.trigger));
        let checked = r.iteration_log.iter().filter(|row| row.alpha.is_some()).count() as u64;
        assert!(r.counters.n_eig >= 1 && r.counters.n_eig <= checked);
    }

    #[test]
    fn cauchy_point_guards_bad_subproblem_steps() {
        let p = make_problem("QUADRATIC", 5).unwrap();
        let x0 = vec![1.0; 5];
        let mut cfg = ArcPracticalConfig::new(1e-6);
        cfg.max_outer = 5;
        let r = arc_solve_practical(p.as_ref(), &x0, &cfg, &Mirror, &Mirror).unwrap();
        let steps: Vec<_> = r.iteration_log.iter().filter(|row| row.branch != Branch::Terminate).collect();
        assert!(!steps.is_empty());
        assert!(steps.iter().all(|row| row.branch == Branch::Cauchy));
    }

    #[test]
    fn escapes_exact_saddle() {
        let p = make_problem("SADDLE", 3).unwrap();
        let r = arc_solve_practical(p.as_ref(), &[0.0; 3], &ArcPracticalConfig::new(1e-6), &Bb::default(), &Bb::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Stationary);
        assert!((r.f_final - p.f_known().unwrap()).abs() <= 1e-8);
        let lam = dense_min_eigenvalue(&p.hessian(&r.x_final).to_dense());
        assert!(lam > 0.0);
    }

    #[test]
    fn validates_parameter_ordering() {
        let mut c = ArcPracticalConfig::new(1e-5);
        c.eta1 = 0.95;
        assert!(c.validate().is_err());
        let mut c = ArcPracticalConfig::new(1e-5);
        c.gamma2 = 1.5;
        assert!(c.validate().is_err());
    }
}

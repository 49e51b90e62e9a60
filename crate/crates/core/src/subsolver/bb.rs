use super::{sufficient_decrease, SmoothObjective, StopRule, SubproblemParams, SubproblemResult, SubproblemSolver, SubsolverStatus};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::EvalCounters;

const ARMIJO: f64 = 1e-4;
const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;

/// Which Barzilai-Borwein quotient is tried first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbStep {
    /// `s'y / y'y`
    Short,
    /// `s's / s'y`
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbConfig {
    pub step_init: f64,
    pub stop: StopRule,
    pub max_iters: usize,
    pub ls_shrink: f64,
    pub ls_max: usize,
    pub step_rule: BbStep,
}

impl BbConfig {
    pub fn new(grad_tol: f64) -> Self {
        Self {
            step_init: 1.0,
            stop: StopRule::absolute(grad_tol),
            max_iters: 10_000,
            ls_shrink: 0.5,
            ls_max: 60,
            step_rule: BbStep::Short,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_init > 0.0 && self.stop.grad_tol > 0.0 && self.max_iters > 0 && self.ls_max > 0) {
            return Err(Error::Config("BB parameters must be positive".into()));
        }
        if !(self.ls_shrink > 0.0 && self.ls_shrink < 1.0) {
            return Err(Error::Config(format!(
                "BB line-search shrink factor must lie in (0, 1), got {}",
                self.ls_shrink
            )));
        }
        Ok(())
    }
}

/// Next step length from the secant pair `(s, y)`. Falls back to the other
/// quotient when the first is not positive, then to `||s|| / ||y||` (the
/// curvature along `s` is not positive there), then to the previous step.
fn bb_step(rule: BbStep, s: &[f64], y: &[f64], previous: f64) -> f64 {
    let sy = linalg::dot(s, y);
    let yy = linalg::dot(y, y);
    let ss = linalg::dot(s, s);
    let short = sy / yy;
    let long = ss / sy;
    let (first, second) = match rule {
        BbStep::Short => (short, long),
        BbStep::Long => (long, short),
    };
    let t = if first.is_finite() && first > 0.0 {
        first
    } else if second.is_finite() && second > 0.0 {
        second
    } else if yy > 0.0 && ss > 0.0 {
        (ss / yy).sqrt()
    } else {
        previous
    };
    t.clamp(STEP_MIN, STEP_MAX)
}

pub fn bb_minimize(
    objective: &dyn SmoothObjective,
    cfg: &BbConfig,
    z0: &[f64],
    counters: &mut EvalCounters,
) -> Result<SubproblemResult> {
    cfg.validate()?;
    if z0.len() != objective.dim() {
        return Err(Error::DimensionMismatch {
            expected: objective.dim(),
            got: z0.len(),
        });
    }
    let mut z = z0.to_vec();
    let (mut h, mut g) = objective.evaluate(&z, counters);
    let mut out = SubproblemResult {
        z: Vec::new(),
        value: h,
        grad_norm: linalg::norm(&g),
        iters: 0,
        status: SubsolverStatus::MaxIters,
        backtracks: 0,
        restarts: 0,
        evaluations: 1,
        trace: Vec::new(),
    };
    if !h.is_finite() || !linalg::is_finite(&g) {
        out.status = SubsolverStatus::NumericalFailure;
        out.z = z;
        return Ok(out);
    }
    if cfg.stop.satisfied(&z, out.grad_norm) {
        out.status = SubsolverStatus::Converged;
        out.z = z;
        return Ok(out);
    }

    let mut t = cfg.step_init.clamp(STEP_MIN, STEP_MAX);
    for l in 0..cfg.max_iters {
        let g_sq = linalg::dot(&g, &g);
        let mut tt = t;
        let mut shrinks = 0;
        let (z_next, h_next, g_next) = loop {
            let trial = linalg::add_scaled(&z, -tt, &g);
            let (ht, gt) = objective.evaluate(&trial, counters);
            out.evaluations += 1;
            if sufficient_decrease(h, &g, g_sq, ht, &gt, ARMIJO, tt) {
                break (trial, ht, gt);
            }
            shrinks += 1;
            out.backtracks += 1;
            if shrinks >= cfg.ls_max {
                out.status = SubsolverStatus::Stagnation;
                out.iters = l;
                out.z = z;
                return Ok(out);
            }
            tt *= cfg.ls_shrink;
        };
        let s = linalg::sub(&z_next, &z);
        let y = linalg::sub(&g_next, &g);
        t = bb_step(cfg.step_rule, &s, &y, tt);
        z = z_next;
        h = h_next;
        g = g_next;
        out.iters = l + 1;
        out.value = h;
        out.grad_norm = linalg::norm(&g);
        out.trace.push((h, tt));
        if cfg.stop.satisfied(&z, out.grad_norm) {
            out.status = SubsolverStatus::Converged;
            break;
        }
    }
    out.z = z;
    Ok(out)
}

/// The `bb` subsolver strategy.
#[derive(Debug, Clone, Copy)]
pub struct Bb {
    pub step_init: f64,
    pub ls_shrink: f64,
    pub ls_max: usize,
    pub step_rule: BbStep,
}

impl Default for Bb {
    fn default() -> Self {
        Self {
            step_init: 1.0,
            ls_shrink: 0.5,
            ls_max: 60,
            step_rule: BbStep::Short,
        }
    }
}

impl SubproblemSolver for Bb {
    fn name(&self) -> &'static str {
        "bb"
    }

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        z0: &[f64],
        params: &SubproblemParams,
        counters: &mut EvalCounters,
    ) -> Result<SubproblemResult> {
        let cfg = BbConfig {
            step_init: self.step_init,
            stop: params.stop,
            max_iters: params.max_iters,
            ls_shrink: self.ls_shrink,
            ls_max: self.ls_max,
            step_rule: self.step_rule,
        };
        bb_minimize(objective, &cfg, z0, counters)
    }
}

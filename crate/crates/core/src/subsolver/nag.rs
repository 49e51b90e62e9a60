use super::{roundoff_slack, sufficient_decrease, SmoothObjective, StopRule, SubproblemParams, SubproblemResult, SubproblemSolver, SubsolverStatus};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::EvalCounters;

const MAX_BACKTRACKS_PER_ITER: usize = 200;

/// Accelerated gradient method for `m`-strongly convex objectives with
/// backtracking line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagConfig {
    /// Initial step size.
    pub t0: f64,
    pub theta0: f64,
    /// Backtracking factor.
    pub beta: f64,
    /// Strong-convexity modulus `m`.
    pub strong_convexity: f64,
    pub stop: StopRule,
    pub max_iters: usize,
    pub restart_enabled: bool,
    pub record_trace: bool,
}

impl NagConfig {
    pub fn new(strong_convexity: f64, grad_tol: f64) -> Self {
        Self {
            t0: 1.0,
            theta0: 1.0,
            beta: 0.5,
            strong_convexity,
            stop: StopRule::absolute(grad_tol),
            max_iters: default_max_iters(strong_convexity),
            restart_enabled: true,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) {
            return Err(Error::Config(format!("NAG t0 must be positive, got {}", self.t0)));
        }
        if !(self.theta0 > 0.0 && self.theta0 <= 1.0) {
            return Err(Error::Config(format!("NAG theta0 must lie in (0, 1], got {}", self.theta0)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("NAG beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.strong_convexity > 0.0) {
            return Err(Error::Config(format!(
                "NAG strong convexity must be positive, got {}",
                self.strong_convexity
            )));
        }
        if !(self.stop.grad_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("NAG needs a positive tolerance and iteration cap".into()));
        }
        Ok(())
    }
}

/// `50 * ceil(m^{-1/2}) + 1000`.
pub fn default_max_iters(strong_convexity: f64) -> usize {
    let k = (1.0 / strong_convexity.sqrt()).ceil();
    if k.is_finite() && k < 1e12 {
        50 * k as usize + 1000
    } else {
        usize::MAX / 2
    }
}

/// Function-value restart test: restart when the value went up by more than
/// its rounding level.
pub fn restart_check(h_prev: f64, h_curr: f64) -> bool {
    h_curr > h_prev + roundoff_slack(h_prev)
}

/// Positive root of `theta^2 / t = (1 - theta) gamma + m theta`, clamped to
/// `(0, 1]`.
fn next_theta(t: f64, gamma: f64, m: f64) -> f64 {
    let b = t * (gamma - m);
    let c = t * gamma;
    let disc = (b * b + 4.0 * c).sqrt();
    let theta = if b >= 0.0 { 2.0 * c / (b + disc) } else { 0.5 * (disc - b) };
    theta.min(1.0)
}

pub fn nag_minimize(
    objective: &dyn SmoothObjective,
    cfg: &NagConfig,
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
    let m = cfg.strong_convexity;
    let mut z = z0.to_vec();
    let (mut hz, mut gz) = objective.evaluate(&z, counters);
    let mut out = SubproblemResult {
        z: Vec::new(),
        value: hz,
        grad_norm: linalg::norm(&gz),
        iters: 0,
        status: SubsolverStatus::MaxIters,
        backtracks: 0,
        restarts: 0,
        evaluations: 1,
        trace: Vec::new(),
    };
    if !hz.is_finite() || !linalg::is_finite(&gz) {
        out.status = SubsolverStatus::NumericalFailure;
        out.z = z;
        return Ok(out);
    }
    if cfg.stop.satisfied(&z, out.grad_norm) {
        out.status = SubsolverStatus::Converged;
        out.z = z;
        return Ok(out);
    }

    let mut v = z.clone();
    let mut theta = cfg.theta0;
    let mut t = cfg.t0;
    // First iteration after a (re)start extrapolates nothing: y = z.
    let mut fresh = true;

    for l in 0..cfg.max_iters {
        let (y, hy, gy) = if fresh {
            (z.clone(), hz, gz.clone())
        } else {
            let gamma = theta * theta / t;
            theta = next_theta(t, gamma, m);
            let coef = theta * gamma / (gamma + m * theta);
            let y: Vec<f64> = z.iter().zip(&v).map(|(zi, vi)| zi + coef * (vi - zi)).collect();
            let (hy, gy) = objective.evaluate(&y, counters);
            out.evaluations += 1;
            if !hy.is_finite() || !linalg::is_finite(&gy) {
                out.status = SubsolverStatus::NumericalFailure;
                out.iters = l;
                out.z = y;
                return Ok(out);
            }
            (y, hy, gy)
        };

        let gy_sq = linalg::dot(&gy, &gy);
        let mut local_backtracks = 0;
        let (z_next, h_next, g_next) = loop {
            let trial = linalg::add_scaled(&y, -t, &gy);
            let (ht, gt) = objective.evaluate(&trial, counters);
            out.evaluations += 1;
            if sufficient_decrease(hy, &gy, gy_sq, ht, &gt, 0.5, t) {
                break (trial, ht, gt);
            }
            t *= cfg.beta;
            local_backtracks += 1;
            out.backtracks += 1;
            if local_backtracks > MAX_BACKTRACKS_PER_ITER {
                out.status = SubsolverStatus::NumericalFailure;
                out.iters = l;
                out.z = y;
                out.value = hy;
                out.grad_norm = gy_sq.sqrt();
                return Ok(out);
            }
        };
        if !linalg::is_finite(&g_next) {
            out.status = SubsolverStatus::NumericalFailure;
            out.iters = l + 1;
            out.z = z_next;
            return Ok(out);
        }

        let restart = cfg.restart_enabled && restart_check(hz, h_next);
        if restart {
            out.restarts += 1;
            v = z_next.clone();
            theta = cfg.theta0;
            fresh = true;
        } else {
            for ((vi, zi), zn) in v.iter_mut().zip(&z).zip(&z_next) {
                *vi = zi + (zn - zi) / theta;
            }
            fresh = false;
        }
        z = z_next;
        hz = h_next;
        gz = g_next;
        out.iters = l + 1;
        out.value = hz;
        out.grad_norm = linalg::norm(&gz);
        if cfg.record_trace {
            out.trace.push((hz, t));
        }
        if cfg.stop.satisfied(&z, out.grad_norm) {
            out.status = SubsolverStatus::Converged;
            break;
        }
    }
    out.z = z;
    Ok(out)
}

/// The `nag` subsolver strategy.
#[derive(Debug, Clone, Copy)]
pub struct Nag {
    pub t0: f64,
    pub theta0: f64,
    pub beta: f64,
    pub restart_enabled: bool,
}

impl Default for Nag {
    fn default() -> Self {
        Self {
            t0: 1.0,
            theta0: 1.0,
            beta: 0.5,
            restart_enabled: true,
        }
    }
}

impl SubproblemSolver for Nag {
    fn name(&self) -> &'static str {
        "nag"
    }

    fn minimize(
        &self,
        objective: &dyn SmoothObjective,
        z0: &[f64],
        params: &SubproblemParams,
        counters: &mut EvalCounters,
    ) -> Result<SubproblemResult> {
        let cfg = NagConfig {
            t0: self.t0,
            theta0: self.theta0,
            beta: self.beta,
            strong_convexity: params.strong_convexity,
            stop: params.stop,
            max_iters: params.max_iters,
            restart_enabled: self.restart_enabled,
            record_trace: false,
        };
        nag_minimize(objective, &cfg, z0, counters)
    }
}

//! Approximate minimum eigenpair by the Lanczos method.
//!
//! The iteration runs on `H` from a uniformly random unit vector with full
//! reorthogonalization. The Krylov spaces of `H` and `U_H I - H` coincide, so
//! this is the same procedure as running Lanczos on the shifted (positive
//! semidefinite) operator; only the bookkeeping of Ritz values differs. The
//! number of steps is capped at
//! `min(n, ceil(log(n / delta^2) / (2 sqrt 2) * sqrt(U_H / eps)))`, which is
//! enough for `alpha <= lambda_min + eps` with probability at least `1 - delta`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{EvalCounters, SymmetricOperator, NORM_BOUND_DEFAULT_ITERS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Target accuracy `eps`.
    pub eps: f64,
    /// Failure probability `delta`.
    pub delta: f64,
    pub seed: u64,
    /// Power iterations used for `U_H` when the operator has no cached bound.
    pub norm_bound_iters: usize,
    /// Hard cap on Lanczos steps on top of the probabilistic bound.
    pub max_iters: Option<usize>,
    pub record_trace: bool,
}

impl LanczosOptions {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Self {
        Self {
            eps,
            delta,
            seed,
            norm_bound_iters: NORM_BOUND_DEFAULT_ITERS,
            max_iters: None,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    /// Rayleigh quotient `v'Hv`.
    pub alpha: f64,
    /// Unit Ritz vector.
    pub v: Vec<f64>,
    pub target_eps: f64,
    pub iters_used: usize,
    /// Smallest Ritz value after each step, when requested.
    pub trace: Vec<f64>,
}

/// Step cap for accuracy `eps` and failure probability `delta`.
pub fn iteration_cap(n: usize, norm_bound: f64, eps: f64, delta: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let k = ((n as f64) / (delta * delta)).ln() / (2.0 * std::f64::consts::SQRT_2) * (norm_bound / eps).sqrt();
    if !k.is_finite() || k >= n as f64 {
        n
    } else {
        (k.ceil() as usize).clamp(1, n)
    }
}

pub fn min_eig_estimate(
    h: &SymmetricOperator,
    opts: &LanczosOptions,
    counters: &mut EvalCounters,
) -> Result<EigenEstimate> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Config("eigenvalue estimate on a zero-dimensional operator".into()));
    }
    if !(opts.eps > 0.0) || !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(Error::Config(format!(
            "Lanczos needs eps > 0 and delta in (0, 1), got eps = {}, delta = {}",
            opts.eps, opts.delta
        )));
    }
    let start = Instant::now();
    counters.n_eig += 1;

    let mut rng = linalg::rng_from_seed(opts.seed);
    let q1 = linalg::random_unit_vector(n, &mut rng);
    let u = h.ensure_norm_bound(opts.norm_bound_iters, linalg::derive_seed(opts.seed, 1), counters);
    let mut cap = iteration_cap(n, u, opts.eps, opts.delta);
    if let Some(m) = opts.max_iters {
        cap = cap.min(m.max(1));
    }
    let breakdown_tol = 1e-12 * u.max(f64::MIN_POSITIVE);

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cap);
    // Raw products H q_j, kept so the final Rayleigh quotient needs no extra
    // Hessian action.
    let mut hq: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut diag: Vec<f64> = Vec::with_capacity(cap);
    let mut off: Vec<f64> = Vec::with_capacity(cap);
    let mut trace = Vec::new();
    let mut current = q1;

    for j in 0..cap {
        let mut hv = vec![0.0; n];
        h.apply_into(&current, &mut hv);
        counters.n_prod += 1;
        let a = linalg::dot(&current, &hv);
        let mut w = hv.clone();
        linalg::axpy(-a, &current, &mut w);
        if j > 0 {
            linalg::axpy(-off[j - 1], &q[j - 1], &mut w);
        }
        q.push(current);
        hq.push(hv);
        diag.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for qi in &q {
                let c = linalg::dot(qi, &w);
                linalg::axpy(-c, qi, &mut w);
            }
        }
        if opts.record_trace {
            trace.push(tridiagonal_min_eigenvalue(&diag, &off));
        }
        let b = linalg::norm(&w);
        if j + 1 == cap || !(b > breakdown_tol) {
            break;
        }
        off.push(b);
        linalg::scale(1.0 / b, &mut w);
        current = w;
    }

    let k = diag.len();
    let theta = tridiagonal_min_eigenvalue(&diag, &off[..k - 1]);
    let y = tridiagonal_eigenvector(&diag, &off[..k - 1], theta);
    let mut v = vec![0.0; n];
    let mut hv = vec![0.0; n];
    for (i, yi) in y.iter().enumerate() {
        linalg::axpy(*yi, &q[i], &mut v);
        linalg::axpy(*yi, &hq[i], &mut hv);
    }
    let nv = linalg::norm(&v);
    linalg::scale(1.0 / nv, &mut v);
    linalg::scale(1.0 / nv, &mut hv);
    let alpha = linalg::dot(&v, &hv);

    let elapsed = start.elapsed().as_secs_f64();
    counters.time_eig += elapsed;
    log::trace!("lanczos: n = {n}, steps = {k}, cap = {cap}, alpha = {alpha:.6e}");
    Ok(EigenEstimate {
        alpha,
        v,
        target_eps: opts.eps,
        iters_used: k,
        trace,
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` that
/// are strictly less than `x` (Sturm sequence).
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut p = 1.0;
    for i in 0..d.len() {
        let e2 = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
        p = d[i] - x - if i > 0 { e2 / p } else { 0.0 };
        if p == 0.0 {
            p = -f64::EPSILON * (d[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub(crate) fn tridiagonal_min_eigenvalue(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > 1e-14 * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unit eigenvector for the eigenvalue `theta` of the tridiagonal `(d, e)` by
/// inverse iteration with a partially pivoted band solve.
fn tridiagonal_eigenvector(d: &[f64], e: &[f64], theta: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale = d.iter().chain(e).fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let shift = theta - 1e-10 * scale;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        x = solve_shifted_tridiagonal(d, e, shift, &x, scale);
        let nx = linalg::norm(&x);
        linalg::scale(1.0 / nx, &mut x);
    }
    x
}

/// Solves `(T - shift I) x = b` by Gaussian elimination with partial pivoting.
fn solve_shifted_tridiagonal(d: &[f64], e: &[f64], shift: f64, b: &[f64], scale: f64) -> Vec<f64> {
    let n = d.len();
    // Row i holds entries at columns i, i+1, i+2 after pivoting.
    let mut u0: Vec<f64> = d.iter().map(|di| di - shift).collect();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { e[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let tiny = f64::EPSILON * scale;
    for i in 0..n.saturating_sub(1) {
        let sub = e[i];
        if sub.abs() > u0[i].abs() {
            // swap rows i and i+1
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            u0[i] = sub;
            u1[i] = d[i + 1] - shift;
            u2[i] = if i + 2 < n { e[i + 1] } else { 0.0 };
            rhs.swap(i, i + 1);
            let f = a0 / u0[i];
            u0[i + 1] = a1 - f * u1[i];
            u1[i + 1] = a2 - f * u2[i];
            rhs[i + 1] -= f * rhs[i];
        } else {
            if u0[i] == 0.0 {
                u0[i] = tiny;
            }
            let f = sub / u0[i];
            u0[i + 1] -= f * u1[i];
            u1[i + 1] -= f * u2[i];
            rhs[i + 1] -= f * rhs[i];
        }
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * x[i + 2];
        }
        x[i] = acc / u0[i];
    }
    x
}

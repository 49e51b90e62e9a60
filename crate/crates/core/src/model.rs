//! Cubic models and their regularized and reformulated variants.
//!
//! For a gradient `g`, Hessian `H`, regularization weight `sigma > 0`,
//! approximate minimum eigenvalue `alpha` and regularizer `eps_e >= 0`:
//!
//! * plain:        `m(s)  = g's + 1/2 s'Hs + sigma/3 ||s||^3`
//! * convex_reg:   `m(s) + 3/2 eps_e ||s||^2`
//! * reform_reg:   `g's + 1/2 s'(H - alpha I + 2 eps_e I)s + J(s)`
//!
//! where `J(s) = sigma/3 y^3 + alpha/2 y^2` with `y = max(||s||, -alpha/sigma)`.
//! `J` is convex and C^1 with gradient `[sigma ||s|| + alpha]_+ s`, so the
//! reformulated model is convex whenever `alpha <= lambda_min(H)`, and it
//! coincides with `m` (value and gradient) wherever `sigma ||s|| + alpha >= 0`.
//!
//! Each point evaluation costs exactly one Hessian action, shared between the
//! value and the gradient.

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{apply_hessian, EvalCounters, SymmetricOperator};
use crate::subsolver::SmoothObjective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelMode {
    /// The cubic model `m`.
    Plain,
    /// `m` plus `3/2 eps_e ||s||^2`.
    ConvexReg,
    /// The unconstrained convex reformulation plus `eps_e ||s||^2`.
    ReformReg,
}

/// `max(||s||, -alpha/sigma)`, the minimizing auxiliary variable.
pub fn y_star(s_norm: f64, alpha: f64, sigma: f64) -> f64 {
    s_norm.max(-alpha / sigma)
}

pub fn eval_j(s: &[f64], alpha: f64, sigma: f64) -> f64 {
    j_from_norm(linalg::norm(s), alpha, sigma)
}

fn j_from_norm(s_norm: f64, alpha: f64, sigma: f64) -> f64 {
    let y = y_star(s_norm, alpha, sigma);
    sigma / 3.0 * y * y * y + 0.5 * alpha * y * y
}

/// `[sigma ||s|| + alpha]_+ * s`
pub fn grad_j(s: &[f64], alpha: f64, sigma: f64) -> Vec<f64> {
    let w = (sigma * linalg::norm(s) + alpha).max(0.0);
    linalg::scaled(w, s)
}

/// Value of the auxiliary-variable form `g's + 1/2 s'(H - alpha I)s +
/// sigma/3 y^3 + alpha/2 y^2` for a feasible pair `y >= ||s||`,
/// `y >= -alpha/sigma`. Test helper for the partial-minimization identity.
pub fn eval_mhat(
    s: &[f64],
    y: f64,
    g: &[f64],
    h: &SymmetricOperator,
    alpha: f64,
    sigma: f64,
) -> Result<f64> {
    let s_norm = linalg::norm(s);
    let slack = 1e-12 * (1.0 + s_norm.max(alpha.abs() / sigma));
    if y + slack < s_norm || y + slack < -alpha / sigma {
        return Err(Error::Contract(format!(
            "infeasible auxiliary point: y = {y}, ||s|| = {s_norm}, -alpha/sigma = {}",
            -alpha / sigma
        )));
    }
    let hs = h.apply_uncounted(s);
    Ok(linalg::dot(g, s) + 0.5 * linalg::dot(s, &hs) - 0.5 * alpha * s_norm * s_norm
        + sigma / 3.0 * y * y * y
        + 0.5 * alpha * y * y)
}

/// Value of the reformulated model from precomputed `Hs`.
pub fn reform_value(g: &[f64], s: &[f64], hs: &[f64], alpha: f64, sigma: f64, eps_e: f64) -> f64 {
    let s_norm = linalg::norm(s);
    linalg::dot(g, s)
        + 0.5 * linalg::dot(s, hs)
        + 0.5 * (2.0 * eps_e - alpha) * s_norm * s_norm
        + j_from_norm(s_norm, alpha, sigma)
}

/// Gradient of the reformulated model from precomputed `Hs`.
pub fn reform_grad(g: &[f64], s: &[f64], hs: &[f64], alpha: f64, sigma: f64, eps_e: f64) -> Vec<f64> {
    let s_norm = linalg::norm(s);
    let w = 2.0 * eps_e - alpha + (sigma * s_norm + alpha).max(0.0);
    g.iter()
        .zip(hs)
        .zip(s)
        .map(|((gi, hi), si)| gi + hi + w * si)
        .collect()
}

/// Plain cubic model value from precomputed `Hs`.
pub fn cubic_value(g: &[f64], s: &[f64], hs: &[f64], sigma: f64) -> f64 {
    let s_norm = linalg::norm(s);
    linalg::dot(g, s) + 0.5 * linalg::dot(s, hs) + sigma / 3.0 * s_norm * s_norm * s_norm
}

/// Plain cubic model gradient from precomputed `Hs`.
pub fn cubic_grad(g: &[f64], s: &[f64], hs: &[f64], sigma: f64) -> Vec<f64> {
    let w = sigma * linalg::norm(s);
    g.iter()
        .zip(hs)
        .zip(s)
        .map(|((gi, hi), si)| gi + hi + w * si)
        .collect()
}

/// One subproblem instance.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedModel<'a> {
    g: &'a [f64],
    h: &'a SymmetricOperator,
    sigma: f64,
    alpha: f64,
    eps_e: f64,
    mode: ModelMode,
}

impl<'a> RegularizedModel<'a> {
    pub fn new(
        g: &'a [f64],
        h: &'a SymmetricOperator,
        sigma: f64,
        alpha: f64,
        eps_e: f64,
        mode: ModelMode,
    ) -> Result<Self> {
        if g.len() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                got: g.len(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Contract(format!("sigma must be positive, got {sigma}")));
        }
        if !(eps_e >= 0.0) {
            return Err(Error::Contract(format!("eps_E must be nonnegative, got {eps_e}")));
        }
        if mode == ModelMode::ReformReg && !(alpha < -eps_e) {
            return Err(Error::Contract(format!(
                "reformulated model requires alpha < -eps_E (alpha = {alpha}, eps_E = {eps_e})"
            )));
        }
        Ok(Self {
            g,
            h,
            sigma,
            alpha,
            eps_e,
            mode,
        })
    }

    pub fn plain(g: &'a [f64], h: &'a SymmetricOperator, sigma: f64) -> Result<Self> {
        Self::new(g, h, sigma, 0.0, 0.0, ModelMode::Plain)
    }

    pub fn convex_reg(g: &'a [f64], h: &'a SymmetricOperator, sigma: f64, eps_e: f64) -> Result<Self> {
        Self::new(g, h, sigma, 0.0, eps_e, ModelMode::ConvexReg)
    }

    pub fn reform_reg(
        g: &'a [f64],
        h: &'a SymmetricOperator,
        sigma: f64,
        alpha: f64,
        eps_e: f64,
    ) -> Result<Self> {
        Self::new(g, h, sigma, alpha, eps_e, ModelMode::ReformReg)
    }

    pub fn mode(&self) -> ModelMode {
        self.mode
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn eps_e(&self) -> f64 {
        self.eps_e
    }
    pub fn g(&self) -> &[f64] {
        self.g
    }
    pub fn hessian(&self) -> &SymmetricOperator {
        self.h
    }

    /// Same data, plain cubic model.
    pub fn as_plain(&self) -> RegularizedModel<'a> {
        RegularizedModel {
            alpha: 0.0,
            eps_e: 0.0,
            mode: ModelMode::Plain,
            ..*self
        }
    }

    pub fn hess_action(&self, s: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        apply_hessian(self.h, s, counters)
    }

    /// Value of this model's mode given `Hs`.
    pub fn value_with_hs(&self, s: &[f64], hs: &[f64]) -> f64 {
        match self.mode {
            ModelMode::Plain => cubic_value(self.g, s, hs, self.sigma),
            ModelMode::ConvexReg => {
                let ns = linalg::norm(s);
                cubic_value(self.g, s, hs, self.sigma) + 1.5 * self.eps_e * ns * ns
            }
            ModelMode::ReformReg => reform_value(self.g, s, hs, self.alpha, self.sigma, self.eps_e),
        }
    }

    /// Gradient of this model's mode given `Hs`.
    pub fn grad_with_hs(&self, s: &[f64], hs: &[f64]) -> Vec<f64> {
        match self.mode {
            ModelMode::Plain => cubic_grad(self.g, s, hs, self.sigma),
            ModelMode::ConvexReg => {
                let mut gr = cubic_grad(self.g, s, hs, self.sigma);
                linalg::axpy(3.0 * self.eps_e, s, &mut gr);
                gr
            }
            ModelMode::ReformReg => reform_grad(self.g, s, hs, self.alpha, self.sigma, self.eps_e),
        }
    }

    /// Value and gradient of this model's mode at `s` for one Hessian action.
    pub fn value_and_grad(&self, s: &[f64], counters: &mut EvalCounters) -> Result<(f64, Vec<f64>)> {
        let hs = self.hess_action(s, counters)?;
        Ok((self.value_with_hs(s, &hs), self.grad_with_hs(s, &hs)))
    }

    /// Plain cubic model value `m(s)` (ignores the mode).
    pub fn eval_m(&self, s: &[f64], counters: &mut EvalCounters) -> Result<f64> {
        let hs = self.hess_action(s, counters)?;
        Ok(cubic_value(self.g, s, &hs, self.sigma))
    }

    /// Plain cubic model gradient `g + Hs + sigma ||s|| s` (ignores the mode).
    pub fn grad_m(&self, s: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        let hs = self.hess_action(s, counters)?;
        Ok(cubic_grad(self.g, s, &hs, self.sigma))
    }

    fn require_regularized(&self) -> Result<()> {
        if self.mode == ModelMode::Plain {
            return Err(Error::Contract(
                "regularized evaluation requested on a plain cubic model".into(),
            ));
        }
        Ok(())
    }

    pub fn eval_model_value(&self, s: &[f64], counters: &mut EvalCounters) -> Result<f64> {
        self.require_regularized()?;
        let hs = self.hess_action(s, counters)?;
        Ok(self.value_with_hs(s, &hs))
    }

    pub fn eval_model_grad(&self, s: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
        self.require_regularized()?;
        let hs = self.hess_action(s, counters)?;
        Ok(self.grad_with_hs(s, &hs))
    }

    /// Global minimizer of `phi(a) = m(-a g)` over `a >= 0`.
    ///
    /// `phi'(a) = -||g||^2 + a g'Hg + sigma a^2 ||g||^3`, whose unique positive
    /// root is `a_C = (-c + sqrt(c^2 + 4 sigma ||g||^5)) / (2 sigma ||g||^3)`
    /// with `c = g'Hg`. Returns `(a_C, -a_C g)`; the zero step when `g = 0`.
    pub fn cauchy_point(&self, counters: &mut EvalCounters) -> Result<(f64, Vec<f64>)> {
        if self.mode != ModelMode::Plain {
            return Err(Error::Contract("Cauchy point is defined on the plain model".into()));
        }
        let n = self.g.len();
        let gn = linalg::norm(self.g);
        if gn == 0.0 {
            return Ok((0.0, vec![0.0; n]));
        }
        let hg = self.hess_action(self.g, counters)?;
        let c = linalg::dot(self.g, &hg);
        let alpha_c = cauchy_step_length(gn, c, self.sigma);
        Ok((alpha_c, linalg::scaled(-alpha_c, self.g)))
    }
}

/// Positive root of `sigma gn^3 a^2 + c a - gn^2 = 0`, evaluated without
/// cancellation for either sign of `c`.
pub fn cauchy_step_length(g_norm: f64, curvature: f64, sigma: f64) -> f64 {
    let g2 = g_norm * g_norm;
    let disc = (curvature * curvature + 4.0 * sigma * g2 * g2 * g_norm).sqrt();
    if curvature >= 0.0 {
        2.0 * g2 / (curvature + disc)
    } else {
        (disc - curvature) / (2.0 * sigma * g2 * g_norm)
    }
}

impl SmoothObjective for RegularizedModel<'_> {
    fn dim(&self) -> usize {
        self.g.len()
    }

    fn evaluate(&self, z: &[f64], counters: &mut EvalCounters) -> (f64, Vec<f64>) {
        let hs = apply_hessian(self.h, z, counters).expect("subsolver iterate has model dimension");
        (self.value_with_hs(z, &hs), self.grad_with_hs(z, &hs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_vector, rng_from_seed, DenseMatrix};
    use rand::Rng;

    /// Term-by-term evaluation with explicit loops over a dense matrix.
    fn naive_cubic(g: &[f64], h: &DenseMatrix, sigma: f64, s: &[f64]) -> f64 {
        let n = g.len();
        let mut lin = 0.0;
        for i in 0..n {
            lin += g[i] * s[i];
        }
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += s[i] * h.get(i, j) * s[j];
            }
        }
        let mut sq = 0.0;
        for x in s {
            sq += x * x;
        }
        lin + 0.5 * quad + sigma / 3.0 * sq.sqrt().powi(3)
    }

    fn central_diff<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) - f(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        linalg::norm(&linalg::sub(a, b)) / linalg::norm(b).max(1.0)
    }

    #[test]
    fn plain_model_hand_values() {
        let h = SymmetricOperator::identity(2);
        let g = [-1.0, 0.0];
        let m = RegularizedModel::plain(&g, &h, 1.0).unwrap();
        let mut c = EvalCounters::new();
        assert_eq!(m.eval_m(&[0.0, 0.0], &mut c).unwrap(), 0.0);
        assert!((m.eval_m(&[1.0, 0.0], &mut c).unwrap() + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.n_prod, 2);
    }

    #[test]
    fn plain_model_matches_naive_loops() {
        let mut rng = rng_from_seed(17);
        let a = DenseMatrix::random_symmetric(5, &mut rng);
        let g = gaussian_vector(5, &mut rng);
        let s = gaussian_vector(5, &mut rng);
        let expected = naive_cubic(&g, &a, 0.8, &s);
        let h = SymmetricOperator::dense(a);
        let m = RegularizedModel::plain(&g, &h, 0.8).unwrap();
        let got = m.eval_m(&s, &mut EvalCounters::new()).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn grad_m_hand_values() {
        let h = SymmetricOperator::diagonal(vec![-1.0, 2.0]);
        let g = [0.3, -0.2];
        let m = RegularizedModel::plain(&g, &h, 1.0).unwrap();
        assert_eq!(m.grad_m(&[0.0, 0.0], &mut EvalCounters::new()).unwrap(), g.to_vec());
        let z = [0.0, 0.0];
        let m0 = RegularizedModel::plain(&z, &h, 1.0).unwrap();
        assert_eq!(m0.grad_m(&[1.0, 0.0], &mut EvalCounters::new()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn grad_m_matches_finite_differences() {
        let mut rng = rng_from_seed(6);
        let a = DenseMatrix::random_symmetric(6, &mut rng);
        let g = gaussian_vector(6, &mut rng);
        let s = gaussian_vector(6, &mut rng);
        let h = SymmetricOperator::dense(a);
        let m = RegularizedModel::plain(&g, &h, 1.3).unwrap();
        let mut c = EvalCounters::new();
        let fd = central_diff(|x| m.eval_m(x, &mut EvalCounters::new()).unwrap(), &s, 1e-5);
        assert!(rel_err(&m.grad_m(&s, &mut c).unwrap(), &fd) <= 1e-5);
    }

    #[test]
    fn y_star_branches() {
        assert_eq!(y_star(1.0, 1.0, 2.0), 1.0);
        assert_eq!(y_star(1.0, -2.0, 1.0), 2.0);
        assert_eq!(y_star(3.0, -2.0, 1.0), 3.0);
    }

    #[test]
    fn j_values_and_closed_form() {
        assert_eq!(eval_j(&[0.0, 0.0], 0.0, 1.0), 0.0);
        assert!((eval_j(&[2.0, 0.0], -1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        let inner = eval_j(&[0.0, 0.0], -2.0, 1.0);
        assert!((inner + 4.0 / 3.0).abs() < 1e-15);
        let (alpha, sigma) = (-2.0f64, 1.0f64);
        assert!((inner - alpha.powi(3) / (6.0 * sigma * sigma)).abs() < 1e-15);
    }

    #[test]
    fn grad_j_branches() {
        assert_eq!(grad_j(&[0.5, 0.0], -1.0, 1.0), vec![0.0, 0.0]);
        assert_eq!(grad_j(&[1.0, 0.0], 1.0, 1.0), vec![2.0, 0.0]);
    }

    #[test]
    fn grad_j_is_continuous_across_switching_surface() {
        let mut rng = rng_from_seed(21);
        for _ in 0..100 {
            let sigma = rng.random_range(0.1..3.0);
            let alpha = -rng.random_range(0.1..3.0);
            let mut s = gaussian_vector(4, &mut rng);
            let r = -alpha / sigma;
            linalg::scale(r / linalg::norm(&s), &mut s);
            assert!(linalg::norm(&grad_j(&s, alpha, sigma)) <= 1e-12 * (1.0 + r));
            for f in [1.0 + 1e-9, 1.0 - 1e-9] {
                let sp = linalg::scaled(f, &s);
                assert!(linalg::norm(&grad_j(&sp, alpha, sigma)) <= 1e-7 * linalg::norm(&s));
            }
        }
    }

    #[test]
    fn reform_example_1d() {
        let h = SymmetricOperator::dense(DenseMatrix::from_diagonal(&[-2.0]));
        let g = [-1.0];
        let m = RegularizedModel::reform_reg(&g, &h, 1.0, -2.0, 0.5).unwrap();
        let mut c = EvalCounters::new();
        let v = m.eval_model_value(&[3.0], &mut c).unwrap();
        assert!((v - 1.5).abs() < 1e-14);
        assert!((m.eval_model_value(&[0.0], &mut c).unwrap() + 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(m.eval_model_grad(&[0.0], &mut c).unwrap(), vec![-1.0]);
    }

    #[test]
    fn regularized_evaluation_rejects_plain_mode() {
        let h = SymmetricOperator::identity(2);
        let g = [1.0, 0.0];
        let m = RegularizedModel::plain(&g, &h, 1.0).unwrap();
        assert!(m.eval_model_value(&[0.0, 0.0], &mut EvalCounters::new()).is_err());
        assert!(m.eval_model_grad(&[0.0, 0.0], &mut EvalCounters::new()).is_err());
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let h = SymmetricOperator::identity(2);
        let g = [1.0, 0.0];
        assert!(RegularizedModel::plain(&g, &h, 0.0).is_err());
        assert!(RegularizedModel::convex_reg(&g, &h, 1.0, -1.0).is_err());
        assert!(RegularizedModel::reform_reg(&g, &h, 1.0, -0.1, 0.2).is_err());
        assert!(RegularizedModel::reform_reg(&g, &h, 1.0, -0.3, 0.2).is_ok());
        assert!(RegularizedModel::plain(&[1.0], &h, 1.0).is_err());
    }

    #[test]
    fn value_and_grad_share_one_product() {
        let h = SymmetricOperator::identity(3);
        let g = [1.0, 2.0, 3.0];
        let m = RegularizedModel::convex_reg(&g, &h, 1.0, 0.1).unwrap();
        let mut c = EvalCounters::new();
        let _ = m.value_and_grad(&[0.1, 0.2, 0.3], &mut c).unwrap();
        assert_eq!(c.n_prod, 1);
    }

    #[test]
    fn model_gradients_match_finite_differences() {
        let mut rng = rng_from_seed(71);
        for trial in 0..20 {
            let a = DenseMatrix::random_symmetric(8, &mut rng);
            let g = gaussian_vector(8, &mut rng);
            let h = SymmetricOperator::dense(a);
            let sigma = rng.random_range(0.2..2.0);
            let eps = rng.random_range(0.0..0.5);
            let alpha = -eps - rng.random_range(0.1..2.0);
            let model = if trial % 2 == 0 {
                RegularizedModel::convex_reg(&g, &h, sigma, eps).unwrap()
            } else {
                RegularizedModel::reform_reg(&g, &h, sigma, alpha, eps).unwrap()
            };
            let s = gaussian_vector(8, &mut rng);
            let fd = central_diff(|x| model.eval_model_value(x, &mut EvalCounters::new()).unwrap(), &s, 1e-5);
            let an = model.eval_model_grad(&s, &mut EvalCounters::new()).unwrap();
            assert!(rel_err(&an, &fd) <= 1e-5);
        }
    }

    #[test]
    fn mhat_at_y_star_equals_reformulated_value() {
        let mut rng = rng_from_seed(31);
        let a = DenseMatrix::random_symmetric(4, &mut rng);
        let g = gaussian_vector(4, &mut rng);
        let h = SymmetricOperator::dense(a);
        assert_eq!(eval_mhat(&[0.0; 4], 0.0, &[0.0; 4], &h, 0.0, 1.0).unwrap(), 0.0);
        for _ in 0..50 {
            let s = gaussian_vector(4, &mut rng);
            let alpha = rng.random_range(-3.0..1.0);
            let sigma = rng.random_range(0.2..2.0);
            let y = y_star(linalg::norm(&s), alpha, sigma);
            let hs = h.apply_uncounted(&s);
            let tilde = reform_value(&g, &s, &hs, alpha, sigma, 0.0);
            let mhat = eval_mhat(&s, y, &g, &h, alpha, sigma).unwrap();
            assert!((mhat - tilde).abs() <= 1e-12 * (1.0 + tilde.abs()));
            let y_far = y + rng.random_range(0.0..2.0);
            assert!(eval_mhat(&s, y_far, &g, &h, alpha, sigma).unwrap() >= tilde - 1e-12);
        }
        assert!(eval_mhat(&[1.0, 0.0, 0.0, 0.0], 0.5, &g, &h, 0.0, 1.0).is_err());
    }

    #[test]
    fn cauchy_point_cases() {
        let mut c = EvalCounters::new();
        let zero = SymmetricOperator::zero(2);
        let g0 = [0.0, 0.0];
        let m = RegularizedModel::plain(&g0, &zero, 1.0).unwrap();
        assert_eq!(m.cauchy_point(&mut c).unwrap(), (0.0, vec![0.0, 0.0]));
        assert_eq!(c.n_prod, 0);

        let g = [1.0, 0.0];
        let m = RegularizedModel::plain(&g, &zero, 1.0).unwrap();
        let (a, s) = m.cauchy_point(&mut c).unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert_eq!(s, vec![-1.0, 0.0]);

        let id = SymmetricOperator::identity(2);
        let m = RegularizedModel::plain(&g, &id, 2.0).unwrap();
        let (a, _) = m.cauchy_point(&mut c).unwrap();
        // phi(a) = -a + a^2/2 + 2/3 a^3 on a grid over [0, 5].
        let phi = |a: f64| -a + 0.5 * a * a + 2.0 / 3.0 * a * a * a;
        let (mut best_a, mut best) = (0.0, phi(0.0));
        for k in 0..=500_000 {
            let t = k as f64 * 1e-5;
            if phi(t) < best {
                best = phi(t);
                best_a = t;
            }
        }
        assert!((a - best_a).abs() <= 1e-5);
        assert!((a - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cauchy_step_is_stable_for_negative_curvature() {
        // c < 0 branch against the textbook formula.
        let (gn, c, sigma) = (0.7f64, -3.0f64, 0.4f64);
        let textbook = (-c + (c * c + 4.0 * sigma * gn.powi(5)).sqrt()) / (2.0 * sigma * gn.powi(3));
        assert!((cauchy_step_length(gn, c, sigma) - textbook).abs() < 1e-12 * textbook);
        let (gn, c) = (0.7f64, 3.0f64);
        let textbook = (-c + (c * c + 4.0 * sigma * gn.powi(5)).sqrt()) / (2.0 * sigma * gn.powi(3));
        assert!((cauchy_step_length(gn, c, sigma) - textbook).abs() < 1e-10 * textbook);
    }
}

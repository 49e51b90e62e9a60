//! Symmetric Hessian operators and evaluation counters.
//!
//! Every Hessian action a solver performs goes through [`apply_hessian`] (or
//! an equivalent counted path) so that `n_prod` in [`EvalCounters`] equals the
//! number of matrix-vector products actually spent.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// Safety factor applied on top of the power-iteration estimate of `||H||`.
pub const NORM_BOUND_SAFETY: f64 = 1.1;
pub const NORM_BOUND_DEFAULT_ITERS: usize = 50;

type ActionFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

enum Repr {
    Dense(DenseMatrix),
    Diagonal(Vec<f64>),
    Scalar(f64),
    MatrixFree(Box<ActionFn>),
}

/// A symmetric linear operator `v -> Hv` on `R^n`.
///
/// The operator is immutable after construction apart from the lazily cached
/// norm bound `U_H >= ||H||_2`.
pub struct SymmetricOperator {
    dim: usize,
    repr: Repr,
    norm_bound: OnceLock<f64>,
}

impl fmt::Debug for SymmetricOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Dense(_) => "dense",
            Repr::Diagonal(_) => "diagonal",
            Repr::Scalar(_) => "scalar",
            Repr::MatrixFree(_) => "matrix-free",
        };
        f.debug_struct("SymmetricOperator")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("norm_bound", &self.norm_bound.get())
            .finish()
    }
}

impl SymmetricOperator {
    fn new(dim: usize, repr: Repr) -> Self {
        Self {
            dim,
            repr,
            norm_bound: OnceLock::new(),
        }
    }

    /// Wraps a dense matrix. The caller is responsible for symmetry.
    pub fn dense(m: DenseMatrix) -> Self {
        Self::new(m.dim(), Repr::Dense(m))
    }

    pub fn diagonal(diag: Vec<f64>) -> Self {
        Self::new(diag.len(), Repr::Diagonal(diag))
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        Self::new(dim, Repr::Scalar(c))
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn zero(dim: usize) -> Self {
        Self::scaled_identity(dim, 0.0)
    }

    /// Matrix-free operator given by a Hessian-vector callback that writes
    /// `Hv` into its second argument.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(dim, Repr::MatrixFree(Box::new(f)))
    }

    pub fn with_norm_bound(self, bound: f64) -> Self {
        let _ = self.norm_bound.set(bound);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_bound(&self) -> Option<f64> {
        self.norm_bound.get().copied()
    }

    /// Raw action without counting. Solvers must use [`apply_hessian`].
    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Dense(m) => m.matvec_into(v, out),
            Repr::Diagonal(d) => {
                for ((o, di), vi) in out.iter_mut().zip(d).zip(v) {
                    *o = di * vi;
                }
            }
            Repr::Scalar(c) => {
                for (o, vi) in out.iter_mut().zip(v) {
                    *o = c * vi;
                }
            }
            Repr::MatrixFree(f) => f(v, out),
        }
    }

    pub(crate) fn apply_uncounted(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        out
    }

    /// Assembles the dense matrix column by column. Intended for validators
    /// and test oracles; the products are not counted.
    pub fn to_dense(&self) -> DenseMatrix {
        if let Repr::Dense(m) = &self.repr {
            return m.clone();
        }
        let n = self.dim;
        let mut m = DenseMatrix::zeros(n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            for (i, c) in col.iter().enumerate() {
                m.set(i, j, *c);
            }
            e[j] = 0.0;
        }
        m
    }

    /// Returns the cached norm bound, computing it with counted power
    /// iteration on first use.
    pub fn ensure_norm_bound(&self, iters: usize, seed: u64, counters: &mut EvalCounters) -> f64 {
        if let Some(b) = self.norm_bound.get() {
            return *b;
        }
        let b = power_iteration_bound(self, iters, seed, counters);
        *self.norm_bound.get_or_init(|| b)
    }
}

/// Evaluation counts and timings for one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalCounters {
    pub n_f: u64,
    pub n_g: u64,
    pub n_prod: u64,
    pub n_eig: u64,
    /// Seconds.
    pub time_total: f64,
    /// Seconds spent inside eigenvalue estimation.
    pub time_eig: f64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn time_loop(&self) -> f64 {
        self.time_total - self.time_eig
    }

    /// True when every counter of `self` is at least the matching one in
    /// `earlier`.
    pub fn dominates(&self, earlier: &EvalCounters) -> bool {
        self.n_f >= earlier.n_f
            && self.n_g >= earlier.n_g
            && self.n_prod >= earlier.n_prod
            && self.n_eig >= earlier.n_eig
            && self.time_total >= earlier.time_total
            && self.time_eig >= earlier.time_eig
    }
}

/// Counted Hessian action `Hv`.
pub fn apply_hessian(op: &SymmetricOperator, v: &[f64], counters: &mut EvalCounters) -> Result<Vec<f64>> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    counters.n_prod += 1;
    Ok(op.apply_uncounted(v))
}

/// Upper bound `U_H` on `||H||_2`: power iteration from a seeded random unit
/// vector, inflated by [`NORM_BOUND_SAFETY`]. The zero operator yields 0.
pub fn estimate_norm_bound(op: &SymmetricOperator, iters: usize, rng_seed: u64) -> f64 {
    let mut scratch = EvalCounters::new();
    power_iteration_bound(op, iters, rng_seed, &mut scratch)
}

fn power_iteration_bound(op: &SymmetricOperator, iters: usize, seed: u64, counters: &mut EvalCounters) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    match &op.repr {
        Repr::Scalar(c) => return NORM_BOUND_SAFETY * c.abs(),
        Repr::Diagonal(d) => return NORM_BOUND_SAFETY * d.iter().fold(0.0f64, |a, x| a.max(x.abs())),
        _ => {}
    }
    let mut rng = linalg::rng_from_seed(seed);
    let mut v = linalg::random_unit_vector(n, &mut rng);
    let mut w = vec![0.0; n];
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        op.apply_into(&v, &mut w);
        counters.n_prod += 1;
        let nw = linalg::norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        best = best.max(nw);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    NORM_BOUND_SAFETY * best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_eigs;

    fn naive_matvec(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
        let n = a.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a.as_slice()[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    #[test]
    fn identity_action_counts_one_product() {
        let op = SymmetricOperator::identity(3);
        let mut c = EvalCounters::new();
        let hv = apply_hessian(&op, &[1.0, 2.0, 3.0], &mut c).unwrap();
        assert_eq!(hv, vec![1.0, 2.0, 3.0]);
        assert_eq!(c.n_prod, 1);
    }

    #[test]
    fn diagonal_action() {
        let op = SymmetricOperator::diagonal(vec![1.0, -2.0]);
        let mut c = EvalCounters::new();
        assert_eq!(apply_hessian(&op, &[1.0, 1.0], &mut c).unwrap(), vec![1.0, -2.0]);
    }

    #[test]
    fn dense_action_matches_naive_loop() {
        let mut rng = linalg::rng_from_seed(11);
        let a = DenseMatrix::random_symmetric(8, &mut rng);
        let v = linalg::gaussian_vector(8, &mut rng);
        let expected = naive_matvec(&a, &v);
        let op = SymmetricOperator::dense(a);
        let mut c = EvalCounters::new();
        let got = apply_hessian(&op, &v, &mut c).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let op = SymmetricOperator::identity(3);
        let mut c = EvalCounters::new();
        let err = apply_hessian(&op, &[1.0, 2.0], &mut c).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
        assert_eq!(c.n_prod, 0);
    }

    #[test]
    fn norm_bound_of_zero_operator_is_zero() {
        let op = SymmetricOperator::from_fn(4, |_, out| out.fill(0.0));
        assert_eq!(estimate_norm_bound(&op, 50, 1), 0.0);
        assert_eq!(estimate_norm_bound(&SymmetricOperator::zero(4), 50, 1), 0.0);
    }

    #[test]
    fn norm_bound_of_diag_3_1() {
        let op = SymmetricOperator::dense(DenseMatrix::from_diagonal(&[3.0, 1.0]));
        let b = estimate_norm_bound(&op, 50, 5);
        assert!((3.0..=3.3 + 1e-12).contains(&b), "bound {b}");
    }

    #[test]
    fn norm_bound_dominates_spectrum_of_random_matrix() {
        let mut rng = linalg::rng_from_seed(2024);
        for trial in 0..5 {
            let a = DenseMatrix::random_symmetric(20, &mut rng);
            let (eig, _) = dense_eigs(&a);
            let spectral = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let b = estimate_norm_bound(&SymmetricOperator::dense(a), NORM_BOUND_DEFAULT_ITERS, trial);
            assert!(b >= spectral, "bound {b} < {spectral}");
        }
    }

    #[test]
    fn norm_bound_is_deterministic_and_dominates_actions() {
        let mut rng = linalg::rng_from_seed(99);
        let a = DenseMatrix::random_symmetric(12, &mut rng);
        let op = SymmetricOperator::dense(a);
        let b1 = estimate_norm_bound(&op, 50, 42);
        let b2 = estimate_norm_bound(&op, 50, 42);
        assert_eq!(b1.to_bits(), b2.to_bits());
        for _ in 0..50 {
            let v = linalg::gaussian_vector(12, &mut rng);
            assert!(linalg::norm(&op.apply_uncounted(&v)) <= b1 * linalg::norm(&v));
        }
    }

    #[test]
    fn ensure_norm_bound_counts_products_once() {
        let mut rng = linalg::rng_from_seed(5);
        let op = SymmetricOperator::dense(DenseMatrix::random_symmetric(6, &mut rng));
        let mut c = EvalCounters::new();
        let b = op.ensure_norm_bound(10, 1, &mut c);
        assert_eq!(c.n_prod, 10);
        assert_eq!(op.ensure_norm_bound(10, 1, &mut c), b);
        assert_eq!(c.n_prod, 10);
    }

    #[test]
    fn symmetry_over_random_pairs() {
        let mut rng = linalg::rng_from_seed(8);
        let a = DenseMatrix::random_symmetric(10, &mut rng);
        let h_est = a.frobenius_norm();
        let op = SymmetricOperator::dense(a);
        for _ in 0..100 {
            let u = linalg::gaussian_vector(10, &mut rng);
            let w = linalg::gaussian_vector(10, &mut rng);
            let lhs = linalg::dot(&u, &op.apply_uncounted(&w));
            let rhs = linalg::dot(&w, &op.apply_uncounted(&u));
            let tol = 1e-10 * (1.0 + linalg::norm(&u) * linalg::norm(&w) * h_est);
            assert!((lhs - rhs).abs() <= tol);
        }
    }

    #[test]
    fn to_dense_round_trips_matrix_free() {
        let op = SymmetricOperator::from_fn(3, |v, out| {
            out[0] = 2.0 * v[0] + v[1];
            out[1] = v[0] + 3.0 * v[1];
            out[2] = -v[2];
        });
        let m = op.to_dense();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 1), 3.0);
        assert_eq!(m.get(2, 2), -1.0);
        assert_eq!(m.max_asymmetry(), 0.0);
    }
}

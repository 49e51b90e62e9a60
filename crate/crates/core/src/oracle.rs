//! Independent ground-truth solvers for tests: a cyclic Jacobi eigensolver and
//! an exact global minimizer of the cubic subproblem via the secular equation.
//!
//! Nothing in here is used by the production solvers. The routines are dense,
//! `O(n^3)`, and only meant for small instances.

use crate::linalg::{self, DenseMatrix};

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are the
/// matching orthonormal eigenvectors.
pub fn dense_eigs(h: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let (vals, vecs) = jacobi(h, true);
    (vals, vecs.expect("vectors requested"))
}

/// Eigenvalues only (ascending); skips accumulating the rotations.
pub fn dense_eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    jacobi(h, false).0
}

pub fn dense_min_eigenvalue(h: &DenseMatrix) -> f64 {
    dense_eigenvalues(h).first().copied().unwrap_or(0.0)
}

fn jacobi(h: &DenseMatrix, want_vectors: bool) -> (Vec<f64>, Option<DenseMatrix>) {
    let n = h.dim();
    let mut a: Vec<f64> = h.as_slice().to_vec();
    let mut v = if want_vectors {
        DenseMatrix::identity(n).as_slice().to_vec()
    } else {
        Vec::new()
    };
    let scale = h.frobenius_norm();
    let tol = JACOBI_OFF_TOL * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rotate rows p and q (contiguous), then mirror into the columns.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    a[k * n + p] = a[p * n + k];
                    a[k * n + q] = a[q * n + k];
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vecs = want_vectors.then(|| {
        let mut q = DenseMatrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                q.set(k, col, v[k * n + src]);
            }
        }
        q
    });
    (vals, vecs)
}

/// Global minimizer of `g^T s + 1/2 s^T H s + (sigma/3)||s||^3`.
#[derive(Debug, Clone)]
pub struct CrsExactSolution {
    pub s_star: Vec<f64>,
    pub value: f64,
    pub r_star: f64,
    pub hard_case: bool,
}

/// Relative threshold below which the gradient is treated as orthogonal to
/// the bottom eigenspace.
pub const HARD_CASE_TOL: f64 = 1e-12;

pub fn crs_value(g: &[f64], h: &DenseMatrix, sigma: f64, s: &[f64]) -> f64 {
    let hs = h.matvec(s);
    linalg::dot(g, s) + 0.5 * linalg::dot(s, &hs) + sigma / 3.0 * linalg::norm(s).powi(3)
}

pub fn crs_gradient(g: &[f64], h: &DenseMatrix, sigma: f64, s: &[f64]) -> Vec<f64> {
    let mut out = h.matvec(s);
    let ns = linalg::norm(s);
    for ((o, gi), si) in out.iter_mut().zip(g).zip(s) {
        *o += gi + sigma * ns * si;
    }
    out
}

/// Solves the cubic subproblem exactly by eigendecomposition and bisection on
/// the secular equation `||(H + sigma r I)^{-1} g|| = r`.
pub fn crs_global_solve(g: &[f64], h: &DenseMatrix, sigma: f64) -> CrsExactSolution {
    assert!(sigma > 0.0, "sigma must be positive");
    let n = h.dim();
    assert_eq!(g.len(), n);
    let (lambda, q) = dense_eigs(h);
    let g_hat: Vec<f64> = (0..n).map(|i| (0..n).map(|k| q.get(k, i) * g[k]).sum()).collect();
    let g_norm = linalg::norm(g);
    let lam_min = lambda[0];
    let lam_scale = lambda.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let bottom: Vec<usize> = (0..n)
        .filter(|&i| lambda[i] <= lam_min + 1e-10 * lam_scale)
        .collect();
    let r_lo = (-lam_min / sigma).max(0.0);

    let rotate_back = |coef: &[f64]| -> Vec<f64> {
        (0..n).map(|k| (0..n).map(|i| q.get(k, i) * coef[i]).sum()).collect()
    };
    let finish = |s: Vec<f64>, hard_case: bool| {
        let value = crs_value(g, h, sigma, &s);
        CrsExactSolution {
            r_star: linalg::norm(&s),
            s_star: s,
            value,
            hard_case,
        }
    };

    if g_norm == 0.0 && lam_min >= 0.0 {
        return finish(vec![0.0; n], false);
    }

    let bottom_weight = bottom.iter().map(|&i| g_hat[i] * g_hat[i]).sum::<f64>().sqrt();
    if lam_min < 0.0 && bottom_weight <= HARD_CASE_TOL * g_norm {
        let mut coef = vec![0.0; n];
        for i in 0..n {
            if !bottom.contains(&i) {
                coef[i] = -g_hat[i] / (lambda[i] - lam_min);
            }
        }
        let bar_norm = linalg::norm(&coef);
        if bar_norm <= r_lo {
            let tau = (r_lo * r_lo - bar_norm * bar_norm).max(0.0).sqrt();
            coef[bottom[0]] = tau;
            return finish(rotate_back(&coef), true);
        }
    }

    let step_norm = |r: f64| -> f64 {
        (0..n)
            .map(|i| {
                let d = lambda[i] + sigma * r;
                let c = g_hat[i] / d;
                c * c
            })
            .sum::<f64>()
            .sqrt()
    };
    let psi = |r: f64| step_norm(r) - r;

    let mut lo = r_lo;
    let mut hi = r_lo + (g_norm / sigma).sqrt() + g_norm / (lam_min + sigma * r_lo).max(f64::EPSILON).max(1e-300);
    hi = hi.max(r_lo + 1e-14).max(1e-300);
    while psi(hi) >= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = hi;
    let coef: Vec<f64> = (0..n).map(|i| -g_hat[i] / (lambda[i] + sigma * r)).collect();
    finish(rotate_back(&coef), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(vals: &[f64], q: &DenseMatrix) -> DenseMatrix {
        let n = vals.len();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| q.get(i, k) * vals[k] * q.get(j, k)).sum();
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let (vals, _) = dense_eigs(&DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0]));
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn identity_has_unit_spectrum_and_orthonormal_vectors() {
        let (vals, q) = dense_eigs(&DenseMatrix::identity(4));
        assert!(vals.iter().all(|v| *v == 1.0));
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..4).map(|k| q.get(k, i) * q.get(k, j)).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = linalg::rng_from_seed(50);
        let h = DenseMatrix::random_symmetric(50, &mut rng);
        let (vals, q) = dense_eigs(&h);
        let r = reconstruct(&vals, &q);
        let diff: Vec<f64> = r.as_slice().iter().zip(h.as_slice()).map(|(a, b)| a - b).collect();
        assert!(linalg::norm(&diff) <= 1e-10 * h.frobenius_norm());
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let only = dense_eigenvalues(&h);
        for (a, b) in only.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    fn grid_min_2d(g: &[f64], h: &DenseMatrix, sigma: f64, half: f64, step: f64) -> (f64, [f64; 2]) {
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let k = (2.0 * half / step).round() as i64;
        for i in 0..=k {
            for j in 0..=k {
                let s = [-half + i as f64 * step, -half + j as f64 * step];
                let v = crs_value(g, h, sigma, &s);
                if v < best.0 {
                    best = (v, s);
                }
            }
        }
        best
    }

    #[test]
    fn hard_case_zero_gradient() {
        let h = DenseMatrix::from_diagonal(&[-1.0, 2.0]);
        let sol = crs_global_solve(&[0.0, 0.0], &h, 1.0);
        assert!(sol.hard_case);
        assert!((sol.r_star - 1.0).abs() < 1e-12);
        assert!((sol.value + 1.0 / 6.0).abs() < 1e-12);
        assert!((sol.s_star[0].abs() - 1.0).abs() < 1e-12 && sol.s_star[1].abs() < 1e-12);
        let (grid_val, _) = grid_min_2d(&[0.0, 0.0], &h, 1.0, 2.0, 1e-3);
        assert!((grid_val - sol.value).abs() < 1e-5);
    }

    #[test]
    fn scalar_secular_equation() {
        let h = DenseMatrix::identity(2);
        let sol = crs_global_solve(&[1.0, 0.0], &h, 1.0);
        let r = (5.0f64.sqrt() - 1.0) / 2.0;
        assert!(!sol.hard_case);
        assert!((sol.r_star - r).abs() < 1e-12);
        assert!((sol.s_star[0] + r).abs() < 1e-12 && sol.s_star[1].abs() < 1e-14);
        let (grid_val, s) = grid_min_2d(&[1.0, 0.0], &h, 1.0, 1.5, 1e-3);
        assert!((grid_val - sol.value).abs() < 1e-5);
        assert!((s[0] + r).abs() < 2e-3);
    }

    #[test]
    fn easy_case_satisfies_first_order_conditions() {
        let mut rng = linalg::rng_from_seed(3);
        for _ in 0..20 {
            let n = 6;
            let b = DenseMatrix::random_symmetric(n, &mut rng);
            // B^2 is positive semidefinite.
            let mut h = DenseMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    h.set(i, j, (0..n).map(|k| b.get(i, k) * b.get(k, j)).sum());
                }
            }
            let g = linalg::gaussian_vector(n, &mut rng);
            let sol = crs_global_solve(&g, &h, 0.7);
            let res = crs_gradient(&g, &h, 0.7, &sol.s_star);
            assert!(linalg::norm(&res) <= 1e-8 * (1.0 + linalg::norm(&g)));
        }
    }

    #[test]
    fn indefinite_instances_are_global_minima() {
        let mut rng = linalg::rng_from_seed(13);
        for _ in 0..20 {
            let n = 8;
            let h = DenseMatrix::random_symmetric(n, &mut rng);
            let g = linalg::gaussian_vector(n, &mut rng);
            let sigma = 0.5;
            let sol = crs_global_solve(&g, &h, sigma);
            let res = crs_gradient(&g, &h, sigma, &sol.s_star);
            assert!(linalg::norm(&res) <= 1e-8 * (1.0 + linalg::norm(&g)));
            let lam = dense_min_eigenvalue(&h);
            assert!(lam + sigma * sol.r_star >= -1e-10);
            for _ in 0..200 {
                let p = linalg::gaussian_vector(n, &mut rng);
                let s = linalg::add_scaled(&sol.s_star, 0.3, &p);
                assert!(crs_value(&g, &h, sigma, &s) >= sol.value - 1e-12);
            }
        }
    }
}

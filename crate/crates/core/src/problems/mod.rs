//! Native unconstrained test problems and a finite-difference validator.
//!
//! Problems are looked up by (case-insensitive) name with [`make_problem`].
//! All of them are sums of small element functions, so gradients are
//! assembled exactly and Hessians are exposed as matrix-free operators over
//! the merged element contributions.
//!
//! | name        | formula                                                   | dim        |
//! |-------------|-----------------------------------------------------------|------------|
//! | `BRYBND`    | Broyden banded least squares                              | n >= 2     |
//! | `CHAINWOO`  | chained Woods, plus 1                                     | even, >= 4 |
//! | `EXTROSNB`  | `(x_0-1)^2 + sum 100 (x_i - x_{i-1}^2)^2`                 | n >= 2     |
//! | `FLETCHCR`  | `sum 100 (x_{i+1} - x_i + 1 - x_i^2)^2`                   | n >= 2     |
//! | `GENROSE`   | `1 + sum 100 (x_i - x_{i-1}^2)^2 + (x_i - 1)^2`           | n >= 2     |
//! | `NONCVXU2`  | `sum t_i^2 + 4 cos t_i`                                   | n >= 1     |
//! | `TQUARTIC`  | `(x_0-1)^2 + sum (x_0^2 - x_i^2)^2`                       | n >= 2     |
//! | `WOODS`     | separable Woods blocks                                    | 4 \| n     |
//! | `SADDLE`    | `x_0^2/2 + sum x_i^4/4 - x_i^2/2`                         | n >= 2     |
//! | `SPHERE`    | `1/2 ||x||^2`                                             | n >= 1     |
//! | `QUADRATIC` | `1/2 sum d_i x_i^2`, `d` evenly spread over `[1, 10]`     | n >= 1     |
//! | `BADGRAD`   | `1/2 ||x||^2` with a gradient error of `1e-3` in entry 0  | n >= 1     |
//!
//! `BADGRAD` exists to exercise the validator and is not a real benchmark.

mod catalog;
mod terms;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::SymmetricOperator;

/// A smooth objective with exact first and second derivatives.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Hessian at `x` as an operator; products through it are counted by the
    /// caller.
    fn hessian(&self, x: &[f64]) -> SymmetricOperator;
    /// Standard starting point.
    fn x0(&self) -> Vec<f64>;
    /// Optimal value when known.
    fn f_known(&self) -> Option<f64> {
        None
    }
}

type Builder = fn(usize) -> std::result::Result<catalog::Definition, &'static str>;

const CATALOG: &[(&str, Builder)] = &[
    ("BADGRAD", catalog::sphere),
    ("BRYBND", catalog::brybnd),
    ("CHAINWOO", catalog::chainwoo),
    ("EXTROSNB", catalog::extrosnb),
    ("FLETCHCR", catalog::fletchcr),
    ("GENROSE", catalog::genrose),
    ("NONCVXU2", catalog::noncvxu2),
    ("QUADRATIC", catalog::quadratic),
    ("SADDLE", catalog::saddle),
    ("SPHERE", catalog::sphere),
    ("TQUARTIC", catalog::tquartic),
    ("WOODS", catalog::woods),
];

/// Size of the deliberate gradient error in `BADGRAD`.
pub const BADGRAD_ERROR: f64 = 1e-3;

pub fn supported_problems() -> Vec<String> {
    CATALOG.iter().map(|(n, _)| n.to_string()).collect()
}

/// Element-function problem built from the catalog.
pub struct TestProblem {
    name: &'static str,
    n: usize,
    def: catalog::Definition,
    grad_error: Option<(usize, f64)>,
}

impl Problem for TestProblem {
    fn name(&self) -> &str {
        self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut sink = terms::TermSink::new(None, None);
        (self.def.elements)(x, &mut sink);
        sink.value()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        let mut sink = terms::TermSink::new(Some(&mut g), None);
        (self.def.elements)(x, &mut sink);
        if let Some((i, e)) = self.grad_error {
            g[i] += e;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> SymmetricOperator {
        let mut trip = Vec::new();
        let mut sink = terms::TermSink::new(None, Some(&mut trip));
        (self.def.elements)(x, &mut sink);
        terms::triplet_operator(self.n, trip)
    }

    fn x0(&self) -> Vec<f64> {
        self.def.x0.clone()
    }

    fn f_known(&self) -> Option<f64> {
        self.def.f_known
    }
}

/// Looks up a problem by name and builds it in dimension `dim`.
pub fn make_problem(name: &str, dim: usize) -> Result<Box<dyn Problem>> {
    let upper = name.to_ascii_uppercase();
    let (canonical, build) = CATALOG
        .iter()
        .find(|(n, _)| *n == upper)
        .ok_or_else(|| Error::UnknownProblem {
            name: name.to_string(),
            supported: supported_problems(),
        })?;
    let def = build(dim).map_err(|rule| {
        Error::Config(format!(
            "invalid dimension {dim} for {canonical} (requires {rule}); supported problems: {}",
            supported_problems().join(", ")
        ))
    })?;
    let grad_error = (*canonical == "BADGRAD").then_some((0, BADGRAD_ERROR));
    Ok(Box::new(TestProblem {
        name: canonical,
        n: dim,
        def,
        grad_error,
    }))
}

/// Finite-difference tolerance used by [`check_problem`].
pub const FD_TOL: f64 = 1e-5;

/// Central-difference step `1e-5 (1 + ||x||)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + linalg::norm(x))
}

/// Largest relative errors `(grad_err, hess_err)` of the analytic gradient
/// against central differences of `f`, and of the Hessian action on five
/// random unit directions against central differences of the gradient.
/// Errors are measured in the max norm relative to `max(1, ||reference||)`.
pub fn fd_check(problem: &dyn Problem, x: &[f64], h: f64) -> (f64, f64) {
    fd_check_seeded(problem, x, h, 0)
}

pub fn fd_check_seeded(problem: &dyn Problem, x: &[f64], h: f64, seed: u64) -> (f64, f64) {
    let n = problem.dim();
    let g = problem.gradient(x);
    let mut fd = vec![0.0; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = problem.value(&xp);
        xp[i] = xi - h;
        let fm = problem.value(&xp);
        xp[i] = xi;
        fd[i] = (fp - fm) / (2.0 * h);
    }
    let grad_err = rel_max_err(&g, &fd);

    let hess = problem.hessian(x);
    let mut rng = linalg::rng_from_seed(seed);
    let mut hess_err = 0.0f64;
    for _ in 0..5 {
        let d = linalg::random_unit_vector(n, &mut rng);
        let hd = hess.apply_uncounted(&d);
        let gp = problem.gradient(&linalg::add_scaled(x, h, &d));
        let gm = problem.gradient(&linalg::add_scaled(x, -h, &d));
        let fd_hd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        hess_err = hess_err.max(rel_max_err(&hd, &fd_hd));
    }
    (grad_err, hess_err)
}

fn rel_max_err(analytic: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(1.0f64, |a, r| a.max(r.abs()));
    let diff = analytic
        .iter()
        .zip(reference)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    diff / scale
}

/// Outcome of validating a problem at several random points.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub worst_grad_err: f64,
    pub worst_hess_err: f64,
    /// Points (with their errors) that breach [`FD_TOL`].
    pub failures: Vec<(Vec<f64>, f64, f64)>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs [`fd_check`] at `points` random points `x0 + U[-1, 1]^n`.
pub fn check_problem(problem: &dyn Problem, points: usize, seed: u64) -> CheckReport {
    let mut rng = linalg::rng_from_seed(seed);
    let x0 = problem.x0();
    let mut report = CheckReport {
        worst_grad_err: 0.0,
        worst_hess_err: 0.0,
        failures: Vec::new(),
    };
    for p in 0..points {
        let x: Vec<f64> = x0.iter().map(|xi| xi + rng.random_range(-1.0..=1.0)).collect();
        let (ge, he) = fd_check_seeded(problem, &x, default_fd_step(&x), linalg::derive_seed(seed, p as u64));
        report.worst_grad_err = report.worst_grad_err.max(ge);
        report.worst_hess_err = report.worst_hess_err.max(he);
        if !(ge <= FD_TOL && he <= FD_TOL) {
            report.failures.push((x, ge, he));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIZES: &[(&str, usize)] = &[
        ("GENROSE", 20),
        ("BRYBND", 20),
        ("CHAINWOO", 20),
        ("WOODS", 20),
        ("NONCVXU2", 20),
        ("EXTROSNB", 20),
        ("FLETCHCR", 20),
        ("TQUARTIC", 20),
        ("SADDLE", 5),
        ("QUADRATIC", 10),
    ];

    #[test]
    fn every_problem_passes_fd_check_at_twenty_points() {
        for &(name, n) in SIZES {
            let p = make_problem(name, n).unwrap();
            let r = check_problem(p.as_ref(), 20, 42);
            assert!(r.passed(), "{name}: grad {} hess {}", r.worst_grad_err, r.worst_hess_err);
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_gradient_differences() {
        let mut rng = linalg::rng_from_seed(5);
        for &(name, n) in SIZES {
            let p = make_problem(name, n).unwrap();
            let x: Vec<f64> = p.x0().iter().map(|v| v + rng.random_range(-0.5..0.5)).collect();
            let h = p.hessian(&x).to_dense();
            assert!(h.max_asymmetry() <= 1e-9 * (1.0 + h.frobenius_norm()), "{name}");
            let step = 1e-6;
            for j in 0..n {
                let mut xp = x.clone();
                xp[j] += step;
                let mut xm = x.clone();
                xm[j] -= step;
                let (gp, gm) = (p.gradient(&xp), p.gradient(&xm));
                for i in 0..n {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    assert!((fd - h.get(i, j)).abs() <= 1e-5 * (1.0 + fd.abs()), "{name} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn genrose_is_stationary_at_ones() {
        let p = make_problem("GENROSE", 100).unwrap();
        let g = p.gradient(&vec![1.0; 100]);
        assert!(linalg::norm(&g) <= 1e-10);
        assert_eq!(p.value(&vec![1.0; 100]), 1.0);
    }

    #[test]
    fn woods_minimizer() {
        let p = make_problem("woods", 4).unwrap();
        assert_eq!(p.name(), "WOODS");
        assert_eq!(p.value(&[1.0; 4]), 0.0);
        assert!(p.gradient(&[1.0; 4]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn known_minimizers_of_other_problems() {
        for (name, n) in [("CHAINWOO", 8), ("EXTROSNB", 6), ("FLETCHCR", 6), ("TQUARTIC", 6)] {
            let p = make_problem(name, n).unwrap();
            let x = vec![1.0; n];
            assert!((p.value(&x) - p.f_known().unwrap()).abs() <= 1e-14, "{name}");
            assert!(linalg::norm(&p.gradient(&x)) <= 1e-12, "{name}");
        }
        let s = make_problem("SADDLE", 3).unwrap();
        assert!((s.value(&[0.0, 1.0, -1.0]) - s.f_known().unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn quadratic_fd_is_exact() {
        let p = make_problem("QUADRATIC", 10).unwrap();
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.37).sin()).collect();
        let (ge, he) = fd_check(p.as_ref(), &x, default_fd_step(&x));
        assert!(ge <= 1e-9 && he <= 1e-9, "{ge} {he}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let p = make_problem("BADGRAD", 10).unwrap();
        let x = vec![0.3; 10];
        let (ge, _) = fd_check(p.as_ref(), &x, default_fd_step(&x));
        assert!(ge >= 1e-4, "{ge}");
        assert!(!check_problem(p.as_ref(), 20, 1).passed());
    }

    #[test]
    fn bad_names_and_dims() {
        let e = make_problem("DIXMAANZ", 10).err().unwrap().to_string();
        assert!(e.contains("GENROSE") && e.contains("WOODS"), "{e}");
        let e = make_problem("WOODS", 10).err().unwrap().to_string();
        assert!(e.contains("multiple of 4"), "{e}");
        assert!(make_problem("CHAINWOO", 5).is_err());
    }

    #[test]
    fn evaluation_is_deterministic() {
        let p = make_problem("NONCVXU2", 30).unwrap();
        let x = p.x0();
        assert_eq!(p.value(&x).to_bits(), p.value(&x).to_bits());
        assert_eq!(p.gradient(&x), p.gradient(&x));
    }
}

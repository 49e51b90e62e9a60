//! Formulas of the shipped test problems.
//!
//! Each builder returns the dimension check, the standard starting point, the
//! known optimal value (when there is one) and the element function. Indices
//! are zero-based throughout.

use super::terms::TermSink;

pub(crate) type Elements = Box<dyn Fn(&[f64], &mut TermSink) + Send + Sync>;

pub(crate) struct Definition {
    pub x0: Vec<f64>,
    pub f_known: Option<f64>,
    pub elements: Elements,
}

/// Woods-type block on `(a, b, c, d)` at indices `(ia, ib, ic, id)`.
fn woods_block(x: &[f64], ia: usize, ib: usize, ic: usize, id: usize, s: &mut TermSink) {
    let (a, b, c, d) = (x[ia], x[ib], x[ic], x[id]);
    s.square(100.0, b - a * a, &[(ib, 1.0), (ia, -2.0 * a)], &[(ia, ia, -2.0)]);
    s.square(1.0, 1.0 - a, &[(ia, -1.0)], &[]);
    s.square(90.0, d - c * c, &[(id, 1.0), (ic, -2.0 * c)], &[(ic, ic, -2.0)]);
    s.square(1.0, 1.0 - c, &[(ic, -1.0)], &[]);
    s.square(10.0, b + d - 2.0, &[(ib, 1.0), (id, 1.0)], &[]);
    s.square(0.1, b - d, &[(ib, 1.0), (id, -1.0)], &[]);
}

fn alternating(n: usize, odd: f64, even: f64) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { odd } else { even }).collect()
}

/// Generalized Rosenbrock: `1 + sum_{i>=1} 100 (x_i - x_{i-1}^2)^2 + (x_i - 1)^2`.
pub(crate) fn genrose(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    Ok(Definition {
        x0: (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect(),
        f_known: Some(1.0),
        elements: Box::new(|x, s| {
            s.constant(1.0);
            for i in 1..x.len() {
                let p = x[i - 1];
                s.square(100.0, x[i] - p * p, &[(i, 1.0), (i - 1, -2.0 * p)], &[(i - 1, i - 1, -2.0)]);
                s.square(1.0, x[i] - 1.0, &[(i, 1.0)], &[]);
            }
        }),
    })
}

/// Broyden banded: residuals `x_i (2 + 5 x_i^2) + 1 - sum_{j in J_i} x_j (1 + x_j)`
/// with `J_i = {max(0, i-5), ..., min(n-1, i+1)} \ {i}`.
pub(crate) fn brybnd(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    Ok(Definition {
        x0: vec![-1.0; n],
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            let n = x.len();
            let mut dr = [(0usize, 0.0f64); 8];
            let mut d2r = [(0usize, 0usize, 0.0f64); 8];
            for i in 0..n {
                let xi = x[i];
                let mut r = xi * (2.0 + 5.0 * xi * xi) + 1.0;
                dr[0] = (i, 2.0 + 15.0 * xi * xi);
                d2r[0] = (i, i, 30.0 * xi);
                let mut len = 1;
                for j in i.saturating_sub(5)..=(i + 1).min(n - 1) {
                    if j == i {
                        continue;
                    }
                    r -= x[j] * (1.0 + x[j]);
                    dr[len] = (j, -(1.0 + 2.0 * x[j]));
                    d2r[len] = (j, j, -2.0);
                    len += 1;
                }
                s.square(1.0, r, &dr[..len], &d2r[..len]);
            }
        }),
    })
}

/// Chained Woods: `1 + sum` of Woods blocks on `(x_{2i-2}, x_{2i-1}, x_{2i}, x_{2i+1})`.
pub(crate) fn chainwoo(n: usize) -> Result<Definition, &'static str> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err("n even and >= 4");
    }
    Ok(Definition {
        x0: alternating(n, -3.0, -1.0),
        f_known: Some(1.0),
        elements: Box::new(|x, s| {
            s.constant(1.0);
            for i in 1..x.len() / 2 {
                let j = 2 * i;
                woods_block(x, j - 2, j - 1, j, j + 1, s);
            }
        }),
    })
}

/// Separable Woods function on consecutive blocks of four.
pub(crate) fn woods(n: usize) -> Result<Definition, &'static str> {
    if n < 4 || !n.is_multiple_of(4) {
        return Err("n a positive multiple of 4");
    }
    Ok(Definition {
        x0: alternating(n, -3.0, -1.0),
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            for b in 0..x.len() / 4 {
                let j = 4 * b;
                woods_block(x, j, j + 1, j + 2, j + 3, s);
            }
        }),
    })
}

/// Nonconvex `sum_i t_i^2 + 4 cos(t_i)` with `t_i = x_i + x_j + x_k`,
/// `j = (2i+1) mod n`, `k = (3i+2) mod n` (the one-based `mod(2i-1, n) + 1`
/// and `mod(3i-1, n) + 1` shifted to zero-based indices).
pub(crate) fn noncvxu2(n: usize) -> Result<Definition, &'static str> {
    if n < 1 {
        return Err("n >= 1");
    }
    Ok(Definition {
        x0: (1..=n).map(|i| i as f64).collect(),
        f_known: None,
        elements: Box::new(|x, s| {
            let n = x.len();
            for i in 0..n {
                let j = (2 * i + 1) % n;
                let k = (3 * i + 2) % n;
                let t = x[i] + x[j] + x[k];
                let (sin, cos) = t.sin_cos();
                s.add(
                    [t * t + 4.0 * cos, 2.0 * t - 4.0 * sin, 2.0 - 4.0 * cos],
                    &[(i, 1.0), (j, 1.0), (k, 1.0)],
                    &[],
                );
            }
        }),
    })
}

/// Extended Rosenbrock without the `(x_i - 1)^2` terms except the first:
/// `(x_0 - 1)^2 + sum_{i>=1} 100 (x_i - x_{i-1}^2)^2`.
pub(crate) fn extrosnb(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    Ok(Definition {
        x0: vec![-1.0; n],
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            s.square(1.0, x[0] - 1.0, &[(0, 1.0)], &[]);
            for i in 1..x.len() {
                let p = x[i - 1];
                s.square(100.0, x[i] - p * p, &[(i, 1.0), (i - 1, -2.0 * p)], &[(i - 1, i - 1, -2.0)]);
            }
        }),
    })
}

/// Fletcher's chained function `sum 100 (x_{i+1} - x_i + 1 - x_i^2)^2`.
pub(crate) fn fletchcr(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    Ok(Definition {
        x0: vec![0.0; n],
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            for i in 0..x.len() - 1 {
                let r = x[i + 1] - x[i] + 1.0 - x[i] * x[i];
                s.square(100.0, r, &[(i + 1, 1.0), (i, -1.0 - 2.0 * x[i])], &[(i, i, -2.0)]);
            }
        }),
    })
}

/// `(x_0 - 1)^2 + sum_{i>=1} (x_0^2 - x_i^2)^2`.
pub(crate) fn tquartic(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    Ok(Definition {
        x0: vec![0.1; n],
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            let a = x[0];
            s.square(1.0, a - 1.0, &[(0, 1.0)], &[]);
            for i in 1..x.len() {
                s.square(1.0, a * a - x[i] * x[i], &[(0, 2.0 * a), (i, -2.0 * x[i])], &[(0, 0, 2.0), (i, i, -2.0)]);
            }
        }),
    })
}

/// Strict saddle at the origin: `x_0^2 / 2 + sum_{i>=1} (x_i^4 / 4 - x_i^2 / 2)`,
/// minimized at `(0, +-1, ..., +-1)` with value `-(n-1)/4`.
pub(crate) fn saddle(n: usize) -> Result<Definition, &'static str> {
    if n < 2 {
        return Err("n >= 2");
    }
    let mut x0 = vec![1e-3; n];
    x0[0] = 1.0;
    Ok(Definition {
        x0,
        f_known: Some(-((n - 1) as f64) / 4.0),
        elements: Box::new(|x, s| {
            s.add([0.5 * x[0] * x[0], x[0], 1.0], &[(0, 1.0)], &[]);
            for (i, &t) in x.iter().enumerate().skip(1) {
                let t2 = t * t;
                s.add([0.25 * t2 * t2 - 0.5 * t2, t2 * t - t, 3.0 * t2 - 1.0], &[(i, 1.0)], &[]);
            }
        }),
    })
}

/// Diagonal convex quadratic `1/2 sum d_i x_i^2` with `d` spread evenly over
/// `[1, 10]`.
pub(crate) fn quadratic(n: usize) -> Result<Definition, &'static str> {
    if n < 1 {
        return Err("n >= 1");
    }
    let d: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 1.0 } else { 1.0 + 9.0 * i as f64 / (n - 1) as f64 })
        .collect();
    Ok(Definition {
        x0: vec![1.0; n],
        f_known: Some(0.0),
        elements: Box::new(move |x, s| {
            for (i, (&xi, &di)) in x.iter().zip(&d).enumerate() {
                s.square(0.5 * di, xi, &[(i, 1.0)], &[]);
            }
        }),
    })
}

/// `1/2 ||x||^2`; also the base of the corrupted-gradient debug problem.
pub(crate) fn sphere(n: usize) -> Result<Definition, &'static str> {
    if n < 1 {
        return Err("n >= 1");
    }
    Ok(Definition {
        x0: vec![1.0; n],
        f_known: Some(0.0),
        elements: Box::new(|x, s| {
            for (i, &xi) in x.iter().enumerate() {
                s.square(0.5, xi, &[(i, 1.0)], &[]);
            }
        }),
    })
}

//! Element-wise assembly of objectives written as sums of `phi(r(x))` with a
//! scalar outer function `phi` and a sparse inner function `r`.

use crate::operators::SymmetricOperator;

/// Collects value, gradient and Hessian contributions of one objective
/// evaluation. Gradient and Hessian slots are optional so value-only calls
/// skip the derivative work.
pub(crate) struct TermSink<'a> {
    value: f64,
    grad: Option<&'a mut [f64]>,
    hess: Option<&'a mut Vec<(usize, usize, f64)>>,
}

impl<'a> TermSink<'a> {
    pub(crate) fn new(grad: Option<&'a mut [f64]>, hess: Option<&'a mut Vec<(usize, usize, f64)>>) -> Self {
        Self { value: 0.0, grad, hess }
    }

    pub(crate) fn value(&self) -> f64 {
        self.value
    }

    pub(crate) fn constant(&mut self, c: f64) {
        self.value += c;
    }

    /// Adds `phi(r)` given `[phi, phi', phi'']` at `r`, the sparse gradient of
    /// `r` and the upper triangle (diagonal included) of its Hessian. Repeated
    /// indices are summed.
    pub(crate) fn add(&mut self, phi: [f64; 3], dr: &[(usize, f64)], d2r: &[(usize, usize, f64)]) {
        self.value += phi[0];
        if let Some(g) = self.grad.as_deref_mut() {
            for &(i, a) in dr {
                g[i] += phi[1] * a;
            }
        }
        if let Some(h) = self.hess.as_deref_mut() {
            for &(i, a) in dr {
                for &(j, b) in dr {
                    h.push((i, j, phi[2] * a * b));
                }
            }
            for &(i, j, c) in d2r {
                h.push((i, j, phi[1] * c));
                if i != j {
                    h.push((j, i, phi[1] * c));
                }
            }
        }
    }

    /// Adds `c * r^2`.
    pub(crate) fn square(&mut self, c: f64, r: f64, dr: &[(usize, f64)], d2r: &[(usize, usize, f64)]) {
        self.add([c * r * r, 2.0 * c * r, 2.0 * c], dr, d2r);
    }
}

/// Matrix-free operator over merged `(row, col, value)` triplets.
pub(crate) fn triplet_operator(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> SymmetricOperator {
    triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
    for (i, j, v) in triplets {
        match merged.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += v,
            _ => merged.push((i, j, v)),
        }
    }
    merged.retain(|t| t.2 != 0.0);
    SymmetricOperator::from_fn(n, move |v, out| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(i, j, a) in &merged {
            out[i] += a * v[j];
        }
    })
}

//! Lanczos with full reorthogonalization for the top of a symmetric spectrum.

use crate::spectral::symmetric_tridiagonal_eigen;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosResult {
    pub value: f64,
    /// β_k·|y_k|, an upper bound on ‖Ax − θx‖ for the Ritz pair.
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(q, w);
        axpy(-c, q, w);
    }
}

/// Largest eigenvalue of `apply` on the orthogonal complement of `deflate`.
///
/// `deflate` must be orthonormal and invariant under `apply`. Stops once the
/// Ritz residual is at most `tol·|θ|`, the Krylov space is exhausted, or
/// `max_iter` steps have run.
pub fn lanczos_top<F>(apply: F, start: &[f64], deflate: &[Vec<f64>], tol: f64, max_iter: usize) -> LanczosResult
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let mut q = start.to_vec();
    orthogonalize(&mut q, deflate);
    orthogonalize(&mut q, deflate);
    let norm = dot(&q, &q).sqrt();
    assert!(norm > 0.0, "start vector lies in the deflated space");
    q.iter_mut().for_each(|x| *x /= norm);

    let max_iter = max_iter.min(dim - deflate.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = vec![];
    let mut beta: Vec<f64> = vec![];
    let mut w = vec![0.0; dim];
    let mut next_check = 8;
    loop {
        let k = basis.len();
        apply(&basis[k - 1], &mut w);
        let a = dot(&basis[k - 1], &w);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt keep the basis orthogonal to working precision.
        for _ in 0..2 {
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
        }
        let b = dot(&w, &w).sqrt();
        let exhausted = b <= 1e-13 * a.abs().max(1.0);
        if k >= next_check || k >= max_iter || exhausted {
            let eig = symmetric_tridiagonal_eigen(&alpha, &beta);
            let top = eig.values.len() - 1;
            let theta = eig.values[top];
            let residual = b * eig.vectors[top][k - 1].abs();
            if residual <= tol * theta.abs().max(f64::MIN_POSITIVE) || k >= max_iter || exhausted {
                return LanczosResult { value: theta, residual, iterations: k };
            }
            next_check = k + (k / 4).max(8);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

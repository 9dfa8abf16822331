//! Selected eigenpairs of real symmetric tridiagonal matrices by Sturm
//! bisection followed by inverse iteration.

use alloc::vec::Vec;

use super::tridiag::{solve_pivoted, SymTridiagonal};
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// Number of eigenvalues strictly below `x`.
pub fn count_below(op: &SymTridiagonal, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..op.len() {
        let coupling = if i > 0 {
            op.off[i - 1] * op.off[i - 1]
        } else {
            0.0
        };
        q = op.diag[i] - x - if i > 0 { coupling / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (op.diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based).
pub fn eigenvalue(op: &SymTridiagonal, k: usize) -> f64 {
    assert!(k < op.len(), "eigenvalue index out of range");
    let bound = op.spectral_bound();
    let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(op, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (lo.abs().max(hi.abs())) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Unit eigenvector (Euclidean norm) for an accurately known eigenvalue.
pub fn eigenvector(op: &SymTridiagonal, lambda: f64) -> Vec<f64> {
    let n = op.len();
    let diag: Vec<f64> = op.diag.iter().map(|d| d - lambda).collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64) * 0.618).sin())
        .collect();
    for _ in 0..4 {
        let mut y = solve_pivoted(&op.off, &diag, &op.off, &x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in y.iter_mut() {
            *v /= norm;
        }
        x = y;
    }
    x
}

/// The `k`-th eigenpair, eigenvector with unit Euclidean norm.
pub fn eigenpair(op: &SymTridiagonal, k: usize) -> (f64, Vec<f64>) {
    let lambda = eigenvalue(op, k);
    (lambda, eigenvector(op, lambda))
}

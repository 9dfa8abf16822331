//! Tridiagonal operators and solvers.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;
/// Real symmetric tridiagonal matrix: `diag[i]` on the diagonal and
/// `off[i]` coupling rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len(),
            "off-diagonal must have n - 1 entries"
        );
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds a diagonal term in place.
    pub fn add_diagonal(&mut self, extra: &[f64]) {
        for (d, v) in self.diag.iter_mut().zip(extra) {
            *d += v;
        }
    }

    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off[i];
            }
            out[i] = acc;
        }
    }

    /// Largest eigenvalue magnitude bound (Gershgorin).
    pub fn spectral_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }
}

/// Precomputed Thomas factorization of `1 + c T` for a fixed complex
/// coefficient `c`, used to apply the Cayley map
/// `(1 + c T)^{-1} (1 - c T) = 2 (1 + c T)^{-1} - 1` repeatedly.
///
/// With `c = i dt / 2` this is the Crank-Nicolson step; with a real
/// `c = dtau / 2` it is the imaginary-time relaxation step.
#[derive(Debug, Clone)]
pub struct CayleyFactor {
    /// Modified super-diagonal `c'_i` of the forward sweep.
    pub(crate) upper: Vec<Complex64>,
    /// Reciprocal pivots.
    pub(crate) inv_pivot: Vec<Complex64>,
    /// Sub-diagonal times the reciprocal pivot of its row; entry 0 unused.
    pub(crate) lower_scaled: Vec<Complex64>,
}

impl CayleyFactor {
    pub fn new(op: &SymTridiagonal, coeff: Complex64) -> Self {
        let n = op.len();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut upper = vec![zero; n];
        let mut inv_pivot = vec![zero; n];
        let mut lower_scaled = vec![zero; n];
        for i in 0..n {
            let b = one + coeff * op.diag[i];
            let a = if i > 0 { coeff * op.off[i - 1] } else { zero };
            let pivot = if i > 0 { b - a * upper[i - 1] } else { b };
            inv_pivot[i] = one / pivot;
            lower_scaled[i] = a * inv_pivot[i];
            if i + 1 < n {
                upper[i] = coeff * op.off[i] * inv_pivot[i];
            }
        }
        Self {
            upper,
            inv_pivot,
            lower_scaled,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves `(1 + cT) x = psi` in place.
    pub fn solve(&self, psi: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(psi.len(), n);
        psi[0] *= self.inv_pivot[0];
        for i in 1..n {
            psi[i] = psi[i] * self.inv_pivot[i] - self.lower_scaled[i] * psi[i - 1];
        }
        for i in (0..n - 1).rev() {
            psi[i] -= self.upper[i] * psi[i + 1];
        }
    }

    /// Applies `(1 + cT)^{-1}(1 - cT)` to a contiguous vector in place.
    /// `scratch` must have the same length.
    pub fn apply(&self, psi: &mut [Complex64], scratch: &mut [Complex64]) {
        scratch.copy_from_slice(psi);
        self.solve(scratch);
        for (p, x) in psi.iter_mut().zip(scratch.iter()) {
            *p = 2.0 * x - *p;
        }
    }
}

/// Solves a general real tridiagonal system with partial pivoting.
/// `sub[i]` couples row `i + 1` to column `i`, `sup[i]` row `i` to column
/// `i + 1`. Zero pivots are replaced by a tiny number, which is what
/// inverse iteration wants.
pub fn solve_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::MIN_POSITIVE.sqrt();
    // U has up to two super-diagonals after pivoting.
    let mut d = diag.to_vec();
    let mut u1: Vec<f64> = sup.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut swapped = vec![false; n];
    let mut b = rhs.to_vec();
    let mut below: Vec<f64> = sub.to_vec();
    for i in 0..n.saturating_sub(1) {
        let next_d = d[i + 1];
        let next_u1 = u1[i + 1];
        if below[i].abs() > d[i].abs() {
            // swap rows i and i + 1
            swapped[i] = true;
            let (ri_d, ri_u1, ri_u2) = (d[i], u1[i], u2[i]);
            d[i] = below[i];
            u1[i] = next_d;
            u2[i] = next_u1;
            below[i] = ri_d;
            d[i + 1] = ri_u1;
            u1[i + 1] = ri_u2;
            b.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let factor = below[i] / d[i];
        l[i] = factor;
        d[i + 1] -= factor * u1[i];
        u1[i + 1] -= factor * u2[i];
        b[i + 1] -= factor * b[i];
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        if i + 1 < n {
            acc -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * x[i + 2];
        }
        x[i] = acc / d[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn cayley_matches_dense_solve() {
        let op = laplacian(6);
        let c = Complex64::new(0.0, 0.3);
        let factor = CayleyFactor::new(&op, c);
        let psi0: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut psi = psi0.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); 6];
        factor.apply(&mut psi, &mut scratch);
        // verify (1 + cT) psi = (1 - cT) psi0
        let mut lhs = vec![Complex64::new(0.0, 0.0); 6];
        let mut rhs = vec![Complex64::new(0.0, 0.0); 6];
        op.apply(&psi, &mut lhs);
        op.apply(&psi0, &mut rhs);
        for i in 0..6 {
            let l = psi[i] + c * lhs[i];
            let r = psi0[i] - c * rhs[i];
            assert!((l - r).norm() < 1e-13);
        }
        // unitary for imaginary coefficient
        let n0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((n0 - n1).abs() < 1e-12);
    }

    #[test]
    fn pivoted_solver_handles_zero_leading_pivot() {
        let sub = [1.0, 2.0];
        let diag = [0.0, 1.0, 3.0];
        let sup = [4.0, 1.0];
        let x_true = [1.0, -2.0, 0.5];
        let rhs = [
            diag[0] * x_true[0] + sup[0] * x_true[1],
            sub[0] * x_true[0] + diag[1] * x_true[1] + sup[1] * x_true[2],
            sub[1] * x_true[1] + diag[2] * x_true[2],
        ];
        let x = solve_pivoted(&sub, &diag, &sup, &rhs);
        for (a, b) in x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
